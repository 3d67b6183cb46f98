#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "survadj/errors.hpp"
#include "survadj/estimators.hpp"
#include "survadj/models.hpp"
#include "survadj/nonparam.hpp"

using namespace survadj;
using testutil::make_data;
using testutil::vec;

namespace {

// Confounded sample: treatment depends on x1, outcome on x1 and z.
SurvivalDataset confounded_data(Rng& rng, Eigen::Index n, double censor_prob = 0.25) {
  auto d = testutil::random_data(rng, n, 2, censor_prob);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.group[i] = rng.bernoulli(1.0 / (1.0 + std::exp(0.3 - 0.8 * d.covariates(i, 0))));
    double lp = 0.5 * d.covariates(i, 0) - 0.4 * d.group[i];
    d.time[i] = -std::log(rng.uniform()) * std::exp(-lp);
  }
  return d;
}

void check_same_curve(const StepCurve& a, const StepCurve& b, double tol) {
  REQUIRE(a.n_jumps() == b.n_jumps());
  CHECK(a.initial_value == doctest::Approx(b.initial_value).epsilon(tol));
  for (Eigen::Index j = 0; j < a.n_jumps(); ++j) {
    CHECK(a.times[j] == b.times[j]);
    CHECK(a.values[j] == doctest::Approx(b.values[j]).epsilon(tol));
  }
}

bool proper_curve(const StepCurve& c) {
  double prev = c.initial_value;
  if (prev < -1e-12 || prev > 1.0 + 1e-12) return false;
  for (Eigen::Index j = 0; j < c.n_jumps(); ++j) {
    if (c.values[j] > prev + 1e-12 || c.values[j] < -1e-12 || c.values[j] > 1.0 + 1e-12) return false;
    prev = c.values[j];
  }
  return true;
}

}  // namespace

TEST_CASE("method tokens round-trip") {
  for (MethodId m : kAllMethods) {
    auto parsed = parse_method(method_name(m));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == m);
  }
  CHECK(!parse_method("nope").has_value());
  CHECK(!parse_method("").has_value());
  CHECK(parse_method("aiptw_pv") == MethodId::AIPTW_PV);
}

TEST_CASE("unadjusted method is the stratified product-limit curve with clean flags") {
  Rng rng(211);
  auto d = testutil::random_data(rng, 80, 2, 0.3);
  EstimateOptions opts;
  AdjustedCurves out = estimate(MethodId::KM, d, opts);
  check_same_curve(out.curve_z0, kaplan_meier(d, 0), 1e-15);
  check_same_curve(out.curve_z1, kaplan_meier(d, 1), 1e-15);
  CHECK(!out.nm_z0);
  CHECK(!out.nm_z1);
  CHECK(!out.oob_z0);
  CHECK(!out.oob_z1);
  CHECK(!out.corrected);
}

TEST_CASE("unknown covariate labels are rejected before any fitting") {
  Rng rng(223);
  auto d = testutil::random_data(rng, 30, 1, 0.2);
  EstimateOptions opts;
  opts.outcome_covs = {"x1"};
  opts.treatment_covs = {"missing"};
  try {
    estimate(MethodId::KM, d, opts);  // KM itself needs neither list
    FAIL("expected throw");
  } catch (const SurvError& e) {
    CHECK(e.code() == ErrorCode::MissingCovariateSet);
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
}

TEST_CASE("greedy nearest-neighbor pairing on hand propensities") {
  Eigen::VectorXd fitted = vec({0.3, 0.1, 0.28, 0.9});
  Eigen::VectorXi group = testutil::ivec({1, 0, 0, 0});
  auto rows = detail::match_pairs(fitted, group, {});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == 0);
  CHECK(rows[1] == 2);  // |0.3-0.28| beats 0.2 and 0.6

  // A caliper tighter than the best distance excludes the pair entirely.
  CHECK(detail::match_pairs(fitted, group, 0.01).empty());
  CHECK(detail::match_pairs(fitted, group, 0.02).size() == 2);
}

TEST_CASE("treated subjects are processed in descending propensity order") {
  // The single control sits nearest to BOTH treated rows; descending order
  // means the higher propensity consumes it.
  Eigen::VectorXd fitted = vec({0.5, 0.9, 0.7});
  Eigen::VectorXi group = testutil::ivec({1, 1, 0});
  auto rows = detail::match_pairs(fitted, group, {});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == 1);
  CHECK(rows[1] == 2);
}

TEST_CASE("identical propensities within pairs match the full sample") {
  Eigen::VectorXd fitted = vec({0.2, 0.2, 0.7, 0.7, 0.4, 0.4});
  Eigen::VectorXi group = testutil::ivec({1, 0, 1, 0, 1, 0});
  auto rows = detail::match_pairs(fitted, group, 1e-9);
  REQUIRE(rows.size() == 6);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(rows[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("propensity ties are broken by the supplied rank, not scan order") {
  // One treated, two controls at exactly the same distance.
  Eigen::VectorXd fitted = vec({0.5, 0.5, 0.5});
  Eigen::VectorXi group = testutil::ivec({1, 0, 0});
  auto by_scan = detail::match_pairs(fitted, group, {});
  REQUIRE(by_scan.size() == 2);
  CHECK(by_scan[1] == 1);
  auto by_rank = detail::match_pairs(fitted, group, {}, {2, 1, 0});
  REQUIRE(by_rank.size() == 2);
  CHECK(by_rank[1] == 2);

  // Two tied treated compete for one control; the lower rank wins it.
  group = testutil::ivec({1, 1, 0});
  auto treated_rank = detail::match_pairs(fitted, group, {}, {5, 1, 3});
  REQUIRE(treated_rank.size() == 2);
  CHECK(treated_rank[0] == 1);
}

TEST_CASE("tied matching follows input row order, not event-time order") {
  // Constant propensity ties every pair; the two surplus controls that drop
  // out must be the last ones of the INPUT, not the longest survivors.
  SurvivalDataset d;
  d.time = vec({9.0, 1.0, 8.0, 2.0, 3.0, 4.0});
  d.status = testutil::ivec({1, 1, 1, 1, 1, 1});
  d.group = testutil::ivec({0, 0, 0, 0, 1, 1});
  d.covariates = Eigen::MatrixXd::Zero(6, 1);
  d.covariate_names = {"x1"};
  EstimateOptions opts;
  opts.treatment_covs = {};  // intercept-only: every fitted propensity equal
  AdjustedCurves got = estimate(MethodId::MATCHING, d, opts);
  // Matched controls are input rows 0 and 1 (times 9 and 1); a time-ordered
  // scan would have kept rows 1 and 3 instead and clipped the curve at 2.
  REQUIRE(got.curve_z0.times.size() == 2);
  CHECK(got.curve_z0.times[0] == 1.0);
  CHECK(got.curve_z0.times[1] == 9.0);
}

TEST_CASE("matched estimator equals the stratified curve on the matched rows") {
  Rng rng(227);
  auto d = confounded_data(rng, 120);
  PropensityFit fit = fit_logistic(d, {"x1"});
  auto rows = detail::match_pairs(fit.fitted, d.group, {});
  auto matched = select_rows(d, rows);
  GroupCurves got = est_matching(d, {"x1"});
  check_same_curve(got.z0, kaplan_meier(matched, 0), 1e-12);
  check_same_curve(got.z1, kaplan_meier(matched, 1), 1e-12);
}

TEST_CASE("a zero caliper on distinct propensities leaves nothing to match") {
  Rng rng(229);
  auto d = confounded_data(rng, 60);
  EstimateOptions opts;
  opts.treatment_covs = {"x1"};
  opts.caliper_sd_fraction = 0.0;
  try {
    estimate(MethodId::MATCHING, d, opts);
    FAIL("expected throw");
  } catch (const SurvError& e) {
    CHECK(e.code() == ErrorCode::NoMatches);
  }
}

TEST_CASE("two-point constrained weights solve the hand optimization") {
  Eigen::MatrixXd centered(2, 1);
  centered << 0.0 - 0.75, 1.0 - 0.75;
  Eigen::VectorXd p = detail::el_group_weights(centered);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("constrained weights satisfy their defining equations on random data") {
  Rng rng(233);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform() * 40.0);
    const Eigen::Index q = 1 + static_cast<Eigen::Index>(rng.uniform() * 3.0);
    Eigen::MatrixXd x(n, q);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < q; ++j) x(i, j) = rng.normal();
    // Target a point strictly inside the hull: a convex combination of rows.
    Eigen::VectorXd lambda(n);
    for (Eigen::Index i = 0; i < n; ++i) lambda[i] = 0.05 + rng.uniform();
    lambda /= lambda.sum();
    Eigen::RowVectorXd target = lambda.transpose() * x;
    Eigen::MatrixXd centered = x.rowwise() - target;
    Eigen::VectorXd p = detail::el_group_weights(centered);
    CHECK(std::abs(p.sum() - 1.0) < 1e-10);
    CHECK((p.array() > 0.0).all());
    CHECK((p.transpose() * centered).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("balance targets outside the group range are infeasible") {
  Eigen::MatrixXd centered(3, 1);
  centered << -2.5, -1.5, -0.5;  // target above every group value
  try {
    detail::el_group_weights(centered);
    FAIL("expected throw");
  } catch (const SurvError& e) {
    CHECK(e.code() == ErrorCode::HullViolation);
  }
}

TEST_CASE("six-subject balance weights reproduce the hand-solved curves") {
  auto d = make_data({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, {1, 1, 1, 1, 1, 1}, {0, 0, 1, 1, 1, 1},
                     {{"x", {0.0, 1.0, 0.5, 1.0, 1.0, 1.0}}});
  // Pooled mean 0.75.  Group 0 values {0,1} -> p=(0.25,0.75).
  // Group 1 values {0.5,1,1,1} -> p=(1/2,1/6,1/6,1/6).
  GroupCurves out = est_el(d, {});
  REQUIRE(out.z0.n_jumps() == 2);
  CHECK(out.z0.values[0] == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(out.z0.values[1] == doctest::Approx(0.0).epsilon(1e-8));
  REQUIRE(out.z1.n_jumps() == 4);
  CHECK(out.z1.values[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(out.z1.values[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(out.z1.values[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
  CHECK(out.z1.values[3] == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("already balanced groups keep uniform weights and the plain group curves") {
  auto d = make_data({1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}, {0, 0, 1, 1},
                     {{"x", {-1.0, 1.0, -1.0, 1.0}}});
  GroupCurves out = est_el(d, {"x"});
  check_same_curve(out.z0, kaplan_meier(d, 0), 1e-14);
  check_same_curve(out.z1, kaplan_meier(d, 1), 1e-14);
}

TEST_CASE("exact half propensities make inverse weighting collapse to the plain curves") {
  Rng rng(239);
  auto d = testutil::random_data(rng, 100, 2, 0.25);
  for (Eigen::Index i = 0; i < d.n(); ++i) d.group[i] = i % 2;  // balanced by construction
  GroupCurves w = est_iptw_km(d, {});
  StepCurve km0 = kaplan_meier(d, 0), km1 = kaplan_meier(d, 1);
  // Intercept-only on balanced groups fits pi = 0.5 exactly, so the weighted
  // ratios are bit-identical to the unweighted ones.
  CHECK(w.z0.times == km0.times);
  CHECK(w.z0.values == km0.values);
  CHECK(w.z1.times == km1.times);
  CHECK(w.z1.values == km1.values);
}

TEST_CASE("hazard-weighted variant dominates the product-limit variant") {
  Rng rng(241);
  auto d = confounded_data(rng, 150);
  GroupCurves km = est_iptw_km(d, {"x1"});
  GroupCurves hz = est_iptw_hz(d, {"x1"});
  REQUIRE(hz.z0.n_jumps() == km.z0.n_jumps());
  for (Eigen::Index j = 0; j < km.z0.n_jumps(); ++j) CHECK(hz.z0.values[j] >= km.z0.values[j] - 1e-12);
  for (Eigen::Index j = 0; j < km.z1.n_jumps(); ++j) CHECK(hz.z1.values[j] >= km.z1.values[j] - 1e-12);
}

TEST_CASE("inverse-weighted pseudo-value averages reduce to empirical survival") {
  Rng rng(251);
  auto d = testutil::random_data(rng, 60, 1, 0.0);
  for (Eigen::Index i = 0; i < d.n(); ++i) d.group[i] = i % 2;
  Eigen::VectorXd grid = vec({0.3, 0.8, 1.5});
  GroupCurves out = est_iptw_pv(d, {}, grid);
  for (int z : {0, 1}) {
    const StepCurve& c = z == 0 ? out.z0 : out.z1;
    REQUIRE(c.n_jumps() == 3);
    for (Eigen::Index j = 0; j < 3; ++j) {
      double surv = 0.0, count = 0.0;
      for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.group[i] != z) continue;
        count += 1.0;
        surv += d.time[i] > grid[j] ? 1.0 : 0.0;
      }
      CHECK(c.values[j] == doctest::Approx(surv / count).epsilon(1e-11));
    }
  }
}

TEST_CASE("weighted pseudo-value averages stay inside the group pseudo-value range") {
  Rng rng(257);
  auto d = confounded_data(rng, 90, 0.3);
  Eigen::VectorXd grid = pooled_event_times(d).segment(4, 14);
  PseudoValueMatrix pv = pseudo_values(select_rows(d, canonical_order(d)), grid);
  auto canon = select_rows(d, canonical_order(d));
  GroupCurves out = est_iptw_pv(d, {"x1"}, grid);
  for (int z : {0, 1}) {
    const StepCurve& c = z == 0 ? out.z0 : out.z1;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      double lo = 1e300, hi = -1e300;
      for (Eigen::Index i = 0; i < canon.n(); ++i) {
        if (canon.group[i] != z) continue;
        lo = std::min(lo, pv.values(i, j));
        hi = std::max(hi, pv.values(i, j));
      }
      CHECK(c.values[j] >= lo - 1e-12);
      CHECK(c.values[j] <= hi + 1e-12);
    }
  }
}

TEST_CASE("standardized regression curves average one prediction per subject") {
  auto d = make_data({1.0}, {1}, {1}, {{"x", {0.4}}});
  GroupCurves out = est_g_formula(d, {"x"});
  CoxFit fit = fit_cox(d, {"x"}, true);
  for (double t : {0.5, 1.0, 2.0}) {
    CHECK(eval_curve(out.z0, t) == doctest::Approx(predict_cox_survival(fit, 0, vec({0.4}), t)).epsilon(1e-12));
    CHECK(eval_curve(out.z1, t) == doctest::Approx(predict_cox_survival(fit, 1, vec({0.4}), t)).epsilon(1e-12));
  }
}

TEST_CASE("standardized curves are monotone even under heavy confounding") {
  Rng rng(263);
  auto d = confounded_data(rng, 120);
  GroupCurves out = est_g_formula(d, {"x1", "x2"});
  CHECK(proper_curve(out.z0));
  CHECK(proper_curve(out.z1));
}

TEST_CASE("constant weights drop out of the weighted standardization") {
  Rng rng(269);
  auto d = testutil::random_data(rng, 100, 2, 0.25);
  for (Eigen::Index i = 0; i < d.n(); ++i) d.group[i] = i % 2;
  GroupCurves plain = est_g_formula(d, {"x1", "x2"});
  GroupCurves weighted = est_g_formula_iptw(d, {"x1", "x2"}, {});
  check_same_curve(weighted.z0, plain.z0, 1e-10);
  check_same_curve(weighted.z1, plain.z1, 1e-10);
}

TEST_CASE("pseudo-value standardization with no covariates is the group empirical curve") {
  Rng rng(271);
  auto d = testutil::random_data(rng, 70, 1, 0.0);
  Eigen::VectorXd grid = vec({0.25, 0.7, 1.3, 2.2});
  GroupCurves out = est_g_formula_pv(d, {}, grid);
  for (int z : {0, 1}) {
    const StepCurve& c = z == 0 ? out.z0 : out.z1;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      double surv = 0.0, count = 0.0;
      for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.group[i] != z) continue;
        count += 1.0;
        surv += d.time[i] > grid[j] ? 1.0 : 0.0;
      }
      CHECK(c.values[j] == doctest::Approx(surv / count).epsilon(1e-10));
    }
  }
}

TEST_CASE("single-point grids yield single-value curves") {
  Rng rng(277);
  auto d = testutil::random_data(rng, 40, 1, 0.2);
  GroupCurves out = est_g_formula_pv(d, {"x1"}, vec({1.0}));
  CHECK(out.z0.n_jumps() == 1);
  CHECK(out.z1.n_jumps() == 1);
}

TEST_CASE("augmented combination formula on four hand subjects") {
  auto d = make_data({1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}, {1, 1, 0, 0});
  Eigen::VectorXd grid = vec({0.5, 1.5, 2.5, 3.5});
  Eigen::MatrixXd cox_surv = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd pi_z = Eigen::VectorXd::Constant(4, 0.5);
  StepCurve censor;  // no censoring: G is constant one
  StepCurve z1 = detail::aiptw_curve(d, 1, grid, cox_surv, pi_z, censor);
  REQUIRE(z1.n_jumps() == 4);
  CHECK(z1.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z1.values[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(z1.values[2] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(z1.values[3] == doctest::Approx(0.0).epsilon(1e-14));
  StepCurve z0 = detail::aiptw_curve(d, 0, grid, cox_surv, pi_z, censor);
  CHECK(z0.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z0.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z0.values[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z0.values[3] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("censoring support must cover the whole evaluation grid") {
  auto d = make_data({1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}, {1, 1, 0, 0});
  Eigen::MatrixXd cox_surv = Eigen::MatrixXd::Zero(4, 2);
  Eigen::VectorXd pi_z = Eigen::VectorXd::Constant(4, 0.5);
  StepCurve censor;
  censor.times = vec({2.0});
  censor.values = vec({0.0});
  try {
    detail::aiptw_curve(d, 1, vec({1.5, 2.5}), cox_surv, pi_z, censor);
    FAIL("expected throw");
  } catch (const SurvError& e) {
    CHECK(e.code() == ErrorCode::CensoringSupport);
  }
  // Left limits: a grid point exactly at the censoring time is still covered.
  CHECK_NOTHROW(detail::aiptw_curve(d, 1, vec({1.5, 2.0}), cox_surv, pi_z, censor));
}

TEST_CASE("augmented pseudo-value combination with a zero outcome model") {
  auto d = make_data({1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}, {1, 1, 0, 0});
  Eigen::VectorXd grid = vec({0.5, 1.5, 2.5, 3.5});
  Eigen::MatrixXd m_hat = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd pi_z = Eigen::VectorXd::Constant(4, 0.5);
  Eigen::MatrixXd pv(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) pv(i, j) = d.time[i] > grid[j] ? 1.0 : 0.0;
  StepCurve z1 = detail::aiptw_pv_curve(d, 1, grid, m_hat, pi_z, pv);
  CHECK(z1.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z1.values[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(z1.values[2] == doctest::Approx(0.0).epsilon(1e-14));
  StepCurve z0 = detail::aiptw_pv_curve(d, 0, grid, m_hat, pi_z, pv);
  CHECK(z0.values[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z0.values[3] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("proper-curve estimators never raise diagnostics") {
  Rng rng(281);
  auto d = confounded_data(rng, 130, 0.3);
  EstimateOptions opts;
  opts.outcome_covs = {"x1", "x2"};
  opts.treatment_covs = {"x1"};
  for (MethodId m : {MethodId::KM, MethodId::IPTW_KM, MethodId::IPTW_HZ, MethodId::MATCHING, MethodId::EL,
                     MethodId::G_FORMULA, MethodId::G_FORMULA_IPTW}) {
    AdjustedCurves out = estimate(m, d, opts);
    CAPTURE(method_name(m));
    CHECK(!out.nm_z0);
    CHECK(!out.nm_z1);
    CHECK(!out.oob_z0);
    CHECK(!out.oob_z1);
    CHECK(proper_curve(out.curve_z0));
    CHECK(proper_curve(out.curve_z1));
  }
}

TEST_CASE("corrections repair the pseudo-value and augmented families") {
  Rng rng(283);
  auto d = confounded_data(rng, 90, 0.35);
  EstimateOptions opts;
  opts.outcome_covs = {"x1", "x2"};
  opts.treatment_covs = {"x1"};
  opts.apply_corrections = true;
  for (MethodId m : {MethodId::G_FORMULA_PV, MethodId::IPTW_PV, MethodId::AIPTW, MethodId::AIPTW_PV}) {
    AdjustedCurves out = estimate(m, d, opts);
    CAPTURE(method_name(m));
    CHECK(out.corrected);
    CHECK(proper_curve(out.curve_z0));
    CHECK(proper_curve(out.curve_z1));
  }
}

TEST_CASE("estimates are invariant to row permutations") {
  Rng rng(293);
  auto d = confounded_data(rng, 100, 0.25);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.n()));
  for (Eigen::Index i = 0; i < d.n(); ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = d.n() - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(static_cast<Eigen::Index>(rng.uniform() * (i + 1)))]);
  auto shuffled = select_rows(d, perm);

  EstimateOptions opts;
  opts.outcome_covs = {"x1", "x2"};
  opts.treatment_covs = {"x1", "x2"};
  for (MethodId m : kAllMethods) {
    CAPTURE(method_name(m));
    AdjustedCurves a = estimate(m, d, opts);
    AdjustedCurves b = estimate(m, shuffled, opts);
    CHECK(a.curve_z0.times == b.curve_z0.times);
    CHECK(a.curve_z0.values == b.curve_z0.values);
    CHECK(a.curve_z1.times == b.curve_z1.times);
    CHECK(a.curve_z1.values == b.curve_z1.values);
    CHECK(a.nm_z0 == b.nm_z0);
    CHECK(a.oob_z0 == b.oob_z0);
  }
}

TEST_CASE("the augmentation term shrinks as the sample grows") {
  // Correct two-sample exponential outcome model, no censoring: the mean
  // correction added on top of the standardized curve is O(1/sqrt(n)).
  Rng rng(307);
  auto draw = [&](Eigen::Index n) {
    SurvivalDataset d;
    d.time.resize(n);
    d.status = Eigen::VectorXi::Ones(n);
    d.group.resize(n);
    d.covariates.resize(n, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      d.group[i] = rng.bernoulli(0.5);
      d.time[i] = -std::log(rng.uniform()) / (d.group[i] == 1 ? 2.0 : 1.0);
    }
    return d;
  };
  auto mean_abs_augmentation = [&](Eigen::Index n, int reps) {
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
      auto d = draw(n);
      EstimationCache cache;
      EstimateOptions opts;
      AdjustedCurves aug = estimate(MethodId::AIPTW, d, opts, cache);
      AdjustedCurves base = estimate(MethodId::G_FORMULA, d, opts, cache);
      StepCurve diff0 = curve_difference(aug.curve_z0, base.curve_z0);
      StepCurve diff1 = curve_difference(aug.curve_z1, base.curve_z1);
      diff0.values = diff0.values.cwiseAbs();
      diff1.values = diff1.values.cwiseAbs();
      acc += integrate_curve(diff0, 0.0, 1.0) + integrate_curve(diff1, 0.0, 1.0);
    }
    return acc / reps;
  };
  const double small_n = mean_abs_augmentation(100, 25);
  const double large_n = mean_abs_augmentation(900, 25);
  CHECK(large_n < small_n);
}
