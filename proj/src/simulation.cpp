#include "survadj/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "survadj/errors.hpp"
#include "survadj/nonparam.hpp"
#include "survadj/rng.hpp"

namespace survadj {

namespace {

constexpr double kHorizonLevel = 0.05;
constexpr double kOobTol = 1e-10;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Empirical survival of a sample of times: S(t) = #{t_i > t} / N.
StepCurve proportion_curve(const Eigen::VectorXd& times) {
  std::vector<double> sorted(times.data(), times.data() + times.size());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::vector<double> uniq, surv;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    uniq.push_back(sorted[i]);
    surv.push_back(static_cast<double>(sorted.size() - j) / n);
    i = j;
  }
  StepCurve curve;
  curve.times = Eigen::Map<const Eigen::VectorXd>(uniq.data(), static_cast<Eigen::Index>(uniq.size()));
  curve.values = Eigen::Map<const Eigen::VectorXd>(surv.data(), static_cast<Eigen::Index>(surv.size()));
  curve.initial_value = 1.0;
  return curve;
}

void check_weibull(const WeibullParams& wb, const char* label) {
  if (!(wb.lambda > 0.0) || !std::isfinite(wb.lambda) || !(wb.gamma > 0.0) || !std::isfinite(wb.gamma))
    throw SurvError(ErrorCode::InvalidArgument,
                    std::string(label) + " Weibull parameters must be positive and finite");
}

// Correction as the metrics see it: truncate, drop jumps at or past tau, then
// isotonic with weights equal to the segment lengths inside [0, tau].  That
// makes the pooling a projection in exactly the norm delta_mse integrates, so
// corrected delta_mse can never exceed the uncorrected one (clamping into
// [0,1] is pointwise contractive toward the bounded truth as well).
StepCurve corrected_on_window(const StepCurve& curve, double tau) {
  StepCurve out = truncate_curve(curve);
  Eigen::Index k = 0;
  while (k < out.n_jumps() && out.times[k] < tau) ++k;
  out.times.conservativeResize(k);
  out.values.conservativeResize(k);
  if (k == 0) return out;
  Eigen::VectorXd w(k);
  for (Eigen::Index j = 0; j + 1 < k; ++j) w[j] = out.times[j + 1] - out.times[j];
  w[k - 1] = tau - out.times[k - 1];
  out.values = pava_non_increasing(out.values, w);
  return out;
}

// Per-replication NM/OOB diagnostics are confined to the evaluation window:
// an estimate past tau is not part of anything the study reports, and the
// IPCW-style tails out there would otherwise dominate both flags.
bool nm_within(const StepCurve& curve, double tau) {
  double prev = curve.initial_value;
  for (Eigen::Index k = 0; k < curve.n_jumps() && curve.times[k] <= tau; ++k) {
    if (curve.values[k] > prev + kOobTol) return true;
    prev = curve.values[k];
  }
  return false;
}

bool oob_within(const StepCurve& curve, double tau) {
  if (curve.initial_value < -kOobTol || curve.initial_value > 1.0 + kOobTol) return true;
  for (Eigen::Index k = 0; k < curve.n_jumps() && curve.times[k] <= tau; ++k)
    if (curve.values[k] < -kOobTol || curve.values[k] > 1.0 + kOobTol) return true;
  return false;
}

// Value of the prefix-integral representation's running integral at time t.
struct PartialIntegrals {
  double s;
  double s2;
};

PartialIntegrals integrals_at(const TruthIntegrals& truth, double t) {
  const double* begin = truth.bounds.data();
  const double* end = begin + truth.bounds.size();
  const auto idx = static_cast<Eigen::Index>(std::upper_bound(begin, end, t) - begin) - 1;
  const double dt = t - truth.bounds[idx];
  return {truth.int_s[idx] + truth.seg[idx] * dt, truth.int_s2[idx] + truth.seg[idx] * truth.seg[idx] * dt};
}

// Walks the estimate's segments over [0, tau], calling fn(a, b, value).
template <typename Fn>
void for_each_segment(const StepCurve& est, double tau, Fn&& fn) {
  double start = 0.0;
  double value = est.initial_value;
  for (Eigen::Index j = 0; j < est.times.size() && start < tau; ++j) {
    const double t = est.times[j];
    if (t > start) {
      fn(start, std::min(t, tau), value);
      start = t;
    }
    value = est.values[j];
  }
  if (start < tau) fn(start, tau, value);
}

struct CellStats {
  std::vector<double> bias;
  std::vector<double> mse;
  long nm = 0;
  long oob = 0;
};

}  // namespace

const char* scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::CO_CT: return "co_ct";
    case ScenarioId::CO_ICT: return "co_ict";
    case ScenarioId::ICO_CT: return "ico_ct";
    case ScenarioId::ICO_ICT: return "ico_ict";
    case ScenarioId::CO_CT_TP: return "co_ct_tp";
    case ScenarioId::CO_CT_OP: return "co_ct_op";
  }
  return "unknown";
}

std::optional<ScenarioId> parse_scenario(std::string_view token) {
  for (ScenarioId s : kAllScenarios)
    if (token == scenario_name(s)) return s;
  return std::nullopt;
}

ScenarioSpec scenario_spec(ScenarioId id) {
  const std::vector<std::string> outcome_correct = {"X1", "X2", "X4", "X5"};
  const std::vector<std::string> outcome_wrong = {"X1", "X2"};
  const std::vector<std::string> treatment_correct = {"X2", "X5"};
  const std::vector<std::string> treatment_wrong = {"X2"};
  switch (id) {
    case ScenarioId::CO_CT: return {id, outcome_correct, treatment_correct};
    case ScenarioId::CO_ICT: return {id, outcome_correct, treatment_wrong};
    case ScenarioId::ICO_CT: return {id, outcome_wrong, treatment_correct};
    case ScenarioId::ICO_ICT: return {id, outcome_wrong, treatment_wrong};
    case ScenarioId::CO_CT_TP:
      // pure treatment predictors added to both models
      return {id, {"X1", "X2", "X3", "X4", "X5", "X6"}, {"X2", "X3", "X5", "X6"}};
    case ScenarioId::CO_CT_OP:
      // confounders plus the pure outcome predictors
      return {id, outcome_correct, {"X1", "X2", "X4", "X5"}};
  }
  throw SurvError(ErrorCode::InvalidArgument, "scenario_spec: unknown scenario");
}

DGPConfig default_dgp() {
  DGPConfig cfg;
  cfg.covariate_specs = {
      CovariateSpec::normal(0.0, 1.0),   // X1: outcome predictor
      CovariateSpec::bernoulli(0.5),     // X2: confounder
      CovariateSpec::normal(0.0, 1.0),   // X3: treatment predictor
      CovariateSpec::normal(0.0, 1.0),   // X4: outcome predictor
      CovariateSpec::bernoulli(0.5),     // X5: confounder
      CovariateSpec::normal(0.0, 1.0),   // X6: treatment predictor
  };
  const double b = std::log(1.8);
  cfg.beta_outcome = (Eigen::VectorXd(5) << b, b, b, b, -0.7).finished();
  // Confounders at 0.8, pure treatment predictors at 0.25.  The intercept is
  // minus half the sum of the Bernoulli coefficients, which keeps the
  // treatment linear predictor symmetric about zero and the treated fraction
  // exactly 1/2.  Strong confounding makes the unadjusted contrast fail
  // visibly; the predictors stay weak enough that adding them to a propensity
  // model perturbs fit without re-balancing anything.
  cfg.beta_treatment = (Eigen::VectorXd(4) << 0.8, 0.25, 0.8, 0.25).finished();
  cfg.treatment_intercept = -0.8;
  cfg.event_weibull = {2.0, 1.8};
  cfg.censor_weibull = {0.5, 2.0};
  cfg.superpop_size = 100000;
  return cfg;
}

void validate_dgp(const DGPConfig& cfg) {
  check_weibull(cfg.event_weibull, "event");
  check_weibull(cfg.censor_weibull, "censoring");
  if (cfg.superpop_size < 2)
    throw SurvError(ErrorCode::InvalidArgument, "superpopulation size must be at least 2");
  if (cfg.beta_outcome.size() != 5)
    throw SurvError(ErrorCode::InvalidArgument, "beta_outcome must have 5 entries (X1, X2, X4, X5, Z)");
  if (cfg.beta_treatment.size() != 4)
    throw SurvError(ErrorCode::InvalidArgument, "beta_treatment must have 4 entries (X2, X3, X5, X6)");
  if (!cfg.beta_outcome.allFinite() || !cfg.beta_treatment.allFinite() ||
      !std::isfinite(cfg.treatment_intercept))
    throw SurvError(ErrorCode::InvalidArgument, "DGP coefficients must be finite");
  for (const CovariateSpec& spec : cfg.covariate_specs) {
    if (spec.kind == CovariateSpec::Kind::Bernoulli) {
      if (!(spec.a >= 0.0 && spec.a <= 1.0))
        throw SurvError(ErrorCode::InvalidArgument, "Bernoulli probability must lie in [0,1]");
    } else if (!(spec.b >= 0.0) || !std::isfinite(spec.a) || !std::isfinite(spec.b)) {
      throw SurvError(ErrorCode::InvalidArgument, "Normal covariate needs finite mean and sd >= 0");
    }
  }
}

double weibull_time(double u, const WeibullParams& wb, double lp) {
  return std::pow(-std::log(u) / (wb.lambda * std::exp(lp)), 1.0 / wb.gamma);
}

SuperPopulation generate_superpopulation(const DGPConfig& cfg, uint64_t seed) {
  validate_dgp(cfg);
  const Eigen::Index n = cfg.superpop_size;
  SuperPopulation sp;
  sp.covariates.resize(n, 6);
  sp.time_z0.resize(n);
  sp.time_z1.resize(n);
  sp.treatment_probs.resize(n);

  const Eigen::VectorXd& bo = cfg.beta_outcome;
  const Eigen::VectorXd& bt = cfg.beta_treatment;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 6; ++j) {
      const CovariateSpec& spec = cfg.covariate_specs[static_cast<size_t>(j)];
      sp.covariates(i, j) = spec.kind == CovariateSpec::Kind::Bernoulli
                                ? static_cast<double>(rng.bernoulli(spec.a))
                                : spec.a + spec.b * rng.normal();
    }
    const double lp_outcome = bo[0] * sp.covariates(i, 0) + bo[1] * sp.covariates(i, 1) +
                              bo[2] * sp.covariates(i, 3) + bo[3] * sp.covariates(i, 4);
    const double u = rng.uniform();  // one draw couples the two potential times
    sp.time_z0[i] = weibull_time(u, cfg.event_weibull, lp_outcome);
    sp.time_z1[i] = weibull_time(u, cfg.event_weibull, lp_outcome + bo[4]);
    sp.treatment_probs[i] = sigmoid(cfg.treatment_intercept + bt[0] * sp.covariates(i, 1) +
                                    bt[1] * sp.covariates(i, 2) + bt[2] * sp.covariates(i, 4) +
                                    bt[3] * sp.covariates(i, 5));
  }

  const double treated_fraction = sp.treatment_probs.mean();
  if (!(treated_fraction > 0.05 && treated_fraction < 0.95))
    throw SurvError(ErrorCode::DegenerateTreatedFraction,
                    "treated fraction " + std::to_string(treated_fraction) + " outside (0.05, 0.95)");

  sp.true_curve_z0 = proportion_curve(sp.time_z0);
  sp.true_curve_z1 = proportion_curve(sp.time_z1);
  return sp;
}

SurvivalDataset draw_replication(const SuperPopulation& sp, const DGPConfig& cfg, Eigen::Index n,
                                 uint64_t seed) {
  const Eigen::Index total = sp.covariates.rows();
  if (n < 1) throw SurvError(ErrorCode::InvalidArgument, "sample size must be positive");
  if (n > total)
    throw SurvError(ErrorCode::SampleTooLarge, "sample size exceeds the super-population size");

  Rng rng(seed);
  // Selection sampling: scan once, keep index i with probability remaining/left.
  std::vector<Eigen::Index> chosen;
  chosen.reserve(static_cast<size_t>(n));
  Eigen::Index remaining = n;
  for (Eigen::Index i = 0; i < total && remaining > 0; ++i) {
    if (rng.uniform() * static_cast<double>(total - i) < static_cast<double>(remaining)) {
      chosen.push_back(i);
      --remaining;
    }
  }

  SurvivalDataset data;
  data.time.resize(n);
  data.status.resize(n);
  data.group.resize(n);
  data.covariates.resize(n, 6);
  data.covariate_names = {"X1", "X2", "X3", "X4", "X5", "X6"};
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = chosen[static_cast<size_t>(r)];
    const int z = rng.bernoulli(sp.treatment_probs[i]);
    const double event_time = z == 1 ? sp.time_z1[i] : sp.time_z0[i];
    const double censor_time = weibull_time(rng.uniform(), cfg.censor_weibull, 0.0);
    data.covariates.row(r) = sp.covariates.row(i);
    data.group[r] = z;
    data.time[r] = std::min(event_time, censor_time);
    data.status[r] = event_time <= censor_time ? 1 : 0;
  }
  return data;
}

double compute_tau(const StepCurve& true_curve, const SurvivalDataset& sample, int z) {
  double last_event = -1.0;
  for (Eigen::Index i = 0; i < sample.n(); ++i)
    if (sample.group[i] == z && sample.status[i] == 1) last_event = std::max(last_event, sample.time[i]);
  if (last_event < 0.0)
    throw SurvError(ErrorCode::NoEventsInGroup,
                    "compute_tau: no events in group " + std::to_string(z));
  const double* begin = true_curve.values.data();
  const double* end = begin + true_curve.values.size();
  const double* it = std::partition_point(begin, end, [](double v) { return v > kHorizonLevel; });
  if (it == end) return last_event;  // truth never reaches 5%
  return std::min(last_event, true_curve.times[it - begin]);
}

double truth_horizon(const StepCurve& true_curve) {
  const double* begin = true_curve.values.data();
  const double* end = begin + true_curve.values.size();
  const double* it = std::partition_point(begin, end, [](double v) { return v > kHorizonLevel; });
  if (it == end) {
    if (true_curve.times.size() == 0)
      throw SurvError(ErrorCode::InvalidArgument, "truth_horizon: constant curve has no horizon");
    return true_curve.times[true_curve.times.size() - 1];
  }
  return true_curve.times[it - begin];
}

double delta_bias(const StepCurve& true_curve, const StepCurve& est, double tau) {
  const std::array<StepCurve, 2> curves = {true_curve, est};
  const StepCurve diff =
      pointwise_combine(curves, [](const Eigen::VectorXd& v) { return v[0] - v[1]; });
  return integrate_curve(diff, 0.0, tau);
}

double delta_mse(const StepCurve& true_curve, const StepCurve& est, double tau) {
  const std::array<StepCurve, 2> curves = {true_curve, est};
  const StepCurve sq = pointwise_combine(
      curves, [](const Eigen::VectorXd& v) { return (v[0] - v[1]) * (v[0] - v[1]); });
  return integrate_curve(sq, 0.0, tau);
}

TruthIntegrals make_truth_integrals(const StepCurve& curve) {
  const Eigen::Index k = curve.times.size();
  TruthIntegrals truth;
  truth.bounds.resize(k + 1);
  truth.seg.resize(k + 1);
  truth.int_s.resize(k + 1);
  truth.int_s2.resize(k + 1);
  truth.bounds[0] = 0.0;
  truth.seg[0] = curve.initial_value;
  truth.int_s[0] = 0.0;
  truth.int_s2[0] = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    truth.bounds[j + 1] = curve.times[j];
    truth.seg[j + 1] = curve.values[j];
    const double width = truth.bounds[j + 1] - truth.bounds[j];
    truth.int_s[j + 1] = truth.int_s[j] + truth.seg[j] * width;
    truth.int_s2[j + 1] = truth.int_s2[j] + truth.seg[j] * truth.seg[j] * width;
  }
  return truth;
}

double delta_bias(const TruthIntegrals& truth, const StepCurve& est, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw SurvError(ErrorCode::InvalidInterval, "delta_bias: tau must be finite and non-negative");
  double total = 0.0;
  for_each_segment(est, tau, [&](double a, double b, double v) {
    total += integrals_at(truth, b).s - integrals_at(truth, a).s - v * (b - a);
  });
  return total;
}

double delta_mse(const TruthIntegrals& truth, const StepCurve& est, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw SurvError(ErrorCode::InvalidInterval, "delta_mse: tau must be finite and non-negative");
  double total = 0.0;
  for_each_segment(est, tau, [&](double a, double b, double v) {
    const PartialIntegrals ia = integrals_at(truth, a);
    const PartialIntegrals ib = integrals_at(truth, b);
    total += (ib.s2 - ia.s2) - 2.0 * v * (ib.s - ia.s) + v * v * (b - a);
  });
  return total;
}

StudyResult run_study(const StudyConfig& cfg) {
  validate_dgp(cfg.dgp);
  if (cfg.reps < 2) throw SurvError(ErrorCode::InvalidArgument, "run_study needs at least 2 replications");
  if (cfg.scenarios.empty() || cfg.methods.empty() || cfg.sample_sizes.empty())
    throw SurvError(ErrorCode::InvalidArgument, "run_study needs scenarios, methods, and sample sizes");
  for (Eigen::Index n : cfg.sample_sizes) {
    if (n < 1) throw SurvError(ErrorCode::InvalidArgument, "sample sizes must be positive");
    if (n > cfg.dgp.superpop_size)
      throw SurvError(ErrorCode::SampleTooLarge, "sample size exceeds the super-population size");
  }
  if (cfg.oob_profile_points < 1)
    throw SurvError(ErrorCode::InvalidArgument, "oob_profile_points must be positive");

  StudyResult result;
  result.superpop = generate_superpopulation(cfg.dgp, derive_seed(cfg.master_seed, {0}));
  const std::array<const StepCurve*, 2> truths = {&result.superpop.true_curve_z0,
                                                  &result.superpop.true_curve_z1};
  const std::array<TruthIntegrals, 2> integrals = {make_truth_integrals(*truths[0]),
                                                   make_truth_integrals(*truths[1])};
  const int points = cfg.oob_profile_points;
  std::array<Eigen::VectorXd, 2> profile_times;
  for (int z = 0; z < 2; ++z) {
    const double horizon = truth_horizon(*truths[z]);
    profile_times[z].resize(points);
    for (int p = 0; p < points; ++p)
      profile_times[z][p] = horizon * (static_cast<double>(p) + 0.5) / static_cast<double>(points);
  }

  const auto n_sizes = static_cast<Eigen::Index>(cfg.sample_sizes.size());
  const auto n_scen = static_cast<Eigen::Index>(cfg.scenarios.size());
  const auto n_meth = static_cast<Eigen::Index>(cfg.methods.size());
  const Eigen::Index reps = cfg.reps;
  const Eigen::Index cells = n_sizes * n_scen * n_meth * 2;
  result.records.resize(static_cast<size_t>(cells * reps));

  std::vector<ScenarioSpec> specs;
  specs.reserve(static_cast<size_t>(n_scen));
  for (ScenarioId s : cfg.scenarios) specs.push_back(scenario_spec(s));

  const int n_threads = std::max(1, cfg.threads);
  const Eigen::Index units = n_sizes * n_scen * reps;
  std::atomic<Eigen::Index> next_unit{0};
  std::vector<std::vector<long>> oob_counts(static_cast<size_t>(n_threads));
  std::vector<std::vector<long>> trials(static_cast<size_t>(n_threads));
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&](int tid) {
    std::vector<long>& counts = oob_counts[static_cast<size_t>(tid)];
    std::vector<long>& cell_trials = trials[static_cast<size_t>(tid)];
    counts.assign(static_cast<size_t>(cells * points), 0);
    cell_trials.assign(static_cast<size_t>(cells), 0);
    try {
      for (;;) {
        const Eigen::Index unit = next_unit.fetch_add(1);
        if (unit >= units) break;
        const Eigen::Index size_idx = unit / (n_scen * reps);
        const Eigen::Index s = (unit / reps) % n_scen;
        const auto rep = static_cast<int>(unit % reps);
        const Eigen::Index n = cfg.sample_sizes[static_cast<size_t>(size_idx)];
        const uint64_t seed = derive_seed(
            cfg.master_seed, {1, static_cast<uint64_t>(cfg.scenarios[static_cast<size_t>(s)]),
                              static_cast<uint64_t>(n), static_cast<uint64_t>(rep)});

        SurvivalDataset data;
        std::array<double, 2> tau{kNaN, kNaN};
        bool rep_ok = true;
        try {
          data = draw_replication(result.superpop, cfg.dgp, n, seed);
          tau[0] = compute_tau(*truths[0], data, 0);
          tau[1] = compute_tau(*truths[1], data, 1);
        } catch (const SurvError&) {
          rep_ok = false;
        }

        EstimationCache cache;
        EstimateOptions opts;
        opts.outcome_covs = specs[static_cast<size_t>(s)].outcome_covs;
        opts.treatment_covs = specs[static_cast<size_t>(s)].treatment_covs;
        opts.caliper_sd_fraction = cfg.caliper_sd_fraction;
        opts.pv_link = cfg.pv_link;
        for (Eigen::Index m = 0; m < n_meth; ++m) {
          AdjustedCurves fit;
          bool ok = rep_ok;
          if (ok) {
            try {
              fit = estimate(cfg.methods[static_cast<size_t>(m)], data, opts, cache);
            } catch (const SurvError&) {
              ok = false;
            }
          }
          for (int z = 0; z < 2; ++z) {
            MetricRecord rec;
            rec.method = cfg.methods[static_cast<size_t>(m)];
            rec.scenario = cfg.scenarios[static_cast<size_t>(s)];
            rec.n = n;
            rec.rep = rep;
            rec.group = z;
            rec.tau = tau[static_cast<size_t>(z)];
            if (!ok) {
              rec.failed = true;
              rec.delta_bias = rec.delta_mse = rec.raw_delta_bias = rec.raw_delta_mse = kNaN;
            } else {
              const StepCurve& curve = z == 0 ? fit.curve_z0 : fit.curve_z1;
              const TruthIntegrals& truth = integrals[static_cast<size_t>(z)];
              rec.raw_delta_bias = delta_bias(truth, curve, rec.tau);
              rec.raw_delta_mse = delta_mse(truth, curve, rec.tau);
              if (cfg.apply_corrections) {
                const StepCurve corrected = corrected_on_window(curve, rec.tau);
                rec.delta_bias = delta_bias(truth, corrected, rec.tau);
                rec.delta_mse = delta_mse(truth, corrected, rec.tau);
              } else {
                rec.delta_bias = rec.raw_delta_bias;
                rec.delta_mse = rec.raw_delta_mse;
              }
              rec.nm = nm_within(curve, rec.tau);
              rec.oob = oob_within(curve, rec.tau);
              const Eigen::Index cell = ((size_idx * n_scen + s) * n_meth + m) * 2 + z;
              ++cell_trials[static_cast<size_t>(cell)];
              for (int p = 0; p < points; ++p) {
                const double v = eval_curve(curve, profile_times[static_cast<size_t>(z)][p]);
                if (v < -kOobTol || v > 1.0 + kOobTol)
                  ++counts[static_cast<size_t>(cell * points + p)];
              }
            }
            const Eigen::Index slot =
                (((size_idx * reps + rep) * n_scen + s) * n_meth + m) * 2 + z;
            result.records[static_cast<size_t>(slot)] = rec;
          }
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Integer count merging is order-insensitive, so totals are thread-count invariant.
  std::vector<long> total_counts(static_cast<size_t>(cells * points), 0);
  std::vector<long> total_trials(static_cast<size_t>(cells), 0);
  for (int t = 0; t < n_threads; ++t) {
    for (size_t i = 0; i < total_counts.size(); ++i) total_counts[i] += oob_counts[static_cast<size_t>(t)][i];
    for (size_t i = 0; i < total_trials.size(); ++i) total_trials[i] += trials[static_cast<size_t>(t)][i];
  }

  std::sort(result.records.begin(), result.records.end(),
            [](const MetricRecord& a, const MetricRecord& b) {
              if (a.method != b.method) return a.method < b.method;
              if (a.scenario != b.scenario) return a.scenario < b.scenario;
              if (a.n != b.n) return a.n < b.n;
              if (a.rep != b.rep) return a.rep < b.rep;
              return a.group < b.group;
            });

  // Aggregate in output order: method-major, then scenario, size, group.
  std::vector<CellStats> stats(static_cast<size_t>(cells));
  for (const MetricRecord& rec : result.records) {
    if (rec.failed) continue;
    const auto size_idx = static_cast<Eigen::Index>(
        std::find(cfg.sample_sizes.begin(), cfg.sample_sizes.end(), rec.n) - cfg.sample_sizes.begin());
    const auto s = static_cast<Eigen::Index>(
        std::find(cfg.scenarios.begin(), cfg.scenarios.end(), rec.scenario) - cfg.scenarios.begin());
    const auto m = static_cast<Eigen::Index>(
        std::find(cfg.methods.begin(), cfg.methods.end(), rec.method) - cfg.methods.begin());
    CellStats& cell = stats[static_cast<size_t>(((size_idx * n_scen + s) * n_meth + m) * 2 + rec.group)];
    cell.bias.push_back(rec.delta_bias);
    cell.mse.push_back(rec.delta_mse);
    cell.nm += rec.nm ? 1 : 0;
    cell.oob += rec.oob ? 1 : 0;
  }

  const auto mean_sd = [](const std::vector<double>& xs) {
    const auto c = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= c;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / (c - 1.0)) : kNaN;
    return std::pair<double, double>(mean, sd / std::sqrt(c));
  };

  for (Eigen::Index m = 0; m < n_meth; ++m)
    for (Eigen::Index s = 0; s < n_scen; ++s)
      for (Eigen::Index size_idx = 0; size_idx < n_sizes; ++size_idx)
        for (int z = 0; z < 2; ++z) {
          const Eigen::Index cell = ((size_idx * n_scen + s) * n_meth + m) * 2 + z;
          const CellStats& cs = stats[static_cast<size_t>(cell)];
          AggregateRow row;
          row.method = cfg.methods[static_cast<size_t>(m)];
          row.scenario = cfg.scenarios[static_cast<size_t>(s)];
          row.n = cfg.sample_sizes[static_cast<size_t>(size_idx)];
          row.group = z;
          if (cs.bias.empty()) {
            row.g_bias = row.g_bias_mcse = row.g_mse = row.g_mse_mcse = kNaN;
            row.nm_pct = row.oob_pct = kNaN;
          } else {
            std::tie(row.g_bias, row.g_bias_mcse) = mean_sd(cs.bias);
            std::tie(row.g_mse, row.g_mse_mcse) = mean_sd(cs.mse);
            const auto c = static_cast<double>(cs.bias.size());
            row.nm_pct = 100.0 * static_cast<double>(cs.nm) / c;
            row.oob_pct = 100.0 * static_cast<double>(cs.oob) / c;
          }
          result.aggregates.push_back(row);

          OobProfile profile;
          profile.method = row.method;
          profile.scenario = row.scenario;
          profile.n = row.n;
          profile.group = z;
          profile.times = profile_times[static_cast<size_t>(z)];
          profile.fraction.resize(points);
          const long t_count = total_trials[static_cast<size_t>(cell)];
          for (int p = 0; p < points; ++p)
            profile.fraction[p] =
                t_count > 0
                    ? static_cast<double>(total_counts[static_cast<size_t>(cell * points + p)]) /
                          static_cast<double>(t_count)
                    : kNaN;
          result.oob_profiles.push_back(profile);
        }

  return result;
}

}  // namespace survadj
