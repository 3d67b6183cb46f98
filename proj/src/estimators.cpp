#include "survadj/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace survadj {

namespace {

constexpr double kFlagTol = 1e-10;

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (const std::string& s : labels) {
    out += s;
    out += ',';
  }
  return out;
}

Eigen::MatrixXd covariate_block(const SurvivalDataset& data, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd block(data.n(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) block.col(static_cast<Eigen::Index>(j)) = data.covariates.col(idx[j]);
  return block;
}

// Group-z survival curve by standardizing Cox predictions over all subjects.
StepCurve g_formula_curve(const SurvivalDataset& data, const CoxFit& fit, int z) {
  const Eigen::VectorXd elp = cox_linear_predictor(fit, data, z).array().exp();
  const StepCurve& base = fit.baseline_cumhaz;
  StepCurve curve;
  curve.times = base.times;
  curve.values.resize(base.times.size());
  curve.initial_value = 1.0;
  const double inv_n = 1.0 / static_cast<double>(data.n());
  for (Eigen::Index j = 0; j < base.times.size(); ++j)
    curve.values[j] = (-base.values[j] * elp.array()).exp().sum() * inv_n;
  return curve;
}

StepCurve curve_from_grid(const Eigen::VectorXd& grid, Eigen::VectorXd values) {
  StepCurve curve;
  curve.times = grid;
  curve.values = std::move(values);
  curve.initial_value = 1.0;
  return curve;
}

GroupCurves iptw_km_curves(const SurvivalDataset& data, const Eigen::VectorXd& weights) {
  return {kaplan_meier(data, 0, &weights), kaplan_meier(data, 1, &weights)};
}

GroupCurves iptw_hz_curves(const SurvivalDataset& data, const Eigen::VectorXd& weights) {
  return {nelson_aalen_survival(data, 0, &weights), nelson_aalen_survival(data, 1, &weights)};
}

GroupCurves iptw_pv_curves(const SurvivalDataset& data, const PropensityFit& prop,
                           const PseudoValueMatrix& pv) {
  const Eigen::VectorXd w = iptw_weights(prop, data);
  GroupCurves out;
  for (int z : {0, 1}) {
    Eigen::VectorXd values = Eigen::VectorXd::Zero(pv.grid.size());
    double wsum = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (data.group[i] != z) continue;
      values += w[i] * pv.values.row(i).transpose();
      wsum += w[i];
    }
    values /= wsum;
    (z == 0 ? out.z0 : out.z1) = curve_from_grid(pv.grid, std::move(values));
  }
  return out;
}

GroupCurves matching_curves(const SurvivalDataset& data, const PropensityFit& prop,
                            std::optional<double> caliper, const std::vector<Eigen::Index>& tie_rank) {
  const std::vector<Eigen::Index> matched =
      detail::match_pairs(prop.fitted, data.group, caliper, tie_rank);
  if (matched.empty())
    throw SurvError(ErrorCode::NoMatches, "est_matching: no pairs within the caliper");
  const SurvivalDataset sample = select_rows(data, matched);
  return {kaplan_meier(sample, 0), kaplan_meier(sample, 1)};
}

}  // namespace

namespace detail {

std::vector<Eigen::Index> match_pairs(const Eigen::VectorXd& fitted, const Eigen::VectorXi& group,
                                      std::optional<double> caliper,
                                      const std::vector<Eigen::Index>& tie_rank) {
  const auto rank = [&](Eigen::Index i) { return tie_rank.empty() ? i : tie_rank[i]; };
  std::vector<Eigen::Index> treated, controls;
  for (Eigen::Index i = 0; i < group.size(); ++i) (group[i] == 1 ? treated : controls).push_back(i);
  // Treated processed in descending propensity; ties in input row order.
  std::sort(treated.begin(), treated.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (fitted[a] != fitted[b]) return fitted[a] > fitted[b];
    return rank(a) < rank(b);
  });

  std::vector<bool> used(controls.size(), false);
  std::vector<Eigen::Index> matched;
  for (Eigen::Index t : treated) {
    double best = std::numeric_limits<double>::infinity();
    size_t best_c = controls.size();
    for (size_t c = 0; c < controls.size(); ++c) {
      if (used[c]) continue;
      const double dist = std::abs(fitted[t] - fitted[controls[c]]);
      if (dist < best ||
          (dist == best && best_c != controls.size() && rank(controls[c]) < rank(controls[best_c]))) {
        best = dist;
        best_c = c;
      }
    }
    if (best_c == controls.size()) break;  // controls exhausted
    if (caliper && best > *caliper) continue;  // nearest too far: treated stays unmatched
    used[best_c] = true;
    matched.push_back(t);
    matched.push_back(controls[best_c]);
  }
  std::sort(matched.begin(), matched.end());
  return matched;
}

// Weights for one group: p_i = 1/(n_z (1 + eta'c_i)) where eta solves
// sum c_i/(1 + eta'c_i) = 0, found by Newton with backtracking on the
// convex dual -sum log(1 + eta'c_i).
Eigen::VectorXd el_group_weights(const Eigen::MatrixXd& centered) {
  const Eigen::Index nz = centered.rows();
  const Eigen::Index q = centered.cols();

  // Coordinates where the target is outside (or on the boundary of) the
  // group's range are infeasible; all-zero coordinates are trivially met.
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < q; ++j) {
    const double lo = centered.col(j).minCoeff();
    const double hi = centered.col(j).maxCoeff();
    if (lo == 0.0 && hi == 0.0) continue;
    if (lo >= 0.0 || hi <= 0.0)
      throw SurvError(ErrorCode::HullViolation,
                      "est_el: target mean outside the group's convex hull");
    active.push_back(j);
  }
  Eigen::MatrixXd c(nz, static_cast<Eigen::Index>(active.size()));
  for (size_t j = 0; j < active.size(); ++j) c.col(static_cast<Eigen::Index>(j)) = centered.col(active[j]);

  const Eigen::Index qa = c.cols();
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(qa);
  Eigen::VectorXd denom = Eigen::VectorXd::Ones(nz);
  if (qa > 0) {
    const auto dual = [&](const Eigen::VectorXd& e, Eigen::VectorXd& den) {
      den.noalias() = Eigen::VectorXd::Ones(nz) + c * e;
      if ((den.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
      return -den.array().log().sum();
    };
    double value = dual(eta, denom);
    for (int iter = 0;; ++iter) {
      const Eigen::VectorXd inv = denom.cwiseInverse();
      const Eigen::VectorXd residual = c.transpose() * inv;  // = n_z * sum p_i c_i
      if (residual.cwiseAbs().maxCoeff() < 1e-10 * static_cast<double>(nz)) break;
      if (iter >= 200)
        throw SurvError(ErrorCode::NoConvergence, "est_el: dual Newton did not converge");
      const Eigen::MatrixXd hess = c.transpose() * inv.array().square().matrix().asDiagonal() * c;
      Eigen::VectorXd step = hess.ldlt().solve(residual);  // descent: gradient of dual = -residual
      double new_value = std::numeric_limits<double>::infinity();
      Eigen::VectorXd candidate, new_denom(nz);
      int halvings = 0;
      for (; halvings <= 60; ++halvings) {
        candidate = eta + step;
        new_value = dual(candidate, new_denom);
        if (new_value <= value + 1e-12) break;
        step *= 0.5;
      }
      if (halvings > 60)
        throw SurvError(ErrorCode::NoConvergence, "est_el: backtracking stalled");
      eta = candidate;
      denom = new_denom;
      value = new_value;
      if (eta.cwiseAbs().maxCoeff() > 1e8)
        throw SurvError(ErrorCode::HullViolation, "est_el: dual unbounded, constraints infeasible");
    }
  }
  return (denom.array() * static_cast<double>(nz)).inverse();
}

}  // namespace detail

namespace {

GroupCurves el_curves(const SurvivalDataset& data, const std::vector<std::string>& balance_covs) {
  const std::vector<std::string>& labels = balance_covs.empty() ? data.covariate_names : balance_covs;
  const std::vector<Eigen::Index> idx = covariate_indices(data, labels);
  const Eigen::MatrixXd x = covariate_block(data, idx);
  const Eigen::RowVectorXd target = x.colwise().mean();

  GroupCurves out;
  for (int z : {0, 1}) {
    const std::vector<Eigen::Index> rows = group_rows(data, z);
    if (rows.empty()) throw SurvError(ErrorCode::EmptyGroup, "est_el: empty group");
    Eigen::MatrixXd centered(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (size_t r = 0; r < rows.size(); ++r) centered.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]) - target;
    const Eigen::VectorXd p = detail::el_group_weights(centered);
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(data.n());
    for (size_t r = 0; r < rows.size(); ++r) weights[rows[r]] = p[static_cast<Eigen::Index>(r)];
    (z == 0 ? out.z0 : out.z1) = kaplan_meier(data, z, &weights);
  }
  return out;
}

Eigen::MatrixXd cox_survival_matrix(const SurvivalDataset& data, const CoxFit& fit, int z,
                                    const Eigen::VectorXd& grid) {
  const Eigen::ArrayXd elp = cox_linear_predictor(fit, data, z).array().exp();
  Eigen::MatrixXd surv(data.n(), grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j)
    surv.col(j) = (-eval_curve(fit.baseline_cumhaz, grid[j]) * elp).exp();
  return surv;
}

Eigen::MatrixXd pv_prediction_matrix(const SurvivalDataset& data, const PVRegressionFit& fit, int z) {
  const Eigen::Index n = data.n();
  const Eigen::Index q = static_cast<Eigen::Index>(fit.covariate_indices.size());
  Eigen::MatrixXd design(n, 2 + q);
  design.col(0).setOnes();
  design.col(1).setConstant(static_cast<double>(z));
  for (Eigen::Index j = 0; j < q; ++j) design.col(2 + j) = data.covariates.col(fit.covariate_indices[j]);
  Eigen::MatrixXd eta = design * fit.coefficients;
  if (fit.link == PvLink::Cloglog) eta = (-eta.array().exp()).exp();
  return eta;
}

GroupCurves g_formula_pv_curves(const SurvivalDataset& data, const PVRegressionFit& fit) {
  GroupCurves out;
  const double inv_n = 1.0 / static_cast<double>(data.n());
  for (int z : {0, 1}) {
    const Eigen::MatrixXd pred = pv_prediction_matrix(data, fit, z);
    (z == 0 ? out.z0 : out.z1) = curve_from_grid(fit.grid, pred.colwise().sum() * inv_n);
  }
  return out;
}

GroupCurves aiptw_curves(const SurvivalDataset& data, const CoxFit& cox, const PropensityFit& prop,
                         const StepCurve& censor, const Eigen::VectorXd& grid) {
  GroupCurves out;
  for (int z : {0, 1}) {
    const Eigen::MatrixXd surv = cox_survival_matrix(data, cox, z, grid);
    const Eigen::VectorXd pi_z =
        z == 1 ? prop.fitted : Eigen::VectorXd(Eigen::VectorXd::Ones(data.n()) - prop.fitted);
    (z == 0 ? out.z0 : out.z1) = detail::aiptw_curve(data, z, grid, surv, pi_z, censor);
  }
  return out;
}

GroupCurves aiptw_pv_curves(const SurvivalDataset& data, const PVRegressionFit& fit,
                            const PropensityFit& prop, const PseudoValueMatrix& pv) {
  GroupCurves out;
  for (int z : {0, 1}) {
    const Eigen::MatrixXd m_hat = pv_prediction_matrix(data, fit, z);
    const Eigen::VectorXd pi_z =
        z == 1 ? prop.fitted : Eigen::VectorXd(Eigen::VectorXd::Ones(data.n()) - prop.fitted);
    (z == 0 ? out.z0 : out.z1) = detail::aiptw_pv_curve(data, z, pv.grid, m_hat, pi_z, pv.values);
  }
  return out;
}

void fill_flags(const StepCurve& curve, bool& nm, bool& oob) {
  nm = false;
  oob = false;
  double prev = curve.initial_value;
  for (Eigen::Index j = 0; j < curve.values.size(); ++j) {
    const double v = curve.values[j];
    if (v > prev + kFlagTol) nm = true;
    if (v < -kFlagTol || v > 1.0 + kFlagTol) oob = true;
    prev = v;
  }
  if (curve.initial_value < -kFlagTol || curve.initial_value > 1.0 + kFlagTol) oob = true;
}

}  // namespace

const char* method_name(MethodId method) {
  switch (method) {
    case MethodId::KM: return "km";
    case MethodId::G_FORMULA: return "g_formula";
    case MethodId::G_FORMULA_PV: return "g_formula_pv";
    case MethodId::IPTW_KM: return "iptw_km";
    case MethodId::IPTW_HZ: return "iptw_hz";
    case MethodId::IPTW_PV: return "iptw_pv";
    case MethodId::MATCHING: return "matching";
    case MethodId::EL: return "el";
    case MethodId::AIPTW: return "aiptw";
    case MethodId::AIPTW_PV: return "aiptw_pv";
    case MethodId::G_FORMULA_IPTW: return "g_formula_iptw";
  }
  return "unknown";
}

std::optional<MethodId> parse_method(std::string_view token) {
  for (MethodId m : kAllMethods)
    if (token == method_name(m)) return m;
  return std::nullopt;
}

Eigen::VectorXd iptw_weights(const PropensityFit& fit, const SurvivalDataset& data) {
  Eigen::VectorXd w(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    w[i] = data.group[i] == 1 ? 1.0 / fit.fitted[i] : 1.0 / (1.0 - fit.fitted[i]);
  return w;
}

void EstimationCache::bind(const SurvivalDataset& data) {
  if (owner_ == &data) return;
  owner_ = &data;
  input_order_ = canonical_order(data);
  canonical_ = select_rows(data, input_order_);
  grid_.reset();
  propensity_.reset();
  cox_.reset();
  pv_.reset();
  pv_regression_.reset();
  censor_.reset();
}

const Eigen::VectorXd& EstimationCache::default_grid() {
  if (!grid_) grid_ = pooled_event_times(canonical_);
  return *grid_;
}

const PropensityFit& EstimationCache::propensity(const std::vector<std::string>& covs) {
  const std::string key = join_labels(covs);
  if (!propensity_ || propensity_->first != key) propensity_ = {key, fit_logistic(canonical_, covs)};
  return propensity_->second;
}

const CoxFit& EstimationCache::cox_with_treatment(const std::vector<std::string>& covs) {
  const std::string key = join_labels(covs);
  if (!cox_ || cox_->first != key) cox_ = {key, fit_cox(canonical_, covs, true)};
  return cox_->second;
}

const PseudoValueMatrix& EstimationCache::pseudo(const Eigen::VectorXd& grid) {
  if (!pv_ || pv_->grid.size() != grid.size() || pv_->grid != grid) pv_ = pseudo_values(canonical_, grid);
  return *pv_;
}

const PVRegressionFit& EstimationCache::pv_regression(const Eigen::VectorXd& grid,
                                                      const std::vector<std::string>& covs, PvLink link) {
  const std::string key = join_labels(covs) + (link == PvLink::Identity ? "|id" : "|cloglog");
  if (!pv_regression_ || pv_regression_->first != key || pv_regression_->second.grid.size() != grid.size() ||
      pv_regression_->second.grid != grid)
    pv_regression_ = {key, fit_pv_regression(pseudo(grid), canonical_, covs, link)};
  return pv_regression_->second;
}

const StepCurve& EstimationCache::censoring() {
  if (!censor_) censor_ = censoring_kaplan_meier(canonical_);
  return *censor_;
}

GroupCurves est_g_formula(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                          const Eigen::VectorXd* weights) {
  const CoxFit fit = fit_cox(data, outcome_covs, true, weights);
  return {g_formula_curve(data, fit, 0), g_formula_curve(data, fit, 1)};
}

GroupCurves est_g_formula_pv(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                             const Eigen::VectorXd& grid, PvLink link) {
  const PseudoValueMatrix pv = pseudo_values(data, grid);
  return g_formula_pv_curves(data, fit_pv_regression(pv, data, outcome_covs, link));
}

GroupCurves est_iptw_km(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs) {
  return iptw_km_curves(data, iptw_weights(fit_logistic(data, treatment_covs), data));
}

GroupCurves est_iptw_hz(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs) {
  return iptw_hz_curves(data, iptw_weights(fit_logistic(data, treatment_covs), data));
}

GroupCurves est_iptw_pv(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs,
                        const Eigen::VectorXd& grid) {
  return iptw_pv_curves(data, fit_logistic(data, treatment_covs), pseudo_values(data, grid));
}

GroupCurves est_matching(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs,
                         std::optional<double> caliper) {
  // Rows arrive in the caller's order, which is already the tie order.
  return matching_curves(data, fit_logistic(data, treatment_covs), caliper, {});
}

GroupCurves est_el(const SurvivalDataset& data, const std::vector<std::string>& balance_covs) {
  return el_curves(data, balance_covs);
}

GroupCurves est_aiptw(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                      const std::vector<std::string>& treatment_covs, const Eigen::VectorXd& grid) {
  return aiptw_curves(data, fit_cox(data, outcome_covs, true), fit_logistic(data, treatment_covs),
                      censoring_kaplan_meier(data), grid);
}

GroupCurves est_aiptw_pv(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                         const std::vector<std::string>& treatment_covs, const Eigen::VectorXd& grid,
                         PvLink link) {
  const PseudoValueMatrix pv = pseudo_values(data, grid);
  return aiptw_pv_curves(data, fit_pv_regression(pv, data, outcome_covs, link),
                         fit_logistic(data, treatment_covs), pv);
}

GroupCurves est_g_formula_iptw(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                               const std::vector<std::string>& treatment_covs) {
  const Eigen::VectorXd w = iptw_weights(fit_logistic(data, treatment_covs), data);
  return est_g_formula(data, outcome_covs, &w);
}

namespace detail {

StepCurve aiptw_curve(const SurvivalDataset& data, int z, const Eigen::VectorXd& grid,
                      const Eigen::MatrixXd& cox_surv, const Eigen::VectorXd& pi_z,
                      const StepCurve& censor_km) {
  const Eigen::Index n = data.n();
  Eigen::VectorXd values(grid.size());
  Eigen::VectorXd in_group(n);
  for (Eigen::Index i = 0; i < n; ++i) in_group[i] = data.group[i] == z ? 1.0 : 0.0;
  const Eigen::ArrayXd correction = in_group.array() / pi_z.array();
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double g_left = eval_curve_left(censor_km, grid[j]);
    if (g_left <= 0.0)
      throw SurvError(ErrorCode::CensoringSupport,
                      "aiptw: censoring survival hit zero before the requested horizon");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = data.time[i] > grid[j] ? 1.0 / g_left : 0.0;
      acc += cox_surv(i, j) + correction[i] * (y - cox_surv(i, j));
    }
    values[j] = acc / static_cast<double>(n);
  }
  StepCurve curve;
  curve.times = grid;
  curve.values = std::move(values);
  curve.initial_value = 1.0;
  return curve;
}

StepCurve aiptw_pv_curve(const SurvivalDataset& data, int z, const Eigen::VectorXd& grid,
                         const Eigen::MatrixXd& m_hat, const Eigen::VectorXd& pi_z,
                         const Eigen::MatrixXd& pv) {
  const Eigen::Index n = data.n();
  Eigen::VectorXd values(grid.size());
  Eigen::ArrayXd correction(n);
  for (Eigen::Index i = 0; i < n; ++i)
    correction[i] = (data.group[i] == z ? 1.0 : 0.0) / pi_z[i];
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const Eigen::ArrayXd m = m_hat.col(j).array();
    values[j] = (m + correction * (pv.col(j).array() - m)).sum() / static_cast<double>(n);
  }
  StepCurve curve;
  curve.times = grid;
  curve.values = std::move(values);
  curve.initial_value = 1.0;
  return curve;
}

}  // namespace detail

AdjustedCurves estimate(MethodId method, const SurvivalDataset& data, const EstimateOptions& opts,
                        EstimationCache& cache) {
  cache.bind(data);
  const SurvivalDataset& cdata = cache.canonical();
  // Uniform label validation regardless of which sets the method consumes.
  covariate_indices(cdata, opts.outcome_covs);
  covariate_indices(cdata, opts.treatment_covs);
  const Eigen::VectorXd& grid = opts.grid ? *opts.grid : cache.default_grid();

  GroupCurves curves;
  switch (method) {
    case MethodId::KM:
      curves = {kaplan_meier(cdata, 0), kaplan_meier(cdata, 1)};
      break;
    case MethodId::G_FORMULA: {
      const CoxFit& fit = cache.cox_with_treatment(opts.outcome_covs);
      curves = {g_formula_curve(cdata, fit, 0), g_formula_curve(cdata, fit, 1)};
      break;
    }
    case MethodId::G_FORMULA_PV:
      curves = g_formula_pv_curves(cdata, cache.pv_regression(grid, opts.outcome_covs, opts.pv_link));
      break;
    case MethodId::IPTW_KM:
      curves = iptw_km_curves(cdata, iptw_weights(cache.propensity(opts.treatment_covs), cdata));
      break;
    case MethodId::IPTW_HZ:
      curves = iptw_hz_curves(cdata, iptw_weights(cache.propensity(opts.treatment_covs), cdata));
      break;
    case MethodId::IPTW_PV:
      curves = iptw_pv_curves(cdata, cache.propensity(opts.treatment_covs), cache.pseudo(grid));
      break;
    case MethodId::MATCHING: {
      const PropensityFit& prop = cache.propensity(opts.treatment_covs);
      std::optional<double> caliper;
      if (opts.caliper_sd_fraction) {
        const Eigen::VectorXd& pi = prop.fitted;
        const double sd = std::sqrt((pi.array() - pi.mean()).square().sum() /
                                    std::max<double>(1.0, static_cast<double>(pi.size() - 1)));
        caliper = *opts.caliper_sd_fraction * sd;
      }
      curves = matching_curves(cdata, prop, caliper, cache.input_order());
      break;
    }
    case MethodId::EL:
      curves = el_curves(cdata, opts.treatment_covs);
      break;
    case MethodId::AIPTW:
      curves = aiptw_curves(cdata, cache.cox_with_treatment(opts.outcome_covs),
                            cache.propensity(opts.treatment_covs), cache.censoring(), grid);
      break;
    case MethodId::AIPTW_PV:
      curves = aiptw_pv_curves(cdata, cache.pv_regression(grid, opts.outcome_covs, opts.pv_link),
                               cache.propensity(opts.treatment_covs), cache.pseudo(grid));
      break;
    case MethodId::G_FORMULA_IPTW: {
      const Eigen::VectorXd w = iptw_weights(cache.propensity(opts.treatment_covs), cdata);
      curves = est_g_formula(cdata, opts.outcome_covs, &w);
      break;
    }
  }

  AdjustedCurves out;
  out.method = method;
  out.curve_z0 = std::move(curves.z0);
  out.curve_z1 = std::move(curves.z1);
  fill_flags(out.curve_z0, out.nm_z0, out.oob_z0);
  fill_flags(out.curve_z1, out.nm_z1, out.oob_z1);
  if (opts.apply_corrections) {
    out.curve_z0 = isotonic_correct(truncate_curve(out.curve_z0));
    out.curve_z1 = isotonic_correct(truncate_curve(out.curve_z1));
    out.corrected = true;
  }
  return out;
}

AdjustedCurves estimate(MethodId method, const SurvivalDataset& data, const EstimateOptions& opts) {
  EstimationCache cache;
  return estimate(method, data, opts, cache);
}

}  // namespace survadj
