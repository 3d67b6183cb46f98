#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "survadj/dataset.hpp"
#include "survadj/models.hpp"
#include "survadj/nonparam.hpp"
#include "survadj/step_curve.hpp"

namespace survadj {

enum class MethodId {
  KM,
  G_FORMULA,
  G_FORMULA_PV,
  IPTW_KM,
  IPTW_HZ,
  IPTW_PV,
  MATCHING,
  EL,
  AIPTW,
  AIPTW_PV,
  G_FORMULA_IPTW,
};

inline constexpr std::array<MethodId, 11> kAllMethods = {
    MethodId::KM,      MethodId::G_FORMULA, MethodId::G_FORMULA_PV, MethodId::IPTW_KM,
    MethodId::IPTW_HZ, MethodId::IPTW_PV,   MethodId::MATCHING,     MethodId::EL,
    MethodId::AIPTW,   MethodId::AIPTW_PV,  MethodId::G_FORMULA_IPTW};

// Lower-case token used in CSV output and CLI flags (e.g. "iptw_km").
const char* method_name(MethodId method);
std::optional<MethodId> parse_method(std::string_view token);

struct GroupCurves {
  StepCurve z0, z1;
};

struct AdjustedCurves {
  MethodId method = MethodId::KM;
  StepCurve curve_z0, curve_z1;
  // Diagnostics are always computed on the uncorrected curves: any step up by
  // more than 1e-10 (NM), any value outside [0,1] by more than 1e-10 (OOB).
  bool nm_z0 = false, nm_z1 = false;
  bool oob_z0 = false, oob_z1 = false;
  bool corrected = false;
};

struct EstimateOptions {
  std::vector<std::string> outcome_covs;
  std::vector<std::string> treatment_covs;
  // Evaluation grid for the pseudo-value and AIPTW families; defaults to the
  // pooled distinct event times.
  std::optional<Eigen::VectorXd> grid;
  bool apply_corrections = false;
  // Matching caliper as a fraction of sd(propensity); unset = no caliper.
  std::optional<double> caliper_sd_fraction;
  PvLink pv_link = PvLink::Identity;
};

// Model fits shared between estimators evaluated on one dataset (one
// propensity fit serves the whole IPTW family, one Cox fit serves G-Formula
// and AIPTW, ...).  bind() resets state when handed a different dataset; all
// estimators then work on one canonically ordered copy, which makes results
// invariant to the row order of the input — except matching at exact
// propensity ties, whose tie order is the input row order by contract.
class EstimationCache {
 public:
  void bind(const SurvivalDataset& data);

  const SurvivalDataset& canonical() const { return canonical_; }
  // input_order()[k] = row the k-th canonical row had in the bound dataset;
  // serves as the outcome-agnostic tie rank for matching.
  const std::vector<Eigen::Index>& input_order() const { return input_order_; }
  const Eigen::VectorXd& default_grid();
  const PropensityFit& propensity(const std::vector<std::string>& covs);
  const CoxFit& cox_with_treatment(const std::vector<std::string>& covs);
  const PseudoValueMatrix& pseudo(const Eigen::VectorXd& grid);
  const PVRegressionFit& pv_regression(const Eigen::VectorXd& grid, const std::vector<std::string>& covs,
                                       PvLink link);
  const StepCurve& censoring();

 private:
  const SurvivalDataset* owner_ = nullptr;
  SurvivalDataset canonical_;
  std::vector<Eigen::Index> input_order_;
  std::optional<Eigen::VectorXd> grid_;
  std::optional<std::pair<std::string, PropensityFit>> propensity_;
  std::optional<std::pair<std::string, CoxFit>> cox_;
  std::optional<PseudoValueMatrix> pv_;
  std::optional<std::pair<std::string, PVRegressionFit>> pv_regression_;
  std::optional<StepCurve> censor_;
};

// Uniform front end: dispatches to the estimator, fills the NM/OOB
// diagnostics, and optionally applies truncation followed by isotonic
// correction.  Unknown covariate labels throw MissingCovariateSet.
AdjustedCurves estimate(MethodId method, const SurvivalDataset& data, const EstimateOptions& opts);
AdjustedCurves estimate(MethodId method, const SurvivalDataset& data, const EstimateOptions& opts,
                        EstimationCache& cache);

// w_i = 1/pi_i for treated, 1/(1-pi_i) for controls.
Eigen::VectorXd iptw_weights(const PropensityFit& fit, const SurvivalDataset& data);

// Stratified Kaplan-Meier after standardizing Cox predictions: S_z(t) =
// mean_i exp(-Lambda0(t) exp(lp(z, x_i))), stepping at the baseline's jumps.
// weights, when given, enter the Cox fit only.
GroupCurves est_g_formula(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                          const Eigen::VectorXd* weights = nullptr);

// Standardized per-time pseudo-value regression predictions.
GroupCurves est_g_formula_pv(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                             const Eigen::VectorXd& grid, PvLink link = PvLink::Identity);

GroupCurves est_iptw_km(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs);

GroupCurves est_iptw_hz(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs);

// Hajek-normalized weighted average of pseudo-values per group.
GroupCurves est_iptw_pv(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs,
                        const Eigen::VectorXd& grid);

// 1:1 greedy nearest-neighbor propensity matching without replacement
// (treated in descending propensity order), then stratified KM on the
// matched sample.  caliper is an absolute bound on |pi_treated - pi_control|.
GroupCurves est_matching(const SurvivalDataset& data, const std::vector<std::string>& treatment_covs,
                         std::optional<double> caliper = {});

// Empirical-likelihood weights per group: maximize sum log p_i subject to
// sum p_i = 1 and sum p_i x_i = pooled mean of the balance covariates, then
// weighted KM.  balance_covs empty = all covariates.
GroupCurves est_el(const SurvivalDataset& data, const std::vector<std::string>& balance_covs);

// IPCW-augmented doubly robust estimator on the given grid.
GroupCurves est_aiptw(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                      const std::vector<std::string>& treatment_covs, const Eigen::VectorXd& grid);

GroupCurves est_aiptw_pv(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                         const std::vector<std::string>& treatment_covs, const Eigen::VectorXd& grid,
                         PvLink link = PvLink::Identity);

// IPTW-weighted Cox fit, then G-Formula standardization.
GroupCurves est_g_formula_iptw(const SurvivalDataset& data, const std::vector<std::string>& outcome_covs,
                               const std::vector<std::string>& treatment_covs);

namespace detail {

// Greedy 1:1 matching on the given propensities: treated rows in descending
// propensity order each take the nearest still-available control, skipped
// when the nearest is farther than the (absolute) caliper.  Returns the
// matched row indices, sorted ascending; empty when nothing matches.
// Ties — equal propensities or equidistant controls — are broken by
// tie_rank (the position each row had in the caller's input, empty = row
// order of `fitted`).  The rank must not encode anything outcome-related:
// breaking ties by a time-sorted order would silently select early
// failures into the matched sample.
std::vector<Eigen::Index> match_pairs(const Eigen::VectorXd& fitted, const Eigen::VectorXi& group,
                                      std::optional<double> caliper,
                                      const std::vector<Eigen::Index>& tie_rank = {});

// Empirical-likelihood weights for one group given the centered balance
// matrix (rows x_i - target mean): p_i = 1/(n (1 + eta'c_i)) with eta the
// dual Newton solution of sum c_i / (1 + eta'c_i) = 0.
Eigen::VectorXd el_group_weights(const Eigen::MatrixXd& centered);

// S_z(t_j) = (1/n) sum_i [ S_cox(t_j|z,x_i) + I(Z_i=z)/pi_z_i * (Y_i(t_j) -
// S_cox(t_j|z,x_i)) ] with Y_i(t) = I(T_i > t)/G(t-).  Exposed so the
// combination formula can be tested with forced ingredients.
StepCurve aiptw_curve(const SurvivalDataset& data, int z, const Eigen::VectorXd& grid,
                      const Eigen::MatrixXd& cox_surv, const Eigen::VectorXd& pi_z,
                      const StepCurve& censor_km);

// Pseudo-value analog: Y is replaced by theta_i(t_j), no censoring term.
StepCurve aiptw_pv_curve(const SurvivalDataset& data, int z, const Eigen::VectorXd& grid,
                         const Eigen::MatrixXd& m_hat, const Eigen::VectorXd& pi_z,
                         const Eigen::MatrixXd& pv);

}  // namespace detail

}  // namespace survadj
