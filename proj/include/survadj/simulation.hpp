#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "survadj/dataset.hpp"
#include "survadj/estimators.hpp"
#include "survadj/step_curve.hpp"

namespace survadj {

enum class ScenarioId { CO_CT, CO_ICT, ICO_CT, ICO_ICT, CO_CT_TP, CO_CT_OP };

inline constexpr std::array<ScenarioId, 6> kAllScenarios = {
    ScenarioId::CO_CT,    ScenarioId::CO_ICT,   ScenarioId::ICO_CT,
    ScenarioId::ICO_ICT,  ScenarioId::CO_CT_TP, ScenarioId::CO_CT_OP,
};

const char* scenario_name(ScenarioId id);
std::optional<ScenarioId> parse_scenario(std::string_view token);

// Covariate sets fed to the outcome and treatment models under each scenario.
struct ScenarioSpec {
  ScenarioId id;
  std::vector<std::string> outcome_covs;
  std::vector<std::string> treatment_covs;
};

ScenarioSpec scenario_spec(ScenarioId id);

struct CovariateSpec {
  enum class Kind { Bernoulli, Normal };
  Kind kind = Kind::Normal;
  double a = 0.0;  // Bernoulli success probability, or Normal mean
  double b = 1.0;  // Normal standard deviation (unused for Bernoulli)

  static CovariateSpec bernoulli(double p) { return {Kind::Bernoulli, p, 0.0}; }
  static CovariateSpec normal(double mean, double sd) { return {Kind::Normal, mean, sd}; }
};

struct WeibullParams {
  double lambda = 1.0;
  double gamma = 1.0;
};

// Data-generating process. The outcome linear predictor uses (X1, X2, X4, X5, Z),
// the treatment linear predictor uses (X2, X3, X5, X6) plus an intercept; X3 and
// X6 are pure treatment predictors, X1 and X4 pure outcome predictors, X2 and X5
// the confounders.
struct DGPConfig {
  std::array<CovariateSpec, 6> covariate_specs;
  Eigen::VectorXd beta_outcome;    // coefficients of (X1, X2, X4, X5, Z)
  Eigen::VectorXd beta_treatment;  // coefficients of (X2, X3, X5, X6)
  double treatment_intercept = -0.8;
  WeibullParams event_weibull{2.0, 1.8};
  WeibullParams censor_weibull{0.5, 2.0};
  Eigen::Index superpop_size = 100000;
};

DGPConfig default_dgp();
void validate_dgp(const DGPConfig& cfg);

struct SuperPopulation {
  Eigen::MatrixXd covariates;  // size x 6
  Eigen::VectorXd time_z0;     // potential event time under z=0
  Eigen::VectorXd time_z1;     // potential event time under z=1 (same uniform draw)
  Eigen::VectorXd treatment_probs;
  StepCurve true_curve_z0;
  StepCurve true_curve_z1;
};

// Inverse-transform Weibull draw: S(t) = exp(-lambda t^gamma e^lp) = u.
double weibull_time(double u, const WeibullParams& wb, double lp);

SuperPopulation generate_superpopulation(const DGPConfig& cfg, uint64_t seed);

SurvivalDataset draw_replication(const SuperPopulation& sp, const DGPConfig& cfg, Eigen::Index n,
                                 uint64_t seed);

// Integration horizon: min(last observed event time in group z, first time the
// true curve reaches 0.05).
double compute_tau(const StepCurve& true_curve, const SurvivalDataset& sample, int z);

double delta_bias(const StepCurve& true_curve, const StepCurve& est, double tau);
double delta_mse(const StepCurve& true_curve, const StepCurve& est, double tau);

// Prefix integrals of a (truth) step curve, so per-estimate metrics cost
// O(est jumps x log truth jumps) instead of a full merge against ~10^5 times.
struct TruthIntegrals {
  Eigen::VectorXd bounds;  // 0, then the jump times
  Eigen::VectorXd seg;     // curve value on [bounds[i], bounds[i+1]), last extends
  Eigen::VectorXd int_s;   // prefix integral of the curve up to bounds[i]
  Eigen::VectorXd int_s2;  // prefix integral of the squared curve
};

TruthIntegrals make_truth_integrals(const StepCurve& curve);
double delta_bias(const TruthIntegrals& truth, const StepCurve& est, double tau);
double delta_mse(const TruthIntegrals& truth, const StepCurve& est, double tau);

// First time the curve reaches 0.05, or its last jump time if it never does.
double truth_horizon(const StepCurve& true_curve);

struct MetricRecord {
  MethodId method{};
  ScenarioId scenario{};
  Eigen::Index n = 0;
  int rep = 0;
  int group = 0;
  double delta_bias = 0.0;  // post-correction when corrections are enabled
  double delta_mse = 0.0;
  bool nm = false;  // curve rose somewhere (before corrections)
  bool oob = false; // curve left [0,1] somewhere (before corrections)
  double tau = 0.0;
  bool failed = false;
  double raw_delta_bias = 0.0;  // metrics of the uncorrected curve
  double raw_delta_mse = 0.0;
};

struct AggregateRow {
  MethodId method{};
  ScenarioId scenario{};
  Eigen::Index n = 0;
  int group = 0;
  double g_bias = 0.0;
  double g_bias_mcse = 0.0;
  double g_mse = 0.0;
  double g_mse_mcse = 0.0;
  double nm_pct = 0.0;
  double oob_pct = 0.0;
};

// Fraction of replications whose uncorrected curve is outside [0,1] at each of
// a fixed set of times spanning [0, truth horizon of the group].
struct OobProfile {
  MethodId method{};
  ScenarioId scenario{};
  Eigen::Index n = 0;
  int group = 0;
  Eigen::VectorXd times;
  Eigen::VectorXd fraction;
};

struct StudyConfig {
  DGPConfig dgp;
  std::vector<ScenarioId> scenarios;
  std::vector<MethodId> methods;
  std::vector<Eigen::Index> sample_sizes;
  int reps = 2;
  uint64_t master_seed = 1;
  bool apply_corrections = false;
  std::optional<double> caliper_sd_fraction;
  PvLink pv_link = PvLink::Identity;
  int threads = 1;
  int oob_profile_points = 100;
};

struct StudyResult {
  SuperPopulation superpop;
  std::vector<MetricRecord> records;     // sorted by (method, scenario, n, rep, group)
  std::vector<AggregateRow> aggregates;  // sorted by (method, scenario, n, group)
  std::vector<OobProfile> oob_profiles;
};

// One dataset is drawn per (scenario, n, rep), its seed derived from
// (master_seed, scenario, n, rep): method contrasts within a scenario are
// paired on the shared draw, scenario panels are independent replications.
// Bit-identical output for any thread count.
StudyResult run_study(const StudyConfig& cfg);

}  // namespace survadj
