#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "survadj/dataset.hpp"
#include "survadj/step_curve.hpp"

namespace survadj {

struct PropensityFit {
  Eigen::VectorXd coefficients;  // intercept first, then covariate_set order
  Eigen::VectorXd fitted;        // per-subject P(Z=1|x), strictly inside (0,1)
  std::vector<std::string> covariate_set;
  std::vector<Eigen::Index> covariate_indices;
};

struct CoxFit {
  Eigen::VectorXd coefficients;  // treatment first when included, then covariate_set order
  bool includes_treatment = false;
  std::vector<std::string> covariate_set;
  std::vector<Eigen::Index> covariate_indices;
  StepCurve baseline_cumhaz;  // Breslow cumulative hazard, starts at 0, non-decreasing
  bool weighted = false;
  Eigen::VectorXd weights;  // empty when unweighted
};

enum class PvLink { Identity, Cloglog };

struct PVRegressionFit {
  Eigen::VectorXd grid;
  Eigen::MatrixXd coefficients;  // (2 + q) x m, rows: intercept, treatment, covariates
  PvLink link = PvLink::Identity;
  std::vector<std::string> covariate_set;
  std::vector<Eigen::Index> covariate_indices;
};

struct PseudoValueMatrix;

// Newton/IRLS maximum likelihood; converged when the score max-norm drops
// below 1e-8 or the relative log-likelihood change below 1e-10.  The
// convergence test runs before the first step, so data whose score vanishes
// at beta = 0 returns exact zeros.  Empty covariate_set fits intercept only.
PropensityFit fit_logistic(const SurvivalDataset& data, const std::vector<std::string>& covariate_set);

double predict_propensity(const PropensityFit& fit, Eigen::Ref<const Eigen::VectorXd> x);

// Breslow-ties partial likelihood, Newton-Raphson with step halving, plus the
// Breslow baseline cumulative hazard.  weights (full-dataset length) give the
// working model for the weighted G-Formula variant.
CoxFit fit_cox(const SurvivalDataset& data, const std::vector<std::string>& covariate_set,
               bool include_treatment, const Eigen::VectorXd* weights = nullptr);

// S(t|z,x) = exp(-Lambda0(t) * exp(lp)); x in fit covariate order.
double predict_cox_survival(const CoxFit& fit, int z, Eigen::Ref<const Eigen::VectorXd> x, double t);

// Linear predictor beta_Z*z + beta_X'x for every dataset row.
Eigen::VectorXd cox_linear_predictor(const CoxFit& fit, const SurvivalDataset& data, int z);

// Independent per-time least squares of theta(t_j) on (1, Z, X).  The
// complementary-log-log link mu = exp(-exp(eta)) is fit by Gauss-Newton.
PVRegressionFit fit_pv_regression(const PseudoValueMatrix& pv, const SurvivalDataset& data,
                                  const std::vector<std::string>& covariate_set,
                                  PvLink link = PvLink::Identity);

// Prediction at grid index j for group z; x in fit covariate order.
double predict_pv(const PVRegressionFit& fit, int z, Eigen::Ref<const Eigen::VectorXd> x, Eigen::Index j);

}  // namespace survadj
