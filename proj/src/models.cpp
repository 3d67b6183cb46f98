#include "survadj/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survadj/nonparam.hpp"

namespace survadj {

namespace {

constexpr double kScoreTol = 1e-9;
constexpr double kLogLikTol = 1e-10;
constexpr double kGapTol = 1e-12;  // Newton decrement per unit event weight
constexpr int kMaxIter = 100;
constexpr int kMaxHalvings = 20;
constexpr double kDivergedBeta = 30.0;

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double log1pexp(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

void check_full_rank(const Eigen::MatrixXd& design, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols())
    throw SurvError(ErrorCode::RankDeficient, std::string(what) + ": design matrix is rank deficient");
}

}  // namespace

PropensityFit fit_logistic(const SurvivalDataset& data, const std::vector<std::string>& covariate_set) {
  const Eigen::Index n = data.n();
  for (int z : {0, 1})
    if ((data.group.array() == z).count() == 0)
      throw SurvError(ErrorCode::EmptyGroup, "logistic fit needs subjects in both groups");

  const std::vector<Eigen::Index> idx = covariate_indices(data, covariate_set);
  const Eigen::Index p = 1 + static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(idx.size()); ++j)
    design.col(1 + j) = data.covariates.col(idx[j]);
  check_full_rank(design, "fit_logistic");

  const Eigen::VectorXd y = data.group.cast<double>();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n), prob(n);
  double loglik = -std::numeric_limits<double>::infinity();

  const auto eval = [&](const Eigen::VectorXd& b, Eigen::VectorXd& eta_out, Eigen::VectorXd& prob_out) {
    eta_out.noalias() = design * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      prob_out[i] = sigmoid(eta_out[i]);
      ll += y[i] * eta_out[i] - log1pexp(eta_out[i]);
    }
    return ll;
  };

  loglik = eval(beta, eta, prob);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    // Convergence is checked before stepping so an already-stationary start
    // (e.g. intercept-only on balanced groups) returns beta exactly.
    const Eigen::VectorXd score = design.transpose() * (y - prob);
    if (score.cwiseAbs().maxCoeff() < kScoreTol) break;

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = prob[i] * (1.0 - prob[i]);
    const Eigen::MatrixXd hessian = design.transpose() * w.asDiagonal() * design;
    Eigen::VectorXd step = hessian.ldlt().solve(score);

    double new_ll = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd candidate;
    int halvings = 0;
    for (; halvings <= kMaxHalvings; ++halvings) {
      candidate = beta + step;
      new_ll = eval(candidate, eta, prob);
      if (std::isfinite(new_ll) && new_ll >= loglik - 1e-12) break;
      step *= 0.5;
    }
    if (halvings > kMaxHalvings)
      throw SurvError(ErrorCode::NoConvergence, "fit_logistic: step halving failed to improve likelihood");
    beta = candidate;
    if (beta.cwiseAbs().maxCoeff() > kDivergedBeta)
      throw SurvError(ErrorCode::Separation, "fit_logistic: coefficients diverged (|beta| > 30)");
    const bool small_change = std::abs(new_ll - loglik) < kLogLikTol * (std::abs(loglik) + 1.0);
    loglik = new_ll;
    if (small_change) break;
    if (iter == kMaxIter - 1)
      throw SurvError(ErrorCode::NoConvergence, "fit_logistic: no convergence in 100 iterations");
  }

  PropensityFit fit;
  fit.coefficients = beta;
  fit.fitted = prob;
  fit.covariate_set = covariate_set;
  fit.covariate_indices = idx;
  // 1e-8 of 0/1 is eta ~ 18.4; a separated fit plateaus past that, a real
  // propensity model never gets close.
  for (Eigen::Index i = 0; i < n; ++i)
    if (fit.fitted[i] <= 1e-8 || fit.fitted[i] >= 1.0 - 1e-8)
      throw SurvError(ErrorCode::Separation, "fit_logistic: degenerate fitted probabilities");
  return fit;
}

double predict_propensity(const PropensityFit& fit, Eigen::Ref<const Eigen::VectorXd> x) {
  if (x.size() + 1 != fit.coefficients.size())
    throw SurvError(ErrorCode::DimensionMismatch, "predict_propensity: covariate vector length mismatch");
  return sigmoid(fit.coefficients[0] + fit.coefficients.tail(x.size()).dot(x));
}

CoxFit fit_cox(const SurvivalDataset& data, const std::vector<std::string>& covariate_set,
               bool include_treatment, const Eigen::VectorXd* weights) {
  const Eigen::Index n = data.n();
  if (weights != nullptr) {
    if (weights->size() != n)
      throw SurvError(ErrorCode::DimensionMismatch, "fit_cox: weights length must equal dataset rows");
    if ((weights->array() < 0.0).any())
      throw SurvError(ErrorCode::InvalidArgument, "fit_cox: weights must be nonnegative");
  }
  if ((data.status.array() == 1).count() == 0)
    throw SurvError(ErrorCode::NoEvents, "fit_cox: no events in dataset");

  const std::vector<Eigen::Index> idx = covariate_indices(data, covariate_set);
  const Eigen::Index p = (include_treatment ? 1 : 0) + static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd design(n, p);
  if (include_treatment) design.col(0) = data.group.cast<double>();
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(idx.size()); ++j)
    design.col((include_treatment ? 1 : 0) + j) = data.covariates.col(idx[j]);

  // Subjects in descending time order; the risk-set statistics S0, S1, S2
  // accumulate as a running prefix.  Breslow ties: everything observed at a
  // time joins the risk set before that time's events are scored.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return data.time[a] != data.time[b] ? data.time[a] > data.time[b] : a < b;
  });

  Eigen::VectorXd w(n);
  if (weights)
    w = *weights;
  else
    w.setOnes();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd score(p), lp(n), elp(n);
  Eigen::MatrixXd info(p, p);

  // Convergence and step-acceptance thresholds are per unit of event weight:
  // the log likelihood is a sum over events, so its double-precision
  // resolution (and every meaningful change in it) scales the same way.
  double event_weight = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (data.status[i] == 1) event_weight += w[i];
  const double gap_tol = kGapTol * std::max(1.0, event_weight);

  // One pass over the data: log partial likelihood, and (optionally) score
  // and information at the given beta.
  const auto scan = [&](const Eigen::VectorXd& b, bool derivatives) {
    lp.noalias() = design * b;
    const double shift = n > 0 ? lp.maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) elp[i] = w[i] * std::exp(lp[i] - shift);

    double ll = 0.0;
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
    if (derivatives) {
      score.setZero();
      info.setZero();
    }
    size_t pos = 0;
    while (pos < order.size()) {
      const double t = data.time[order[pos]];
      size_t end = pos;
      while (end < order.size() && data.time[order[end]] == t) {
        const Eigen::Index i = order[end];
        s0 += elp[i];
        if (derivatives) {
          s1.noalias() += elp[i] * design.row(i).transpose();
          s2.noalias() += elp[i] * design.row(i).transpose() * design.row(i);
        }
        ++end;
      }
      double dw = 0.0;
      for (size_t q = pos; q < end; ++q) {
        const Eigen::Index i = order[q];
        if (data.status[i] == 1 && w[i] > 0.0) {
          dw += w[i];
          ll += w[i] * lp[i];
          if (derivatives) score.noalias() += w[i] * design.row(i).transpose();
        }
      }
      if (dw > 0.0) {
        ll -= dw * (std::log(s0) + shift);
        if (derivatives) {
          const Eigen::VectorXd mean = s1 / s0;
          score.noalias() -= dw * mean;
          info.noalias() += dw * (s2 / s0 - mean * mean.transpose());
        }
      }
      pos = end;
    }
    return ll;
  };

  double loglik = scan(beta, true);
  if (p > 0) {
    bool resolved = false;
    for (int iter = 0; iter < kMaxIter; ++iter) {
      // Newton decrement: 0.5 s'I^{-1}s estimates the gain still available.
      // Stopping on it (rather than on the raw score) is what terminates
      // cleanly when the optimum is flat at the likelihood's own resolution —
      // near convergence the computed loglik is constant to rounding while the
      // score hovers at its cancellation noise floor.
      Eigen::VectorXd step = info.ldlt().solve(score);
      const double gap = 0.5 * score.dot(step);
      if (!std::isfinite(gap))
        throw SurvError(ErrorCode::NoConvergence, "fit_cox: information matrix produced a non-finite step");
      if (gap <= gap_tol) {
        resolved = true;
        break;
      }
      double new_ll = -std::numeric_limits<double>::infinity();
      Eigen::VectorXd candidate;
      int halvings = 0;
      for (; halvings <= kMaxHalvings; ++halvings) {
        candidate = beta + step;
        new_ll = scan(candidate, false);
        if (std::isfinite(new_ll) && new_ll >= loglik - gap_tol) break;
        step *= 0.5;
      }
      if (halvings > kMaxHalvings)
        throw SurvError(ErrorCode::NoConvergence, "fit_cox: step halving failed to improve likelihood");
      beta = candidate;
      if (beta.cwiseAbs().maxCoeff() > kDivergedBeta)
        throw SurvError(ErrorCode::MonotoneLikelihood,
                        "fit_cox: coefficients diverged (|beta| > 30), likelihood is monotone");
      loglik = scan(beta, true);
    }
    if (!resolved)
      throw SurvError(ErrorCode::NoConvergence, "fit_cox: no convergence in 100 iterations");
  }

  // Breslow baseline: increments d_j^w / sum_{at risk} w*exp(lp) at ascending
  // event times, accumulated into a cumulative-hazard step curve.
  lp.noalias() = design * beta;
  for (Eigen::Index i = 0; i < n; ++i) elp[i] = w[i] * std::exp(lp[i]);
  std::vector<double> jump_times, jump_values;
  {
    double s0 = 0.0;
    double cumhaz = 0.0;
    size_t pos = 0;
    std::vector<std::pair<double, double>> pending;  // (time, increment) in descending order
    while (pos < order.size()) {
      const double t = data.time[order[pos]];
      size_t end = pos;
      double dw = 0.0;
      while (end < order.size() && data.time[order[end]] == t) {
        s0 += elp[order[end]];
        if (data.status[order[end]] == 1) dw += w[order[end]];
        ++end;
      }
      if (dw > 0.0 && s0 > 0.0) pending.emplace_back(t, dw / s0);
      pos = end;
    }
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
      cumhaz += it->second;
      jump_times.push_back(it->first);
      jump_values.push_back(cumhaz);
    }
  }

  CoxFit fit;
  fit.coefficients = beta;
  fit.includes_treatment = include_treatment;
  fit.covariate_set = covariate_set;
  fit.covariate_indices = idx;
  fit.baseline_cumhaz.times =
      Eigen::Map<const Eigen::VectorXd>(jump_times.data(), static_cast<Eigen::Index>(jump_times.size()));
  fit.baseline_cumhaz.values =
      Eigen::Map<const Eigen::VectorXd>(jump_values.data(), static_cast<Eigen::Index>(jump_values.size()));
  fit.baseline_cumhaz.initial_value = 0.0;
  fit.weighted = weights != nullptr;
  if (weights) fit.weights = *weights;
  return fit;
}

double predict_cox_survival(const CoxFit& fit, int z, Eigen::Ref<const Eigen::VectorXd> x, double t) {
  const Eigen::Index q = static_cast<Eigen::Index>(fit.covariate_indices.size());
  if (x.size() != q)
    throw SurvError(ErrorCode::DimensionMismatch, "predict_cox_survival: covariate vector length mismatch");
  double lp = 0.0;
  Eigen::Index offset = 0;
  if (fit.includes_treatment) {
    lp += fit.coefficients[0] * z;
    offset = 1;
  }
  lp += fit.coefficients.tail(fit.coefficients.size() - offset).dot(x);
  return std::exp(-eval_curve(fit.baseline_cumhaz, t) * std::exp(lp));
}

Eigen::VectorXd cox_linear_predictor(const CoxFit& fit, const SurvivalDataset& data, int z) {
  Eigen::VectorXd lp = Eigen::VectorXd::Zero(data.n());
  Eigen::Index offset = 0;
  if (fit.includes_treatment) {
    lp.array() += fit.coefficients[0] * z;
    offset = 1;
  }
  for (size_t j = 0; j < fit.covariate_indices.size(); ++j)
    lp += fit.coefficients[offset + static_cast<Eigen::Index>(j)] * data.covariates.col(fit.covariate_indices[j]);
  return lp;
}

PVRegressionFit fit_pv_regression(const PseudoValueMatrix& pv, const SurvivalDataset& data,
                                  const std::vector<std::string>& covariate_set, PvLink link) {
  if (pv.grid.size() == 0)
    throw SurvError(ErrorCode::InvalidArgument, "fit_pv_regression: empty grid");
  if (pv.values.rows() != data.n())
    throw SurvError(ErrorCode::DimensionMismatch, "fit_pv_regression: pseudo-value rows must match dataset");

  const Eigen::Index n = data.n();
  const std::vector<Eigen::Index> idx = covariate_indices(data, covariate_set);
  const Eigen::Index p = 2 + static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  design.col(1) = data.group.cast<double>();
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(idx.size()); ++j)
    design.col(2 + j) = data.covariates.col(idx[j]);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p)
    throw SurvError(ErrorCode::RankDeficient, "fit_pv_regression: design matrix is rank deficient");

  PVRegressionFit fit;
  fit.grid = pv.grid;
  fit.link = link;
  fit.covariate_set = covariate_set;
  fit.covariate_indices = idx;

  if (link == PvLink::Identity) {
    // The design is shared across times, so one QR solves every time point.
    fit.coefficients = qr.solve(pv.values);
    return fit;
  }

  // Complementary log-log mean mu = exp(-exp(eta)): per-time Gauss-Newton on
  // the least-squares residual, started from the identity fit pushed through
  // the inverse link.
  fit.coefficients.resize(p, pv.grid.size());
  const Eigen::MatrixXd identity_coef = qr.solve(pv.values);
  Eigen::VectorXd mu(n), jac_scale(n), eta(n);
  for (Eigen::Index j = 0; j < pv.grid.size(); ++j) {
    Eigen::VectorXd start(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double fitted = std::clamp((design.row(i) * identity_coef.col(j)).value(), 1e-6, 1.0 - 1e-6);
      start[i] = std::log(-std::log(fitted));
    }
    Eigen::VectorXd b = qr.solve(start);
    const Eigen::VectorXd theta = pv.values.col(j);
    const auto sse = [&](const Eigen::VectorXd& bb) {
      eta.noalias() = design * bb;
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = std::exp(-std::exp(eta[i]));
        const double r = theta[i] - mu[i];
        s += r * r;
      }
      return s;
    };
    double loss = sse(b);
    for (int iter = 0; iter < kMaxIter; ++iter) {
      for (Eigen::Index i = 0; i < n; ++i) jac_scale[i] = -std::exp(eta[i]) * mu[i];  // d mu / d eta
      const Eigen::MatrixXd jac = jac_scale.asDiagonal() * design;
      const Eigen::VectorXd resid = theta - mu;
      const Eigen::VectorXd grad = jac.transpose() * resid;
      if (grad.cwiseAbs().maxCoeff() < 1e-8 * static_cast<double>(n)) break;
      Eigen::VectorXd step = (jac.transpose() * jac)
                                 .ldlt()
                                 .solve(grad);
      double new_loss = std::numeric_limits<double>::infinity();
      Eigen::VectorXd candidate;
      int halvings = 0;
      for (; halvings <= kMaxHalvings; ++halvings) {
        candidate = b + step;
        new_loss = sse(candidate);
        if (std::isfinite(new_loss) && new_loss <= loss + 1e-12) break;
        step *= 0.5;
      }
      if (halvings > kMaxHalvings) break;  // stalled at a flat spot; keep the best point
      b = candidate;
      const bool small_change = loss - new_loss < 1e-12 * (loss + 1.0);
      loss = new_loss;
      if (small_change) break;
      if (iter == kMaxIter - 1)
        throw SurvError(ErrorCode::NoConvergence, "fit_pv_regression: cloglog fit did not converge");
    }
    sse(b);  // leave eta/mu at the solution
    fit.coefficients.col(j) = b;
  }
  return fit;
}

double predict_pv(const PVRegressionFit& fit, int z, Eigen::Ref<const Eigen::VectorXd> x, Eigen::Index j) {
  const Eigen::Index q = static_cast<Eigen::Index>(fit.covariate_indices.size());
  if (x.size() != q)
    throw SurvError(ErrorCode::DimensionMismatch, "predict_pv: covariate vector length mismatch");
  if (j < 0 || j >= fit.grid.size())
    throw SurvError(ErrorCode::InvalidArgument, "predict_pv: grid index out of range");
  const double eta = fit.coefficients(0, j) + fit.coefficients(1, j) * z + fit.coefficients.col(j).tail(q).dot(x);
  return fit.link == PvLink::Identity ? eta : std::exp(-std::exp(eta));
}

}  // namespace survadj
