#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "survadj/dataset.hpp"
#include "survadj/rng.hpp"
#include "survadj/step_curve.hpp"

namespace testutil {

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Eigen::VectorXi ivec(std::initializer_list<int> xs) {
  Eigen::VectorXi v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (int x : xs) v[i++] = x;
  return v;
}

// Dataset from parallel lists; covariate columns appended in order.
inline survadj::SurvivalDataset make_data(std::initializer_list<double> times,
                                          std::initializer_list<int> statuses,
                                          std::initializer_list<int> groups,
                                          std::vector<std::pair<std::string, std::vector<double>>> covs = {}) {
  survadj::SurvivalDataset d;
  d.time = vec(times);
  d.status = ivec(statuses);
  d.group = ivec(groups);
  d.covariates.resize(d.time.size(), static_cast<Eigen::Index>(covs.size()));
  for (std::size_t j = 0; j < covs.size(); ++j) {
    d.covariate_names.push_back(covs[j].first);
    for (Eigen::Index i = 0; i < d.time.size(); ++i)
      d.covariates(i, static_cast<Eigen::Index>(j)) = covs[j].second[static_cast<std::size_t>(i)];
  }
  return d;
}

// Right-censored dataset with q standard-normal covariates, group assignment
// Bernoulli(p_treat), exponential-ish positive times.  Censoring share is
// controlled by censor_prob applied independently per row.
inline survadj::SurvivalDataset random_data(survadj::Rng& rng, Eigen::Index n, Eigen::Index q,
                                            double censor_prob = 0.3, double p_treat = 0.5) {
  survadj::SurvivalDataset d;
  d.time.resize(n);
  d.status.resize(n);
  d.group.resize(n);
  d.covariates.resize(n, q);
  for (Eigen::Index j = 0; j < q; ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) d.covariates(i, j) = rng.normal();
    d.group[i] = rng.bernoulli(p_treat);
    double lp = 0.3 * d.covariates.row(i).sum() - 0.2 * d.group[i];
    d.time[i] = -std::log(rng.uniform()) * std::exp(-lp);
    d.status[i] = rng.bernoulli(censor_prob) ? 0 : 1;
  }
  return d;
}

// Random right-continuous step curve on a sorted positive grid.
inline survadj::StepCurve random_curve(survadj::Rng& rng, Eigen::Index k, double initial = 1.0,
                                       bool monotone = false) {
  survadj::StepCurve c;
  c.initial_value = initial;
  c.times.resize(k);
  c.values.resize(k);
  double t = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    t += 0.1 + rng.uniform();
    c.times[j] = t;
    c.values[j] = rng.uniform();
  }
  if (monotone) {
    double lo = initial;
    for (Eigen::Index j = 0; j < k; ++j) {
      c.values[j] = std::min(c.values[j], lo);
      lo = c.values[j];
    }
  }
  return c;
}

}  // namespace testutil
