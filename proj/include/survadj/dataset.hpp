#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "survadj/errors.hpp"

namespace survadj {

// Right-censored two-arm sample.  time is the observed follow-up
// min(event, censoring); status is 1 for an observed event, 0 for a
// censored record; group is the treatment arm.
struct SurvivalDataset {
  Eigen::VectorXd time;
  Eigen::VectorXi status;
  Eigen::VectorXi group;
  Eigen::MatrixXd covariates;  // n x p, column j named covariate_names[j]
  std::vector<std::string> covariate_names;

  Eigen::Index n() const { return time.size(); }
  Eigen::Index n_covariates() const { return covariates.cols(); }
};

// Checks every dataset invariant (positive finite times, binary status and
// group, both arms present, finite covariates, well-formed names) and either
// returns the dataset or throws a ValidationError listing all violations.
SurvivalDataset validate_dataset(SurvivalDataset data);
SurvivalDataset validate_dataset(Eigen::VectorXd time, Eigen::VectorXi status, Eigen::VectorXi group,
                                 Eigen::MatrixXd covariates, std::vector<std::string> covariate_names);

// Column index for a named covariate; unknown names throw MissingCovariateSet.
Eigen::Index covariate_index(const SurvivalDataset& data, const std::string& name);
std::vector<Eigen::Index> covariate_indices(const SurvivalDataset& data,
                                            const std::vector<std::string>& names);

std::vector<Eigen::Index> group_rows(const SurvivalDataset& data, int z);

SurvivalDataset select_rows(const SurvivalDataset& data, const std::vector<Eigen::Index>& rows);

// Permutation sorting subjects lexicographically by (time, status, group,
// covariates).  Estimators reorder through this so results are invariant to
// the storage order of the input rows.
std::vector<Eigen::Index> canonical_order(const SurvivalDataset& data);

}  // namespace survadj
