#pragma once

#include <Eigen/Dense>
#include <optional>

#include "survadj/dataset.hpp"
#include "survadj/step_curve.hpp"

namespace survadj {

// Per-subject jackknife pseudo-observations theta_i(t_j) of the pooled
// Kaplan-Meier: theta_i(t) = n*S(t) - (n-1)*S_without_i(t).
struct PseudoValueMatrix {
  Eigen::VectorXd grid;    // evaluation times, strictly increasing
  Eigen::MatrixXd values;  // n x m
};

// Weighted product-limit estimator within group z (both groups when z is
// empty): S(t) = prod_{t_j <= t} (1 - d_j/Y_j) with weighted event mass d_j
// and at-risk mass Y_j.  Jumps only at event times; weights default to 1 and
// are indexed by full-dataset row.
StepCurve kaplan_meier(const SurvivalDataset& data, std::optional<int> group = {},
                       const Eigen::VectorXd* weights = nullptr);

// exp(-cumulative hazard) with weighted Breslow-type increments d_j/Y_j.
StepCurve nelson_aalen_survival(const SurvivalDataset& data, std::optional<int> group = {},
                                const Eigen::VectorXd* weights = nullptr);

// Kaplan-Meier of the censoring distribution: event/censoring roles swapped,
// pooled over groups.  Equals kaplan_meier on the status-flipped dataset.
StepCurve censoring_kaplan_meier(const SurvivalDataset& data);

// Pooled-sample KM jackknife, direct leave-one-out recomputation over the
// aggregated unique-time table.  Products are accumulated in long double so
// theta recovers the survival indicator exactly (to 1e-12) on uncensored data.
PseudoValueMatrix pseudo_values(const SurvivalDataset& data, const Eigen::VectorXd& grid);

// Distinct event times across both groups, ascending: the default grid.
Eigen::VectorXd pooled_event_times(const SurvivalDataset& data);

// Clamp values (and initial value) into [0,1].
StepCurve truncate_curve(const StepCurve& curve);

// Weighted L2 projection onto non-increasing sequences (pool-adjacent-
// violators).  weights must be positive and match values in length.
Eigen::VectorXd pava_non_increasing(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

// PAVA over the curve's values with segment lengths as weights, so the
// projection is L2 in time.  The unbounded final segment borrows the previous
// spacing (1.0 when there is a single jump).  initial_value is untouched.
StepCurve isotonic_correct(const StepCurve& curve);

}  // namespace survadj
