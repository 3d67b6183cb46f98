#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "survadj/errors.hpp"

namespace survadj {

// Right-continuous step function on [0, inf): equals initial_value on
// [0, times[0]) and values[i] on [times[i], times[i+1]).  times strictly
// increasing; an empty times vector means the function is constant.
struct StepCurve {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  double initial_value = 1.0;

  Eigen::Index n_jumps() const { return times.size(); }
};

// Value at t (t >= 0, finite).
double eval_curve(const StepCurve& curve, double t);

// Left limit at t: the value just before t.  Equals eval at non-jump points.
double eval_curve_left(const StepCurve& curve, double t);

// Exact integral over [a, b]; requires 0 <= a <= b, both finite.
double integrate_curve(const StepCurve& curve, double a, double b);

// Combine curves pointwise on the union of their jump grids.  The combiner
// receives one value per input curve (in order) and is also applied to the
// initial values.  Requires at least one curve.
StepCurve pointwise_combine(std::span<const StepCurve> curves,
                            const std::function<double(const Eigen::VectorXd&)>& combiner);

// a - b on the merged grid.
StepCurve curve_difference(const StepCurve& a, const StepCurve& b);

}  // namespace survadj
