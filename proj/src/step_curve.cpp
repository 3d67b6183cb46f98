#include "survadj/step_curve.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace survadj {

namespace {

// Index of the segment containing t: -1 for the initial segment, i when
// times[i] <= t < times[i+1].
Eigen::Index segment_index(const StepCurve& curve, double t) {
  const double* begin = curve.times.data();
  const double* end = begin + curve.times.size();
  return std::upper_bound(begin, end, t) - begin - 1;
}

double value_at_segment(const StepCurve& curve, Eigen::Index i) {
  return i < 0 ? curve.initial_value : curve.values[i];
}

}  // namespace

double eval_curve(const StepCurve& curve, double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw SurvError(ErrorCode::InvalidArgument, "eval_curve requires finite t >= 0");
  return value_at_segment(curve, segment_index(curve, t));
}

double eval_curve_left(const StepCurve& curve, double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw SurvError(ErrorCode::InvalidArgument, "eval_curve_left requires finite t >= 0");
  const double* begin = curve.times.data();
  const double* end = begin + curve.times.size();
  // One past the last jump strictly before t, minus one.
  Eigen::Index i = std::lower_bound(begin, end, t) - begin - 1;
  return value_at_segment(curve, i);
}

double integrate_curve(const StepCurve& curve, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || a > b)
    throw SurvError(ErrorCode::InvalidInterval, "integrate_curve requires 0 <= a <= b, finite");
  Eigen::Index i = segment_index(curve, a);
  double total = 0.0;
  double cursor = a;
  double current = value_at_segment(curve, i);
  for (Eigen::Index j = i + 1; j < curve.times.size() && curve.times[j] < b; ++j) {
    total += current * (curve.times[j] - cursor);
    cursor = curve.times[j];
    current = curve.values[j];
  }
  total += current * (b - cursor);
  return total;
}

StepCurve pointwise_combine(std::span<const StepCurve> curves,
                            const std::function<double(const Eigen::VectorXd&)>& combiner) {
  if (curves.empty())
    throw SurvError(ErrorCode::InvalidArgument, "pointwise_combine requires at least one curve");
  const Eigen::Index k = static_cast<Eigen::Index>(curves.size());

  std::vector<double> grid;
  for (const StepCurve& c : curves)
    grid.insert(grid.end(), c.times.data(), c.times.data() + c.times.size());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  StepCurve out;
  out.times = Eigen::Map<const Eigen::VectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size()));
  out.values.resize(out.times.size());

  Eigen::VectorXd current(k);
  for (Eigen::Index c = 0; c < k; ++c) current[c] = curves[c].initial_value;
  out.initial_value = combiner(current);

  std::vector<Eigen::Index> cursor(curves.size(), 0);
  for (Eigen::Index j = 0; j < out.times.size(); ++j) {
    const double t = out.times[j];
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::Index& pos = cursor[c];
      while (pos < curves[c].times.size() && curves[c].times[pos] <= t) {
        current[c] = curves[c].values[pos];
        ++pos;
      }
    }
    out.values[j] = combiner(current);
  }
  return out;
}

StepCurve curve_difference(const StepCurve& a, const StepCurve& b) {
  const StepCurve curves[2] = {a, b};
  return pointwise_combine(curves, [](const Eigen::VectorXd& v) { return v[0] - v[1]; });
}

}  // namespace survadj
