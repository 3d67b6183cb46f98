#include "survadj/nonparam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace survadj {

namespace {

// Weighted counts aggregated over the distinct observed times of one group
// (or the pooled sample).  `leaving` counts all subjects observed at a time,
// events and censorings alike, so the at-risk mass can be decremented.
struct RiskTable {
  std::vector<double> times;
  std::vector<double> events;
  std::vector<double> leaving;
  double total_weight = 0.0;
};

RiskTable build_risk_table(const SurvivalDataset& data, std::optional<int> group,
                           const Eigen::VectorXd* weights, int event_status) {
  if (weights != nullptr) {
    if (weights->size() != data.n())
      throw SurvError(ErrorCode::DimensionMismatch, "weights length must equal dataset rows");
    if ((weights->array() < 0.0).any())
      throw SurvError(ErrorCode::InvalidArgument, "weights must be nonnegative");
  }

  std::vector<Eigen::Index> rows;
  rows.reserve(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (!group || data.group[i] == *group) rows.push_back(i);
  if (rows.empty())
    throw SurvError(ErrorCode::EmptyGroup,
                    "no subjects in group " + (group ? std::to_string(*group) : std::string("pooled")));

  std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
    return data.time[a] != data.time[b] ? data.time[a] < data.time[b] : a < b;
  });

  RiskTable table;
  for (Eigen::Index i : rows) {
    const double w = weights ? (*weights)[i] : 1.0;
    table.total_weight += w;
    if (table.times.empty() || table.times.back() != data.time[i]) {
      table.times.push_back(data.time[i]);
      table.events.push_back(0.0);
      table.leaving.push_back(0.0);
    }
    table.leaving.back() += w;
    if (data.status[i] == event_status) table.events.back() += w;
  }
  if (table.total_weight <= 0.0)
    throw SurvError(ErrorCode::AllWeightsZero, "weights sum to zero within the group");
  return table;
}

StepCurve product_limit(const RiskTable& table) {
  std::vector<double> jump_times, jump_values;
  double at_risk = table.total_weight;
  double surv = 1.0;
  for (size_t j = 0; j < table.times.size(); ++j) {
    if (at_risk <= 0.0) break;
    if (table.events[j] > 0.0) {
      surv *= 1.0 - table.events[j] / at_risk;
      jump_times.push_back(table.times[j]);
      jump_values.push_back(surv);
    }
    at_risk -= table.leaving[j];
  }
  StepCurve curve;
  curve.times = Eigen::Map<const Eigen::VectorXd>(jump_times.data(), static_cast<Eigen::Index>(jump_times.size()));
  curve.values = Eigen::Map<const Eigen::VectorXd>(jump_values.data(), static_cast<Eigen::Index>(jump_values.size()));
  curve.initial_value = 1.0;
  return curve;
}

}  // namespace

StepCurve kaplan_meier(const SurvivalDataset& data, std::optional<int> group, const Eigen::VectorXd* weights) {
  return product_limit(build_risk_table(data, group, weights, 1));
}

StepCurve nelson_aalen_survival(const SurvivalDataset& data, std::optional<int> group,
                                const Eigen::VectorXd* weights) {
  const RiskTable table = build_risk_table(data, group, weights, 1);
  std::vector<double> jump_times, jump_values;
  double at_risk = table.total_weight;
  double cumhaz = 0.0;
  for (size_t j = 0; j < table.times.size(); ++j) {
    if (at_risk <= 0.0) break;
    if (table.events[j] > 0.0) {
      cumhaz += table.events[j] / at_risk;
      jump_times.push_back(table.times[j]);
      jump_values.push_back(std::exp(-cumhaz));
    }
    at_risk -= table.leaving[j];
  }
  StepCurve curve;
  curve.times = Eigen::Map<const Eigen::VectorXd>(jump_times.data(), static_cast<Eigen::Index>(jump_times.size()));
  curve.values = Eigen::Map<const Eigen::VectorXd>(jump_values.data(), static_cast<Eigen::Index>(jump_values.size()));
  curve.initial_value = 1.0;
  return curve;
}

StepCurve censoring_kaplan_meier(const SurvivalDataset& data) {
  return product_limit(build_risk_table(data, std::nullopt, nullptr, 0));
}

Eigen::VectorXd pooled_event_times(const SurvivalDataset& data) {
  std::vector<double> times;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (data.status[i] == 1) times.push_back(data.time[i]);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
}

PseudoValueMatrix pseudo_values(const SurvivalDataset& data, const Eigen::VectorXd& grid) {
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (!(grid[j] > 0.0) || !std::isfinite(grid[j]))
      throw SurvError(ErrorCode::InvalidArgument, "pseudo-value grid times must be positive and finite");
    if (j > 0 && grid[j] <= grid[j - 1])
      throw SurvError(ErrorCode::InvalidArgument, "pseudo-value grid must be strictly increasing");
  }

  const Eigen::Index n = data.n();
  const Eigen::Index m = grid.size();

  // Integer-count aggregation of the pooled sample over distinct times.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return data.time[a] != data.time[b] ? data.time[a] < data.time[b] : a < b;
  });
  std::vector<double> utimes;
  std::vector<long> d, leaving;
  for (Eigen::Index i : order) {
    if (utimes.empty() || utimes.back() != data.time[i]) {
      utimes.push_back(data.time[i]);
      d.push_back(0);
      leaving.push_back(0);
    }
    ++leaving.back();
    if (data.status[i] == 1) ++d.back();
  }
  const size_t k = utimes.size();
  std::vector<long> at_risk(k);
  long risk = n;
  for (size_t j = 0; j < k; ++j) {
    at_risk[j] = risk;
    risk -= leaving[j];
  }

  // Walks a product-limit curve over the aggregated table with subject `skip`
  // removed (skip < 0: full sample), flushing grid values two-pointer style.
  // long double keeps the n*S - (n-1)*S_loo cancellation below 1e-12.
  const auto jackknife_row = [&](Eigen::Index skip, Eigen::VectorXd& out) {
    const double skip_time = skip >= 0 ? data.time[skip] : 0.0;
    const int skip_event = skip >= 0 ? data.status[skip] : 0;
    long double surv = 1.0L;
    Eigen::Index g = 0;
    for (size_t j = 0; j < k && g < m; ++j) {
      while (g < m && grid[g] < utimes[j]) out[g++] = static_cast<double>(surv);
      long dj = d[j];
      long rj = at_risk[j];
      if (skip >= 0 && utimes[j] <= skip_time) {
        --rj;
        if (utimes[j] == skip_time && skip_event == 1) --dj;
      }
      if (dj > 0 && rj > 0) surv *= 1.0L - static_cast<long double>(dj) / static_cast<long double>(rj);
    }
    while (g < m) out[g++] = static_cast<double>(surv);
  };

  PseudoValueMatrix pv;
  pv.grid = grid;
  pv.values.resize(n, m);
  Eigen::VectorXd full(m), loo(m);
  jackknife_row(-1, full);
  const long double nf = static_cast<long double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jackknife_row(i, loo);
    for (Eigen::Index j = 0; j < m; ++j)
      pv.values(i, j) = static_cast<double>(nf * static_cast<long double>(full[j]) -
                                            (nf - 1.0L) * static_cast<long double>(loo[j]));
  }
  return pv;
}

StepCurve truncate_curve(const StepCurve& curve) {
  StepCurve out = curve;
  out.values = out.values.cwiseMax(0.0).cwiseMin(1.0);
  out.initial_value = std::clamp(out.initial_value, 0.0, 1.0);
  return out;
}

Eigen::VectorXd pava_non_increasing(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  if (values.size() != weights.size())
    throw SurvError(ErrorCode::DimensionMismatch, "pava values and weights must match in length");
  if ((weights.array() <= 0.0).any())
    throw SurvError(ErrorCode::InvalidArgument, "pava weights must be positive");

  struct Block {
    double weight, mean;
    Eigen::Index len;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    blocks.push_back({weights[j], values[j], 1});
    // Merge while the tail violates non-increasing order.  Strict comparison
    // leaves already-monotone input bit-identical.
    while (blocks.size() >= 2 && blocks[blocks.size() - 1].mean > blocks[blocks.size() - 2].mean) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.weight * prev.mean + top.weight * top.mean) / w;
      prev.weight = w;
      prev.len += top.len;
    }
  }
  Eigen::VectorXd out(values.size());
  Eigen::Index pos = 0;
  for (const Block& b : blocks)
    for (Eigen::Index r = 0; r < b.len; ++r) out[pos++] = b.mean;
  return out;
}

StepCurve isotonic_correct(const StepCurve& curve) {
  const Eigen::Index m = curve.n_jumps();
  if (m == 0) return curve;
  Eigen::VectorXd weights(m);
  for (Eigen::Index j = 0; j + 1 < m; ++j) weights[j] = curve.times[j + 1] - curve.times[j];
  weights[m - 1] = m >= 2 ? curve.times[m - 1] - curve.times[m - 2] : 1.0;
  StepCurve out = curve;
  out.values = pava_non_increasing(curve.values, weights);
  return out;
}

}  // namespace survadj
