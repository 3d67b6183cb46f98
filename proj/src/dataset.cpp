#include "survadj/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace survadj {

namespace {

constexpr int kMaxListedViolations = 20;

struct ViolationLog {
  std::vector<std::pair<ErrorCode, std::string>> entries;
  int suppressed = 0;

  void add(ErrorCode code, const std::string& what) {
    if (static_cast<int>(entries.size()) < kMaxListedViolations)
      entries.emplace_back(code, what);
    else
      ++suppressed;
  }
};

bool is_binary(int v) { return v == 0 || v == 1; }

}  // namespace

SurvivalDataset validate_dataset(SurvivalDataset data) {
  ViolationLog log;
  const Eigen::Index n = data.time.size();

  if (n == 0) log.add(ErrorCode::InvalidArgument, "dataset has no rows");
  if (data.status.size() != n || data.group.size() != n ||
      (data.covariates.size() > 0 && data.covariates.rows() != n))
    log.add(ErrorCode::DimensionMismatch, "time, status, group and covariates disagree on row count");
  if (static_cast<Eigen::Index>(data.covariate_names.size()) != data.covariates.cols())
    log.add(ErrorCode::DimensionMismatch, "covariate_names does not match covariate column count");

  if (log.entries.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(data.time[i] > 0.0) || !std::isfinite(data.time[i]))
        log.add(ErrorCode::NonPositiveTime,
                "time must be positive and finite at row " + std::to_string(i + 1));
      if (!is_binary(data.status[i]))
        log.add(ErrorCode::NonBinaryStatus, "status must be 0 or 1 at row " + std::to_string(i + 1));
      if (!is_binary(data.group[i]))
        log.add(ErrorCode::NonBinaryGroup, "group must be 0 or 1 at row " + std::to_string(i + 1));
    }
    if (!data.covariates.allFinite()) {
      for (Eigen::Index i = 0; i < data.covariates.rows(); ++i)
        for (Eigen::Index j = 0; j < data.covariates.cols(); ++j)
          if (!std::isfinite(data.covariates(i, j)))
            log.add(ErrorCode::NonFiniteCovariate, "covariate " + data.covariate_names[j] +
                                                       " is not finite at row " + std::to_string(i + 1));
    }
    for (int z : {0, 1})
      if ((data.group.array() == z).count() == 0)
        log.add(ErrorCode::EmptyGroup, "no subjects with group=" + std::to_string(z));

    std::unordered_set<std::string> seen;
    for (const std::string& name : data.covariate_names) {
      if (name.empty()) log.add(ErrorCode::InvalidArgument, "empty covariate name");
      if (!seen.insert(name).second)
        log.add(ErrorCode::InvalidArgument, "duplicate covariate name " + name);
    }
  }

  if (!log.entries.empty()) {
    std::ostringstream msg;
    msg << "invalid dataset (" << log.entries.size() + log.suppressed << " violations)";
    for (const auto& [code, what] : log.entries) msg << "\n  " << error_code_name(code) << ": " << what;
    if (log.suppressed > 0) msg << "\n  ... and " << log.suppressed << " more";
    throw ValidationError(std::move(log.entries), msg.str());
  }
  return data;
}

SurvivalDataset validate_dataset(Eigen::VectorXd time, Eigen::VectorXi status, Eigen::VectorXi group,
                                 Eigen::MatrixXd covariates, std::vector<std::string> covariate_names) {
  SurvivalDataset data;
  data.time = std::move(time);
  data.status = std::move(status);
  data.group = std::move(group);
  data.covariates = std::move(covariates);
  data.covariate_names = std::move(covariate_names);
  if (data.covariates.size() == 0 && data.covariates.rows() != data.time.size())
    data.covariates.resize(data.time.size(), 0);
  return validate_dataset(std::move(data));
}

Eigen::Index covariate_index(const SurvivalDataset& data, const std::string& name) {
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(data.covariate_names.size()); ++j)
    if (data.covariate_names[j] == name) return j;
  throw SurvError(ErrorCode::MissingCovariateSet, "unknown covariate " + name);
}

std::vector<Eigen::Index> covariate_indices(const SurvivalDataset& data,
                                            const std::vector<std::string>& names) {
  std::vector<Eigen::Index> out;
  out.reserve(names.size());
  for (const std::string& name : names) out.push_back(covariate_index(data, name));
  return out;
}

std::vector<Eigen::Index> group_rows(const SurvivalDataset& data, int z) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (data.group[i] == z) rows.push_back(i);
  return rows;
}

SurvivalDataset select_rows(const SurvivalDataset& data, const std::vector<Eigen::Index>& rows) {
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  SurvivalDataset out;
  out.time.resize(m);
  out.status.resize(m);
  out.group.resize(m);
  out.covariates.resize(m, data.covariates.cols());
  out.covariate_names = data.covariate_names;
  for (Eigen::Index i = 0; i < m; ++i) {
    out.time[i] = data.time[rows[i]];
    out.status[i] = data.status[rows[i]];
    out.group[i] = data.group[rows[i]];
    out.covariates.row(i) = data.covariates.row(rows[i]);
  }
  return out;
}

std::vector<Eigen::Index> canonical_order(const SurvivalDataset& data) {
  std::vector<Eigen::Index> order(data.n());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (data.time[a] != data.time[b]) return data.time[a] < data.time[b];
    if (data.status[a] != data.status[b]) return data.status[a] < data.status[b];
    if (data.group[a] != data.group[b]) return data.group[a] < data.group[b];
    for (Eigen::Index j = 0; j < data.covariates.cols(); ++j)
      if (data.covariates(a, j) != data.covariates(b, j)) return data.covariates(a, j) < data.covariates(b, j);
    return false;
  });
  return order;
}

}  // namespace survadj
