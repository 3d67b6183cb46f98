#include "survadj/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "survadj/errors.hpp"

namespace survadj {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string trim(const std::string& s) {
  const size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Unparsable numerics become NaN so the dataset validator reports them by row.
double parse_double(const std::string& field) {
  const std::string t = trim(field);
  if (t.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::numeric_limits<double>::quiet_NaN();
  return value;
}

// Non-binary or unparsable indicator entries become the sentinel 2, which the
// dataset validator flags as a non-binary status/group violation.
int parse_indicator(const std::string& field) {
  const std::string t = trim(field);
  if (t == "0") return 0;
  if (t == "1") return 1;
  return 2;
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

SurvivalDataset read_survival_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw SurvError(ErrorCode::InvalidArgument, "empty input: expected a CSV header");
  std::vector<std::string> header = split_line(line);
  for (std::string& h : header) h = trim(h);
  if (header.size() < 3 || header[0] != "time" || header[1] != "status" || header[2] != "group")
    throw SurvError(ErrorCode::InvalidArgument,
                    "CSV header must start with time,status,group (got '" + line + "')");

  SurvivalDataset data;
  data.covariate_names.assign(header.begin() + 3, header.end());
  const size_t n_fields = header.size();

  std::vector<double> times;
  std::vector<int> statuses, groups;
  std::vector<double> covs;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != n_fields)
      throw SurvError(ErrorCode::InvalidArgument,
                      "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(n_fields));
    times.push_back(parse_double(fields[0]));
    statuses.push_back(parse_indicator(fields[1]));
    groups.push_back(parse_indicator(fields[2]));
    for (size_t j = 3; j < n_fields; ++j) covs.push_back(parse_double(fields[j]));
  }

  const auto n = static_cast<Eigen::Index>(times.size());
  const auto q = static_cast<Eigen::Index>(data.covariate_names.size());
  data.time = Eigen::Map<const Eigen::VectorXd>(times.data(), n);
  data.status = Eigen::Map<const Eigen::VectorXi>(statuses.data(), n);
  data.group = Eigen::Map<const Eigen::VectorXi>(groups.data(), n);
  data.covariates.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < q; ++j) data.covariates(i, j) = covs[static_cast<size_t>(i * q + j)];

  validate_dataset(data);
  return data;
}

SurvivalDataset read_survival_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SurvError(ErrorCode::InvalidArgument, "cannot open input file '" + path + "'");
  return read_survival_csv(in);
}

void write_adjust_csv(std::ostream& out, const std::vector<AdjustedCurves>& results) {
  out << "method,group,time,surv,nm_flag,oob_flag,corrected\n";
  for (const AdjustedCurves& result : results) {
    for (int z = 0; z < 2; ++z) {
      const StepCurve& curve = z == 0 ? result.curve_z0 : result.curve_z1;
      const bool nm = z == 0 ? result.nm_z0 : result.nm_z1;
      const bool oob = z == 0 ? result.oob_z0 : result.oob_z1;
      const std::string prefix = std::string(method_name(result.method)) + "," + std::to_string(z) + ",";
      const std::string suffix = std::string(",") + (nm ? "1" : "0") + "," + (oob ? "1" : "0") + "," +
                                 (result.corrected ? "1" : "0") + "\n";
      out << prefix << format_double(0.0) << "," << format_double(curve.initial_value) << suffix;
      for (Eigen::Index j = 0; j < curve.times.size(); ++j)
        out << prefix << format_double(curve.times[j]) << "," << format_double(curve.values[j]) << suffix;
    }
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
  out << "method,scenario,n,rep,group,delta_bias,delta_mse,nm,oob,tau,failed\n";
  for (const MetricRecord& rec : records) {
    out << method_name(rec.method) << "," << scenario_name(rec.scenario) << "," << rec.n << ","
        << rec.rep << "," << rec.group << "," << format_double(rec.delta_bias) << ","
        << format_double(rec.delta_mse) << "," << (rec.nm ? 1 : 0) << "," << (rec.oob ? 1 : 0) << ","
        << format_double(rec.tau) << "," << (rec.failed ? 1 : 0) << "\n";
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,scenario,n,group,g_bias,g_bias_mcse,g_mse,g_mse_mcse,nm_pct,oob_pct\n";
  for (const AggregateRow& row : rows) {
    out << method_name(row.method) << "," << scenario_name(row.scenario) << "," << row.n << ","
        << row.group << "," << format_double(row.g_bias) << "," << format_double(row.g_bias_mcse)
        << "," << format_double(row.g_mse) << "," << format_double(row.g_mse_mcse) << ","
        << format_double(row.nm_pct) << "," << format_double(row.oob_pct) << "\n";
  }
}

void write_oob_profile_csv(std::ostream& out, const std::vector<OobProfile>& profiles) {
  out << "method,scenario,n,group,time,oob_fraction\n";
  for (const OobProfile& profile : profiles) {
    const std::string prefix = std::string(method_name(profile.method)) + "," +
                               scenario_name(profile.scenario) + "," + std::to_string(profile.n) +
                               "," + std::to_string(profile.group) + ",";
    for (Eigen::Index p = 0; p < profile.times.size(); ++p)
      out << prefix << format_double(profile.times[p]) << "," << format_double(profile.fraction[p])
          << "\n";
  }
}

void write_truth_csv(std::ostream& out, const StepCurve& curve_z0, const StepCurve& curve_z1) {
  out << "group,time,surv\n";
  for (int z = 0; z < 2; ++z) {
    const StepCurve& curve = z == 0 ? curve_z0 : curve_z1;
    out << z << "," << format_double(0.0) << "," << format_double(curve.initial_value) << "\n";
    for (Eigen::Index j = 0; j < curve.times.size(); ++j)
      out << z << "," << format_double(curve.times[j]) << "," << format_double(curve.values[j]) << "\n";
  }
}

}  // namespace survadj
