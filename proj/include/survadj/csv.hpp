#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "survadj/dataset.hpp"
#include "survadj/estimators.hpp"
#include "survadj/simulation.hpp"

namespace survadj {

// Formats with 17 significant digits so values survive a write/read round trip.
std::string format_double(double value);

// Expects a header `time,status,group,<cov1>,<cov2>,...`. Unparsable or
// non-binary status/group entries and unparsable numerics are funneled into
// the dataset validator so one pass reports every violation with its row.
SurvivalDataset read_survival_csv(std::istream& in);
SurvivalDataset read_survival_csv_file(const std::string& path);

// `method,group,time,surv,nm_flag,oob_flag,corrected`; each curve starts with
// its time-zero row.
void write_adjust_csv(std::ostream& out, const std::vector<AdjustedCurves>& results);

// `method,scenario,n,rep,group,delta_bias,delta_mse,nm,oob,tau,failed`
void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& records);

// `method,scenario,n,group,g_bias,g_bias_mcse,g_mse,g_mse_mcse,nm_pct,oob_pct`
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

// `method,scenario,n,group,time,oob_fraction`
void write_oob_profile_csv(std::ostream& out, const std::vector<OobProfile>& profiles);

// `group,time,surv` for the two counterfactual truth curves.
void write_truth_csv(std::ostream& out, const StepCurve& curve_z0, const StepCurve& curve_z1);

}  // namespace survadj
