#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "survadj/csv.hpp"
#include "survadj/errors.hpp"
#include "survadj/estimators.hpp"
#include "survadj/models.hpp"
#include "survadj/rng.hpp"
#include "survadj/simulation.hpp"

namespace {

using nlohmann::json;
using namespace survadj;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

struct CliError {
  int code;
  std::string message;
};

std::vector<MethodId> resolve_methods(const std::vector<std::string>& tokens) {
  for (const std::string& t : tokens)
    if (t == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<MethodId> methods;
  for (const std::string& t : tokens) {
    const std::optional<MethodId> m = parse_method(t);
    if (!m) throw CliError{kExitInput, "unknown method '" + t + "'"};
    methods.push_back(*m);
  }
  if (methods.empty()) throw CliError{kExitInput, "at least one method is required"};
  return methods;
}

std::vector<ScenarioId> resolve_scenarios(const std::vector<std::string>& tokens) {
  for (const std::string& t : tokens)
    if (t == "all") return {kAllScenarios.begin(), kAllScenarios.end()};
  std::vector<ScenarioId> scenarios;
  for (const std::string& t : tokens) {
    const std::optional<ScenarioId> s = parse_scenario(t);
    if (!s) throw CliError{kExitInput, "unknown scenario '" + t + "'"};
    scenarios.push_back(*s);
  }
  if (scenarios.empty()) throw CliError{kExitInput, "at least one scenario is required"};
  return scenarios;
}

PvLink resolve_pv_link(const std::string& token) {
  if (token == "identity") return PvLink::Identity;
  if (token == "cloglog") return PvLink::Cloglog;
  throw CliError{kExitInput, "unknown PV link '" + token + "' (use identity or cloglog)"};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CliError{kExitInput, "cannot open output file '" + path + "'"};
  return out;
}

// "dir/metrics.csv" -> "dir/metrics_aggregate.csv"
std::string derived_path(const std::string& path, const std::string& tag) {
  const size_t slash = path.find_last_of('/');
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + "_" + tag + ".csv";
  return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

int effective_threads(int requested) {
  if (const char* env = std::getenv("SURVADJ_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

CovariateSpec covariate_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli") return CovariateSpec::bernoulli(j.at("p").get<double>());
  if (kind == "normal")
    return CovariateSpec::normal(j.value("mean", 0.0), j.value("sd", 1.0));
  throw CliError{kExitInput, "unknown covariate kind '" + kind + "' (use bernoulli or normal)"};
}

void apply_dgp_json(const json& j, DGPConfig& dgp) {
  if (j.contains("covariates")) {
    const json& specs = j.at("covariates");
    if (!specs.is_array() || specs.size() != 6)
      throw CliError{kExitInput, "dgp.covariates must list exactly 6 specs"};
    for (size_t i = 0; i < 6; ++i) dgp.covariate_specs[i] = covariate_from_json(specs[i]);
  }
  if (j.contains("beta_outcome")) {
    const std::vector<double> b = j.at("beta_outcome").get<std::vector<double>>();
    dgp.beta_outcome = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  if (j.contains("beta_treatment")) {
    const std::vector<double> b = j.at("beta_treatment").get<std::vector<double>>();
    dgp.beta_treatment = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  if (j.contains("treatment_intercept")) dgp.treatment_intercept = j.at("treatment_intercept").get<double>();
  if (j.contains("event_weibull"))
    dgp.event_weibull = {j.at("event_weibull").value("lambda", 2.0),
                         j.at("event_weibull").value("gamma", 1.8)};
  if (j.contains("censor_weibull"))
    dgp.censor_weibull = {j.at("censor_weibull").value("lambda", 1.0),
                          j.at("censor_weibull").value("gamma", 2.0)};
  if (j.contains("superpop_size")) dgp.superpop_size = j.at("superpop_size").get<Eigen::Index>();
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kExitInput, "cannot open config file '" + path + "'"};
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CliError{kExitInput, std::string("config parse error: ") + e.what()};
  }
}

struct AdjustArgs {
  std::string input, output;
  std::vector<std::string> methods{"all"};
  std::vector<std::string> outcome_covs, treatment_covs;
  std::vector<std::string> grid{"events"};
  bool correct = false;
  double caliper = 0.0;
  bool caliper_set = false;
  std::string pv_link = "identity";
};

int cmd_adjust(const AdjustArgs& args) {
  SurvivalDataset data;
  std::vector<MethodId> methods;
  EstimateOptions opts;
  try {
    data = read_survival_csv_file(args.input);
    methods = resolve_methods(args.methods);
    opts.outcome_covs = args.outcome_covs.empty() ? data.covariate_names : args.outcome_covs;
    opts.treatment_covs = args.treatment_covs.empty() ? data.covariate_names : args.treatment_covs;
    covariate_indices(data, opts.outcome_covs);
    covariate_indices(data, opts.treatment_covs);
    if (!(args.grid.size() == 1 && args.grid[0] == "events")) {
      Eigen::VectorXd grid(static_cast<Eigen::Index>(args.grid.size()));
      for (size_t i = 0; i < args.grid.size(); ++i) {
        try {
          grid[static_cast<Eigen::Index>(i)] = std::stod(args.grid[i]);
        } catch (const std::exception&) {
          throw CliError{kExitInput, "grid entry '" + args.grid[i] + "' is not a number"};
        }
      }
      opts.grid = grid;
    }
    opts.apply_corrections = args.correct;
    if (args.caliper_set) opts.caliper_sd_fraction = args.caliper;
    opts.pv_link = resolve_pv_link(args.pv_link);
  } catch (const SurvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  // Diagnostic only: large inverse-probability weights flag poor overlap.
  const bool uses_weights = std::any_of(methods.begin(), methods.end(), [](MethodId m) {
    return m == MethodId::IPTW_KM || m == MethodId::IPTW_HZ || m == MethodId::IPTW_PV ||
           m == MethodId::AIPTW || m == MethodId::AIPTW_PV || m == MethodId::G_FORMULA_IPTW;
  });
  if (uses_weights) {
    try {
      const Eigen::VectorXd w = iptw_weights(fit_logistic(data, opts.treatment_covs), data);
      if (w.maxCoeff() > 100.0)
        std::cerr << "warning: extreme inverse-probability weights (max "
                  << format_double(w.maxCoeff()) << "); curves may be unstable\n";
    } catch (const SurvError&) {
      // the per-method run below reports the failure with its exit code
    }
  }

  std::vector<AdjustedCurves> results;
  EstimationCache cache;
  for (MethodId m : methods) {
    try {
      results.push_back(estimate(m, data, opts, cache));
    } catch (const SurvError& e) {
      std::cerr << "error: method " << method_name(m) << ": " << e.what() << "\n";
      return kExitEstimation;
    }
  }

  std::ofstream out = open_output(args.output);
  write_adjust_csv(out, results);

  // Area between the two counterfactual curves, up to the shorter curve's support.
  std::ofstream area = open_output(derived_path(args.output, "area"));
  area << "method,area_between_curves,horizon\n";
  for (const AdjustedCurves& result : results) {
    const double h0 = result.curve_z0.times.size() > 0 ? result.curve_z0.times[result.curve_z0.times.size() - 1] : 0.0;
    const double h1 = result.curve_z1.times.size() > 0 ? result.curve_z1.times[result.curve_z1.times.size() - 1] : 0.0;
    const double horizon = std::min(h0, h1);
    const std::array<StepCurve, 2> curves = {result.curve_z0, result.curve_z1};
    const StepCurve diff =
        pointwise_combine(curves, [](const Eigen::VectorXd& v) { return std::abs(v[0] - v[1]); });
    area << method_name(result.method) << "," << format_double(integrate_curve(diff, 0.0, horizon))
         << "," << format_double(horizon) << "\n";
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string output;
  std::string config_path;
  std::vector<std::string> methods{"all"};
  std::vector<std::string> scenarios{"co_ct"};
  std::vector<long long> sizes{500};
  int reps = 2;
  unsigned long long seed = 1;
  bool correct = false;
  double caliper = 0.0;
  bool caliper_set = false;
  std::string pv_link = "identity";
  // set via CLI11 count() checks: which flags were given explicitly
  bool methods_set = false, scenarios_set = false, sizes_set = false, reps_set = false;
  bool seed_set = false, correct_set = false, pv_link_set = false;
};

StudyConfig build_study_config(const SimulateArgs& args) {
  StudyConfig cfg;
  cfg.dgp = default_dgp();
  cfg.scenarios = {ScenarioId::CO_CT};
  cfg.methods = {kAllMethods.begin(), kAllMethods.end()};
  cfg.sample_sizes = {500};
  cfg.reps = 2;
  cfg.master_seed = 1;

  if (!args.config_path.empty()) {
    const json j = load_config(args.config_path);
    try {
      if (j.contains("dgp")) apply_dgp_json(j.at("dgp"), cfg.dgp);
      if (j.contains("methods")) cfg.methods = resolve_methods(j.at("methods").get<std::vector<std::string>>());
      if (j.contains("scenarios"))
        cfg.scenarios = resolve_scenarios(j.at("scenarios").get<std::vector<std::string>>());
      if (j.contains("sample_sizes")) {
        cfg.sample_sizes.clear();
        for (const auto& v : j.at("sample_sizes")) cfg.sample_sizes.push_back(v.get<Eigen::Index>());
      }
      if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
      if (j.contains("seed")) cfg.master_seed = j.at("seed").get<uint64_t>();
      if (j.contains("correct")) cfg.apply_corrections = j.at("correct").get<bool>();
      if (j.contains("caliper")) cfg.caliper_sd_fraction = j.at("caliper").get<double>();
      if (j.contains("pv_link")) cfg.pv_link = resolve_pv_link(j.at("pv_link").get<std::string>());
    } catch (const json::exception& e) {
      throw CliError{kExitInput, std::string("config error: ") + e.what()};
    }
  }

  if (args.methods_set) cfg.methods = resolve_methods(args.methods);
  if (args.scenarios_set) cfg.scenarios = resolve_scenarios(args.scenarios);
  if (args.sizes_set) {
    cfg.sample_sizes.clear();
    for (long long n : args.sizes) cfg.sample_sizes.push_back(static_cast<Eigen::Index>(n));
  }
  if (args.reps_set) cfg.reps = args.reps;
  if (args.seed_set) cfg.master_seed = args.seed;
  if (args.correct_set) cfg.apply_corrections = args.correct;
  if (args.caliper_set) cfg.caliper_sd_fraction = args.caliper;
  if (args.pv_link_set) cfg.pv_link = resolve_pv_link(args.pv_link);
  cfg.threads = effective_threads(0);
  return cfg;
}

int cmd_simulate(const SimulateArgs& args) {
  StudyResult result;
  try {
    result = run_study(build_study_config(args));
  } catch (const SurvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  std::ofstream metrics = open_output(args.output);
  write_metrics_csv(metrics, result.records);
  std::ofstream aggregate = open_output(derived_path(args.output, "aggregate"));
  write_aggregate_csv(aggregate, result.aggregates);
  std::ofstream oob = open_output(derived_path(args.output, "oob"));
  write_oob_profile_csv(oob, result.oob_profiles);
  return kExitOk;
}

struct TruthArgs {
  std::string output;
  std::string config_path;
  unsigned long long seed = 1;
};

int cmd_truth(const TruthArgs& args) {
  DGPConfig dgp = default_dgp();
  if (!args.config_path.empty()) {
    const json j = load_config(args.config_path);
    try {
      if (j.contains("dgp")) apply_dgp_json(j.at("dgp"), dgp);
    } catch (const json::exception& e) {
      throw CliError{kExitInput, std::string("config error: ") + e.what()};
    }
  }
  SuperPopulation sp;
  try {
    sp = generate_superpopulation(dgp, derive_seed(args.seed, {0}));
  } catch (const SurvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  std::ofstream out = open_output(args.output);
  write_truth_csv(out, sp.true_curve_z0, sp.true_curve_z1);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confounder-adjusted survival curves and a seeded simulation study engine"};
  app.require_subcommand(1);

  AdjustArgs adjust;
  CLI::App* adjust_cmd = app.add_subcommand("adjust", "Estimate adjusted curves from a CSV dataset");
  adjust_cmd->add_option("--input", adjust.input, "Input CSV: time,status,group,<covariates>")->required();
  adjust_cmd->add_option("--output", adjust.output, "Output curve CSV path")->required();
  adjust_cmd->add_option("--methods", adjust.methods, "Comma-separated methods or 'all'")->delimiter(',');
  adjust_cmd->add_option("--outcome-covs", adjust.outcome_covs, "Outcome-model covariates")->delimiter(',');
  adjust_cmd->add_option("--treatment-covs", adjust.treatment_covs, "Treatment-model covariates")
      ->delimiter(',');
  adjust_cmd->add_option("--grid", adjust.grid, "'events' or comma-separated evaluation times")
      ->delimiter(',');
  adjust_cmd->add_flag("--correct", adjust.correct, "Apply truncation and isotonic corrections");
  CLI::Option* adjust_caliper =
      adjust_cmd->add_option("--caliper", adjust.caliper, "Matching caliper as a fraction of sd(propensity)");
  adjust_cmd->add_option("--pv-link", adjust.pv_link, "Pseudo-value regression link: identity|cloglog");

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run a seeded Monte-Carlo study");
  sim_cmd->add_option("--output", sim.output, "Metrics CSV path (aggregate/OOB CSVs derived)")->required();
  sim_cmd->add_option("--config", sim.config_path, "JSON study configuration file");
  CLI::Option* sim_methods = sim_cmd->add_option("--methods", sim.methods, "Methods or 'all'")->delimiter(',');
  CLI::Option* sim_scen = sim_cmd->add_option("--scenarios", sim.scenarios, "Scenario ids or 'all'")->delimiter(',');
  CLI::Option* sim_sizes = sim_cmd->add_option("--n", sim.sizes, "Sample sizes")->delimiter(',');
  CLI::Option* sim_reps = sim_cmd->add_option("--reps", sim.reps, "Replications per (scenario, n)");
  CLI::Option* sim_seed = sim_cmd->add_option("--seed", sim.seed, "Master seed");
  CLI::Option* sim_correct = sim_cmd->add_flag("--correct", sim.correct, "Apply corrections before metrics");
  CLI::Option* sim_caliper =
      sim_cmd->add_option("--caliper", sim.caliper, "Matching caliper as a fraction of sd(propensity)");
  CLI::Option* sim_pv = sim_cmd->add_option("--pv-link", sim.pv_link, "identity|cloglog");

  TruthArgs truth;
  CLI::App* truth_cmd = app.add_subcommand("truth", "Write the true counterfactual curves");
  truth_cmd->add_option("--output", truth.output, "Truth CSV path")->required();
  truth_cmd->add_option("--config", truth.config_path, "JSON configuration with a dgp block");
  truth_cmd->add_option("--seed", truth.seed, "Master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (app.got_subcommand(adjust_cmd)) {
      adjust.caliper_set = adjust_caliper->count() > 0;
      return cmd_adjust(adjust);
    }
    if (app.got_subcommand(sim_cmd)) {
      sim.methods_set = sim_methods->count() > 0;
      sim.scenarios_set = sim_scen->count() > 0;
      sim.sizes_set = sim_sizes->count() > 0;
      sim.reps_set = sim_reps->count() > 0;
      sim.seed_set = sim_seed->count() > 0;
      sim.correct_set = sim_correct->count() > 0;
      sim.caliper_set = sim_caliper->count() > 0;
      sim.pv_link_set = sim_pv->count() > 0;
      return cmd_simulate(sim);
    }
    return cmd_truth(truth);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const SurvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
