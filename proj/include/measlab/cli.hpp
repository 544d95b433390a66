// Command-line front end: `measlab <command> <scenario.json> [flags]`.
//
// Exit codes: 0 success, 2 malformed scenario / bad arguments / failed
// validation, 1 internal error.
#pragma once

#include "measlab/metrics.hpp"
#include "measlab/model.hpp"
#include "measlab/nogo.hpp"
#include "measlab/optimizer.hpp"
#include "measlab/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace measlab {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInvalid = 2 };

struct CommandOptions {
  std::string scenario;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> restarts;
  std::optional<Eigen::Index> grid;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::vector<Eigen::Index> dims;
  std::string out;
  std::string csv;
};

namespace cli_detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

inline void apply_overrides(Scenario& s, const CommandOptions& o) {
  if (o.grid) s.grid = *o.grid;
  if (o.tol) s.exactness_tol = *o.tol;
  if (o.seed) s.seed = *o.seed;
  s.optimizer.grid = s.grid;
  s.optimizer.seed = s.seed;
  if (o.budget) s.optimizer.budget = *o.budget;
  if (o.restarts) s.optimizer.restarts = *o.restarts;
  if (o.method) s.optimizer.method = *o.method == "fd_gradient" ? SearchMethod::FdGradient : SearchMethod::NelderMead;
}

inline Json header(const std::string& command, const Scenario& s, const ValidationReport& v) {
  return Json{{"tool", "measlab"},
              {"version", kToolVersion},
              {"command", command},
              {"scenario", s.name},
              {"validation", to_json(v)}};
}

inline bool non_increasing(const std::vector<ScanRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].floor > rows[i - 1].floor) return false;
  }
  return true;
}

inline int execute(const std::string& command, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Scenario s;
  try {
    s = load_scenario(opt.scenario);
  } catch (const ScenarioError& e) {
    err << "measlab: malformed scenario " << opt.scenario << ": " << e.what() << '\n';
    return kExitInvalid;
  }
  apply_overrides(s, opt);

  const ValidationReport validation = validate_model(s.model);
  Json report = header(command, s, validation);
  std::string csv;
  int status = kExitOk;

  if (!validation.ok()) {
    status = kExitInvalid;
    for (const auto& v : validation.violations) err << "measlab: validation: " << v << '\n';
  } else if (command == "metrics") {
    report["errors"] = to_json(error_report(s.model, s.grid));
  } else if (command == "nogo") {
    report["certificate"] = to_json(contradiction_certificate(s.model, s.exactness_tol, s.grid));
    if (s.sweep_models) {
      Json sweep = to_json(exactness_sweep(s.model, *s.sweep_models, s.seed, s.exactness_tol, s.grid));
      sweep["seed"] = s.seed;
      sweep["tolerance"] = s.exactness_tol;
      report["sweep"] = sweep;
    }
  } else if (command == "optimize") {
    const OptimizationResult r = optimize_hamiltonian(s.model, s.optimizer);
    const HamiltonianParameterization param(s.model.composite_dim());
    Json opt_json = to_json(r);
    opt_json["method"] = to_string(s.optimizer.method);
    opt_json["budget"] = s.optimizer.budget;
    opt_json["best_errors"] = to_json(error_report(s.model.with_hamiltonian(param.decode(r.best_params)), s.grid));
    report["optimization"] = opt_json;
  } else if (command == "scan") {
    std::vector<Eigen::Index> dims = opt.dims;
    if (dims.empty()) dims.push_back(s.model.dim_M);
    if (!std::is_sorted(dims.begin(), dims.end())) {
      err << "measlab: --dims must be ascending\n";
      return kExitInvalid;
    }
    const Eigen::Index needed = static_cast<Eigen::Index>(s.model.observable_A.outcome_labels().size()) + 1;
    if (dims.front() < needed) {
      err << "measlab: --dims entries must be at least " << needed << '\n';
      return kExitInvalid;
    }
    const std::vector<ScanRow> rows = dimension_scan(s.model.observable_A, dims, s.optimizer, s.model.t_end);
    Json table = Json::array();
    bool positive = true;
    for (const auto& r : rows) {
      table.push_back(to_json(r));
      positive = positive && r.floor > 0.0;
    }
    report["scan"] = Json{{"method", to_string(s.optimizer.method)},
                          {"rows", table},
                          {"all_positive", positive},
                          {"non_increasing", non_increasing(rows)}};
    csv = scan_csv(rows);
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report["wall_time_s"] = seconds;
  const std::string body = dump_report(report);

  if (opt.out.empty()) {
    out << body;
  } else {
    write_text(opt.out, body);
  }
  if (!csv.empty()) {
    std::string csv_path = opt.csv;
    if (csv_path.empty() && !opt.out.empty()) {
      csv_path = std::filesystem::path(opt.out).replace_extension(".csv").string();
    }
    if (!csv_path.empty()) write_text(csv_path, csv);
  }
  return status;
}

}  // namespace cli_detail

/// Runs one invocation; `args` includes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"measlab: finite-dimensional measurement-model laboratory", "measlab"};
  app.require_subcommand(1);
  CommandOptions opt;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"validate", "Check a scenario's model and report violations"},
      {"metrics", "Measurement, preparation and persistence errors"},
      {"nogo", "Contradiction certificate (and optional random-model sweep)"},
      {"optimize", "Search Hamiltonians for the smallest combined error"},
      {"scan", "Error floor versus apparatus dimension"}};

  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("scenario", opt.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", opt.out, "Write the JSON report here instead of stdout");
    sub->add_option("--grid", opt.grid, "Persistence grid points")->check(CLI::Range(2, 1 << 20));
    sub->add_option("--tol", opt.tol, "Exactness tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Random seed");
    if (name == "optimize" || name == "scan") {
      sub->add_option("--budget", opt.budget, "Objective evaluations per restart")->check(CLI::PositiveNumber);
      sub->add_option("--restarts", opt.restarts, "Independent restarts")->check(CLI::PositiveNumber);
      sub->add_option("--method", opt.method, "nelder_mead or fd_gradient")
          ->check(CLI::IsMember({"nelder_mead", "fd_gradient"}));
    }
    if (name == "scan") {
      sub->add_option("--dims", opt.dims, "Apparatus dimensions, ascending")->delimiter(',');
      sub->add_option("--csv", opt.csv, "CSV sidecar path (default: --out with .csv extension)");
    }
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "measlab: " << e.what() << '\n';
    return kExitInvalid;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return cli_detail::execute(command, opt, out, err);
  } catch (const std::exception& e) {
    err << "measlab: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace measlab
