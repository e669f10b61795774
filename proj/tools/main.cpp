#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "peakctl/config.hpp"
#include "peakctl/oracle.hpp"
#include "peakctl/report.hpp"

namespace {

using namespace peakctl;

struct CliOptions {
  std::string config_path;
  std::string out_override;
  int threads = 0;
  int seed = 0;  // reserved; every computation is deterministic
};

void add_common(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--config", opt.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", opt.out_override, "output directory (overrides run.output_dir)");
  sub->add_option("--threads", opt.threads, "worker threads for sweeps, 0 = all cores");
  sub->add_option("--seed", opt.seed, "reserved, accepted for interface stability");
}

RunConfig load_effective(const CliOptions& opt, RunKind kind) {
  RunConfig c = load_config(opt.config_path);
  c.run.kind = kind;
  if (!opt.out_override.empty()) c.run.output_dir = opt.out_override;
  return c;
}

nlohmann::json base_summary(const RunConfig& c) {
  nlohmann::json j;
  j["effective_config"] = config_to_json(c);
  nlohmann::json warnings = nlohmann::json::array();
  const SmoothingSpec& s = c.application == Application::inventory ? c.inventory.smoothing
                                                                   : c.queue.smoothing;
  if (auto w = s.config_warning()) warnings.push_back(*w);
  j["warnings"] = warnings;
  return j;
}

int run_solve(const CliOptions& opt) {
  RunConfig c = load_effective(opt, RunKind::solve);
  const FbsConfig fbs = make_fbs_config(c);
  ensure_directory(c.run.output_dir);
  nlohmann::json summary = base_summary(c);

  if (c.application == Application::inventory) {
    InventoryCaseResult r = solve_case(c.inventory, fbs);
    write_trajectory_csv(c.run.output_dir + "/trajectory.csv", r.sol, &r.price);
    summary["objective"] = breakdown_to_json(r.sol.breakdown);
    summary["revenue"] = r.revenue;
    summary["peak"] = r.peak;
    summary["diagnostics"] = solution_diagnostics(r.sol);
    summary["structural_checks"] = checks_to_json(r.checks);
    std::cerr << "solve: " << (r.sol.converged ? "converged" : "not converged") << " after "
              << r.sol.iterations << " sweeps, revenue " << r.revenue << ", peak " << r.peak
              << "\n";
  } else {
    QueueCaseResult r = solve_queue(c.queue, fbs);
    write_trajectory_csv(c.run.output_dir + "/trajectory.csv", r.sol);
    summary["objective"] = breakdown_to_json(r.sol.breakdown);
    summary["peak"] = r.peak;
    summary["integral_congestion"] = r.integral_g;
    summary["integral_utilization"] = r.integral_h;
    summary["state_above_neg_alpha"] = r.state_above_neg_alpha;
    summary["diagnostics"] = solution_diagnostics(r.sol);
    std::cerr << "solve: " << (r.sol.converged ? "converged" : "not converged") << " after "
              << r.sol.iterations << " sweeps, peak " << r.peak << "\n";
  }
  write_json(c.run.output_dir + "/summary.json", summary);
  return 0;
}

int run_sweep(const CliOptions& opt) {
  RunConfig c = load_effective(opt, RunKind::sweep);
  if (c.application != Application::inventory) {
    throw ConfigError("run.kind 'sweep' requires the inventory application");
  }
  if (c.run.sweep_values.empty()) {
    throw ConfigError("run.sweep_values must list at least one sigma");
  }
  const FbsConfig fbs = make_fbs_config(c);
  ensure_directory(c.run.output_dir);
  std::vector<SigmaRow> rows = sweep_sigma(c.inventory, c.run.sweep_values, fbs, opt.threads);
  write_sigma_frontier_csv(c.run.output_dir + "/frontier.csv", rows);

  nlohmann::json summary = base_summary(c);
  nlohmann::json jr = nlohmann::json::array();
  for (const SigmaRow& r : rows) {
    jr.push_back({{"sigma", r.sigma},
                  {"revenue", r.revenue},
                  {"peak", r.peak},
                  {"converged", r.converged},
                  {"iterations", r.iterations}});
  }
  summary["rows"] = jr;
  write_json(c.run.output_dir + "/summary.json", summary);
  std::cerr << "sweep: " << rows.size() << " sigma values\n";
  return 0;
}

int run_pareto(const CliOptions& opt) {
  RunConfig c = load_effective(opt, RunKind::pareto);
  if (c.application != Application::queue) {
    throw ConfigError("run.kind 'pareto' requires the queue application");
  }
  if (c.run.sweep_values.empty()) {
    throw ConfigError("run.sweep_values must list at least one weight");
  }
  const FbsConfig fbs = make_fbs_config(c);
  ensure_directory(c.run.output_dir);
  std::vector<ParetoRow> rows =
      pareto_sweep(c.queue, c.run.pareto_mode, c.run.sweep_values, fbs, opt.threads);
  write_pareto_frontier_csv(c.run.output_dir + "/frontier.csv", rows);

  nlohmann::json summary = base_summary(c);
  nlohmann::json jr = nlohmann::json::array();
  for (const ParetoRow& r : rows) {
    jr.push_back({{"weight", r.weight},
                  {"peak", r.peak},
                  {"integral_congestion", r.integral_g},
                  {"integral_utilization", r.integral_h},
                  {"converged", r.converged},
                  {"iterations", r.iterations}});
  }
  summary["rows"] = jr;
  write_json(c.run.output_dir + "/summary.json", summary);
  std::cerr << "pareto: " << rows.size() << " weights (" << to_string(c.run.pareto_mode)
            << ")\n";
  return 0;
}

int run_oracle_compare(const CliOptions& opt) {
  RunConfig c = load_effective(opt, RunKind::oracle_compare);
  const FbsConfig fbs = make_fbs_config(c);
  ensure_directory(c.run.output_dir);

  CombinedProblem p = c.application == Application::inventory ? build_problem(c.inventory)
                                                              : build_problem(c.queue);
  OracleConfig oc;
  oc.n_segments = c.run.oracle.n_segments;
  oc.n_levels = c.run.oracle.n_levels;
  oc.eval_grid = fbs.grid;
  OracleResult oracle = brute_force(p, oc);

  FbsSolution sol;
  std::optional<Trajectory> price;
  if (c.application == Application::inventory) {
    InventoryCaseResult r = solve_case(c.inventory, fbs);
    sol = std::move(r.sol);
    price = std::move(r.price);
  } else {
    sol = std::move(solve_queue(c.queue, fbs).sol);
  }
  Trajectory projected = project_to_segments(sol.control, oc.n_segments);
  ObjectiveBreakdown projected_bd = evaluate(p, fbs.grid, projected).breakdown;

  write_trajectory_csv(c.run.output_dir + "/trajectory.csv", sol, price ? &*price : nullptr);
  nlohmann::json summary = base_summary(c);
  nlohmann::json top = nlohmann::json::array();
  for (const OracleCandidate& cand : oracle.top) {
    top.push_back({{"levels", cand.levels},
                   {"level_index", cand.level_index},
                   {"objective", breakdown_to_json(cand.breakdown)}});
  }
  summary["oracle"] = {{"n_segments", oc.n_segments},
                       {"n_levels", oc.n_levels},
                       {"n_evaluated", oracle.n_evaluated},
                       {"best", top.front()},
                       {"top", top}};
  summary["fbs"] = {{"objective", breakdown_to_json(sol.breakdown)},
                    {"diagnostics", solution_diagnostics(sol)}};
  summary["fbs_projected"] = breakdown_to_json(projected_bd);
  summary["fbs_minus_oracle"] = sol.breakdown.total_smoothed - oracle.best.breakdown.total_smoothed;
  summary["projected_minus_oracle"] =
      projected_bd.total_smoothed - oracle.best.breakdown.total_smoothed;
  write_json(c.run.output_dir + "/summary.json", summary);
  std::cerr << "oracle-compare: " << oracle.n_evaluated << " candidates, best "
            << oracle.best.breakdown.total_smoothed << ", fbs " << sol.breakdown.total_smoothed
            << "\n";
  return 0;
}

int run_dn_compare(const CliOptions& opt) {
  RunConfig c = load_effective(opt, RunKind::dn_compare);
  if (c.application != Application::inventory) {
    throw ConfigError("run.kind 'dn-compare' requires the inventory application");
  }
  const FbsConfig fbs = make_fbs_config(c);
  ensure_directory(c.run.output_dir);

  InventoryCaseResult smooth = solve_case(c.inventory, fbs);
  InventoryCaseResult dn = solve_case_dn(c.inventory, fbs);
  write_trajectory_csv(c.run.output_dir + "/trajectory.csv", smooth.sol, &smooth.price);
  write_trajectory_csv(c.run.output_dir + "/trajectory_dn.csv", dn.sol, &dn.price);

  nlohmann::json summary = base_summary(c);
  summary["smooth"] = {{"objective", breakdown_to_json(smooth.sol.breakdown)},
                       {"revenue", smooth.revenue},
                       {"peak", smooth.peak},
                       {"diagnostics", solution_diagnostics(smooth.sol)}};
  summary["dn"] = {{"objective", breakdown_to_json(dn.sol.breakdown)},
                   {"revenue", dn.revenue},
                   {"peak", dn.peak},
                   {"diagnostics", solution_diagnostics(dn.sol)}};
  summary["peak_difference"] = smooth.peak - dn.peak;
  summary["revenue_difference"] = smooth.revenue - dn.revenue;
  write_json(c.run.output_dir + "/summary.json", summary);
  std::cerr << "dn-compare: smooth peak " << smooth.peak << ", dn peak " << dn.peak << "\n";
  return 0;
}

int run_print_defaults(const std::string& application) {
  RunConfig c;
  if (application == "inventory") {
    c.application = Application::inventory;
  } else if (application == "queue") {
    c.application = Application::queue;
  } else {
    throw ConfigError("--application must be 'inventory' or 'queue'");
  }
  std::cout << config_to_json(c).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon optimal control with a running-peak penalty"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* solve_cmd = app.add_subcommand("solve", "single forward-backward solve");
  add_common(solve_cmd, opt);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "inventory frontier over sigma values");
  add_common(sweep_cmd, opt);
  CLI::App* pareto_cmd = app.add_subcommand("pareto", "queue trade-off frontier");
  add_common(pareto_cmd, opt);
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle-compare", "solver versus exhaustive piecewise-constant search");
  add_common(oracle_cmd, opt);
  CLI::App* dn_cmd =
      app.add_subcommand("dn-compare", "smoothed versus raw-indicator peak tracking");
  add_common(dn_cmd, opt);
  std::string application = "inventory";
  CLI::App* defaults_cmd = app.add_subcommand("print-defaults", "emit the default configuration");
  defaults_cmd->add_option("--application", application, "inventory or queue");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run_solve(opt);
    if (sweep_cmd->parsed()) return run_sweep(opt);
    if (pareto_cmd->parsed()) return run_pareto(opt);
    if (oracle_cmd->parsed()) return run_oracle_compare(opt);
    if (dn_cmd->parsed()) return run_dn_compare(opt);
    if (defaults_cmd->parsed()) return run_print_defaults(application);
  } catch (const NonFiniteStateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
