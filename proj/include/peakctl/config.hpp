#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "peakctl/fbs.hpp"
#include "peakctl/inventory.hpp"
#include "peakctl/oracle.hpp"
#include "peakctl/queueing.hpp"

namespace peakctl {

// Raised for schema violations: unknown keys, wrong types, bad enum values.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Application { inventory, queue };

enum class RunKind { solve, sweep, pareto, oracle_compare, dn_compare };

struct SolverSettings {
  int n_steps = 2000;
  int max_iterations = 20000;
  double tolerance = 1e-6;
  double relaxation = 0.5;
  ControlInit u_init = ControlInit::midpoint;
  CostateTerminalMode costate_terminal_mode = CostateTerminalMode::proportional;
};

struct OracleSettings {
  int n_segments = 4;
  int n_levels = 9;
};

struct RunSettings {
  RunKind kind = RunKind::solve;
  std::vector<double> sweep_values;
  ParetoMode pareto_mode = ParetoMode::peak_vs_utilization;
  OracleSettings oracle;
  std::string output_dir = "out";
};

struct RunConfig {
  Application application = Application::inventory;
  InventoryParams inventory;
  QueueParams queue;
  SolverSettings solver;
  RunSettings run;
};

// Strict parse: unknown keys anywhere in the document are errors.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Full round-trippable echo, every effective value included.
nlohmann::json config_to_json(const RunConfig& c);

// Builds the sweep configuration for the configured horizon.
FbsConfig make_fbs_config(const RunConfig& c);

const char* to_string(Application a);
const char* to_string(RunKind k);
const char* to_string(ParetoMode k);
const char* to_string(ControlInit k);
const char* to_string(CostateTerminalMode k);
const char* to_string(SmoothingKind k);
const char* to_string(SignalSpec::Kind k);

}  // namespace peakctl
