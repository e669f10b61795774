#include "peakctl/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

namespace peakctl {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ConfigError(context + ": " + what);
}

void require_object(const json& j, const std::string& context) {
  if (!j.is_object()) fail(context, "expected an object");
}

// Strictness gate: every key present must be in the allowed list.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  require_object(j, context);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(context, "unknown key '" + it.key() + "'");
  }
}

double get_number(const json& j, const char* key, double fallback, const std::string& context) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(context + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, int fallback, const std::string& context) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(context + "." + key, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback,
                       const std::string& context) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(context + "." + key, "expected a string");
  return v.get<std::string>();
}

SignalSpec::Kind parse_signal_kind(const std::string& s, const std::string& context) {
  if (s == "constant") return SignalSpec::Kind::constant;
  if (s == "sinusoid") return SignalSpec::Kind::sinusoid;
  if (s == "abs_cosine") return SignalSpec::Kind::abs_cosine;
  fail(context, "unknown signal kind '" + s + "'");
}

SignalSpec parse_signal(const json& j, SignalSpec fallback, const std::string& context) {
  if (j.is_number()) {
    // Shorthand: a bare number means a constant signal.
    return SignalSpec{SignalSpec::Kind::constant, j.get<double>(), 0.0, 0.0, 0.0};
  }
  check_keys(j, {"kind", "base", "amplitude", "phase", "angular_rate"}, context);
  SignalSpec out = fallback;
  out.kind = parse_signal_kind(get_string(j, "kind", to_string(fallback.kind), context), context);
  out.base = get_number(j, "base", fallback.base, context);
  out.amplitude = get_number(j, "amplitude", fallback.amplitude, context);
  out.phase = get_number(j, "phase", fallback.phase, context);
  out.angular_rate = get_number(j, "angular_rate", fallback.angular_rate, context);
  return out;
}

SmoothingSpec parse_smoothing(const json& j, SmoothingSpec fallback, const std::string& context) {
  check_keys(j, {"kind", "delta", "gamma"}, context);
  SmoothingSpec out = fallback;
  const std::string kind = get_string(j, "kind", to_string(fallback.kind), context);
  if (kind == "linear") {
    out.kind = SmoothingKind::linear;
  } else if (kind == "gaussian_band") {
    out.kind = SmoothingKind::gaussian_band;
  } else {
    fail(context + ".kind", "unknown smoothing kind '" + kind + "'");
  }
  out.delta = get_number(j, "delta", fallback.delta, context);
  out.gamma = get_number(j, "gamma", fallback.gamma, context);
  return out;
}

void parse_optional_y0(const json& j, std::optional<double>& y0, const std::string& context) {
  if (!j.contains("y0")) return;
  const json& v = j.at("y0");
  if (v.is_null()) {
    y0.reset();
    return;
  }
  if (!v.is_number()) fail(context + ".y0", "expected a number or null");
  y0 = v.get<double>();
}

InventoryParams parse_inventory(const json& j) {
  const std::string ctx = "params";
  check_keys(j,
             {"alpha", "beta", "a", "C_h", "C_s", "C_h_T", "C_s_T", "sigma", "T", "x0", "y0",
              "smoothing"},
             ctx);
  InventoryParams p;
  if (j.contains("alpha")) p.alpha = parse_signal(j.at("alpha"), p.alpha, ctx + ".alpha");
  if (j.contains("beta")) p.beta = parse_signal(j.at("beta"), p.beta, ctx + ".beta");
  p.a = get_number(j, "a", p.a, ctx);
  p.C_h = get_number(j, "C_h", p.C_h, ctx);
  p.C_s = get_number(j, "C_s", p.C_s, ctx);
  p.C_h_T = get_number(j, "C_h_T", p.C_h_T, ctx);
  p.C_s_T = get_number(j, "C_s_T", p.C_s_T, ctx);
  p.sigma = get_number(j, "sigma", p.sigma, ctx);
  p.T = get_number(j, "T", p.T, ctx);
  p.x0 = get_number(j, "x0", p.x0, ctx);
  parse_optional_y0(j, p.y0, ctx);
  if (j.contains("smoothing")) {
    p.smoothing = parse_smoothing(j.at("smoothing"), p.smoothing, ctx + ".smoothing");
  }
  return p;
}

QueueParams parse_queue(const json& j) {
  const std::string ctx = "params";
  check_keys(j, {"alpha", "rho", "sigma", "beta", "eta", "mu_id", "u_bar", "T", "x0", "y0",
                 "smoothing"},
             ctx);
  QueueParams p;
  if (j.contains("alpha")) p.alpha = parse_signal(j.at("alpha"), p.alpha, ctx + ".alpha");
  p.rho = get_number(j, "rho", p.rho, ctx);
  p.sigma = get_number(j, "sigma", p.sigma, ctx);
  p.beta = get_number(j, "beta", p.beta, ctx);
  p.eta = get_number(j, "eta", p.eta, ctx);
  p.mu_id = get_number(j, "mu_id", p.mu_id, ctx);
  p.u_bar = get_number(j, "u_bar", p.u_bar, ctx);
  p.T = get_number(j, "T", p.T, ctx);
  p.x0 = get_number(j, "x0", p.x0, ctx);
  parse_optional_y0(j, p.y0, ctx);
  if (j.contains("smoothing")) {
    p.smoothing = parse_smoothing(j.at("smoothing"), p.smoothing, ctx + ".smoothing");
  }
  return p;
}

SolverSettings parse_solver(const json& j) {
  const std::string ctx = "solver";
  check_keys(j, {"n_steps", "max_iterations", "tolerance", "relaxation", "u_init",
                 "costate_terminal_mode"},
             ctx);
  SolverSettings s;
  s.n_steps = get_int(j, "n_steps", s.n_steps, ctx);
  s.max_iterations = get_int(j, "max_iterations", s.max_iterations, ctx);
  s.tolerance = get_number(j, "tolerance", s.tolerance, ctx);
  s.relaxation = get_number(j, "relaxation", s.relaxation, ctx);
  const std::string init = get_string(j, "u_init", to_string(s.u_init), ctx);
  if (init == "midpoint") {
    s.u_init = ControlInit::midpoint;
  } else if (init == "zero") {
    s.u_init = ControlInit::zero;
  } else {
    fail(ctx + ".u_init", "unknown value '" + init + "'");
  }
  const std::string mode =
      get_string(j, "costate_terminal_mode", to_string(s.costate_terminal_mode), ctx);
  if (mode == "proportional") {
    s.costate_terminal_mode = CostateTerminalMode::proportional;
  } else if (mode == "gradient_consistent") {
    s.costate_terminal_mode = CostateTerminalMode::gradient_consistent;
  } else {
    fail(ctx + ".costate_terminal_mode", "unknown value '" + mode + "'");
  }
  return s;
}

RunSettings parse_run(const json& j) {
  const std::string ctx = "run";
  check_keys(j, {"kind", "sweep_values", "pareto_mode", "oracle", "output_dir"}, ctx);
  RunSettings r;
  const std::string kind = get_string(j, "kind", to_string(r.kind), ctx);
  if (kind == "solve") {
    r.kind = RunKind::solve;
  } else if (kind == "sweep") {
    r.kind = RunKind::sweep;
  } else if (kind == "pareto") {
    r.kind = RunKind::pareto;
  } else if (kind == "oracle-compare") {
    r.kind = RunKind::oracle_compare;
  } else if (kind == "dn-compare") {
    r.kind = RunKind::dn_compare;
  } else {
    fail(ctx + ".kind", "unknown value '" + kind + "'");
  }
  if (j.contains("sweep_values")) {
    const json& v = j.at("sweep_values");
    if (!v.is_array()) fail(ctx + ".sweep_values", "expected an array of numbers");
    for (const json& e : v) {
      if (!e.is_number()) fail(ctx + ".sweep_values", "expected an array of numbers");
      r.sweep_values.push_back(e.get<double>());
    }
  }
  const std::string mode = get_string(j, "pareto_mode", to_string(r.pareto_mode), ctx);
  if (mode == "peak_vs_utilization") {
    r.pareto_mode = ParetoMode::peak_vs_utilization;
  } else if (mode == "congestion_vs_utilization") {
    r.pareto_mode = ParetoMode::congestion_vs_utilization;
  } else {
    fail(ctx + ".pareto_mode", "unknown value '" + mode + "'");
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    check_keys(o, {"n_segments", "n_levels"}, ctx + ".oracle");
    r.oracle.n_segments = get_int(o, "n_segments", r.oracle.n_segments, ctx + ".oracle");
    r.oracle.n_levels = get_int(o, "n_levels", r.oracle.n_levels, ctx + ".oracle");
  }
  r.output_dir = get_string(j, "output_dir", r.output_dir, ctx);
  return r;
}

json signal_to_json(const SignalSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"base", s.base},
              {"amplitude", s.amplitude},
              {"phase", s.phase},
              {"angular_rate", s.angular_rate}};
}

json smoothing_to_json(const SmoothingSpec& s) {
  return json{{"kind", to_string(s.kind)}, {"delta", s.delta}, {"gamma", s.gamma}};
}

}  // namespace

RunConfig parse_config(const json& j) {
  check_keys(j, {"application", "params", "solver", "run"}, "config");
  if (!j.contains("application")) fail("config", "missing required key 'application'");
  const std::string app = get_string(j, "application", "", "config");
  RunConfig c;
  if (app == "inventory") {
    c.application = Application::inventory;
  } else if (app == "queue") {
    c.application = Application::queue;
  } else {
    fail("config.application", "unknown value '" + app + "'");
  }
  if (j.contains("params")) {
    if (c.application == Application::inventory) {
      c.inventory = parse_inventory(j.at("params"));
    } else {
      c.queue = parse_queue(j.at("params"));
    }
  }
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  if (j.contains("run")) c.run = parse_run(j.at("run"));

  if (c.solver.n_steps < 1) fail("solver.n_steps", "must be at least 1");
  if (c.solver.max_iterations < 1) fail("solver.max_iterations", "must be at least 1");
  if (!(c.solver.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
  if (!(c.solver.relaxation > 0.0 && c.solver.relaxation <= 1.0)) {
    fail("solver.relaxation", "must lie in (0, 1]");
  }
  try {
    if (c.application == Application::inventory) {
      c.inventory.validate();
    } else {
      c.queue.validate();
    }
  } catch (const std::invalid_argument& e) {
    fail("params", e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const RunConfig& c) {
  json params;
  if (c.application == Application::inventory) {
    const InventoryParams& p = c.inventory;
    params = json{{"alpha", signal_to_json(p.alpha)},
                  {"beta", signal_to_json(p.beta)},
                  {"a", p.a},
                  {"C_h", p.C_h},
                  {"C_s", p.C_s},
                  {"C_h_T", p.C_h_T},
                  {"C_s_T", p.C_s_T},
                  {"sigma", p.sigma},
                  {"T", p.T},
                  {"x0", p.x0},
                  {"y0", p.y0 ? json(*p.y0) : json(nullptr)},
                  {"smoothing", smoothing_to_json(p.smoothing)}};
  } else {
    const QueueParams& p = c.queue;
    params = json{{"alpha", signal_to_json(p.alpha)},
                  {"rho", p.rho},
                  {"sigma", p.sigma},
                  {"beta", p.beta},
                  {"eta", p.eta},
                  {"mu_id", p.mu_id},
                  {"u_bar", p.u_bar},
                  {"T", p.T},
                  {"x0", p.x0},
                  {"y0", p.y0 ? json(*p.y0) : json(nullptr)},
                  {"smoothing", smoothing_to_json(p.smoothing)}};
  }
  json solver{{"n_steps", c.solver.n_steps},
              {"max_iterations", c.solver.max_iterations},
              {"tolerance", c.solver.tolerance},
              {"relaxation", c.solver.relaxation},
              {"u_init", to_string(c.solver.u_init)},
              {"costate_terminal_mode", to_string(c.solver.costate_terminal_mode)}};
  json run{{"kind", to_string(c.run.kind)},
           {"sweep_values", c.run.sweep_values},
           {"pareto_mode", to_string(c.run.pareto_mode)},
           {"oracle", json{{"n_segments", c.run.oracle.n_segments},
                           {"n_levels", c.run.oracle.n_levels}}},
           {"output_dir", c.run.output_dir}};
  return json{{"application", to_string(c.application)},
              {"params", params},
              {"solver", solver},
              {"run", run}};
}

FbsConfig make_fbs_config(const RunConfig& c) {
  const double horizon = c.application == Application::inventory ? c.inventory.T : c.queue.T;
  FbsConfig f;
  f.grid = make_grid(0.0, horizon, c.solver.n_steps);
  f.max_iterations = c.solver.max_iterations;
  f.tolerance = c.solver.tolerance;
  f.relaxation = c.solver.relaxation;
  f.u_init = c.solver.u_init;
  f.costate_terminal_mode = c.solver.costate_terminal_mode;
  return f;
}

const char* to_string(Application a) {
  return a == Application::inventory ? "inventory" : "queue";
}

const char* to_string(RunKind k) {
  switch (k) {
    case RunKind::solve: return "solve";
    case RunKind::sweep: return "sweep";
    case RunKind::pareto: return "pareto";
    case RunKind::oracle_compare: return "oracle-compare";
    case RunKind::dn_compare: return "dn-compare";
  }
  return "solve";
}

const char* to_string(ParetoMode k) {
  return k == ParetoMode::peak_vs_utilization ? "peak_vs_utilization"
                                              : "congestion_vs_utilization";
}

const char* to_string(ControlInit k) {
  switch (k) {
    case ControlInit::midpoint: return "midpoint";
    case ControlInit::zero: return "zero";
    case ControlInit::given: return "given";
  }
  return "midpoint";
}

const char* to_string(CostateTerminalMode k) {
  return k == CostateTerminalMode::proportional ? "proportional" : "gradient_consistent";
}

const char* to_string(SmoothingKind k) {
  return k == SmoothingKind::linear ? "linear" : "gaussian_band";
}

const char* to_string(SignalSpec::Kind k) {
  switch (k) {
    case SignalSpec::Kind::constant: return "constant";
    case SignalSpec::Kind::sinusoid: return "sinusoid";
    case SignalSpec::Kind::abs_cosine: return "abs_cosine";
  }
  return "constant";
}

}  // namespace peakctl
