#pragma once

#include <optional>
#include <vector>

#include "peakctl/fbs.hpp"
#include "peakctl/problem.hpp"

namespace peakctl {

// Time-varying scalar signal. sinusoid: base + amplitude * sin(phase + rate*t);
// abs_cosine: base + amplitude * |cos(phase + rate*t)|.
struct SignalSpec {
  enum class Kind { constant, sinusoid, abs_cosine };
  Kind kind = Kind::constant;
  double base = 1.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double angular_rate = 0.0;

  double operator()(double t) const;

  // Throws std::invalid_argument unless the signal stays strictly positive on
  // [t0, end] (conservative amplitude bound first, then a dense sample).
  void require_positive(double t0, double end, const char* name) const;
};

// Storage sizing problem in reduced form: the price has been eliminated, the
// remaining control is the production rate u in [0, alpha/(2 a beta)].
struct InventoryParams {
  SignalSpec alpha;  // demand intercept, must stay positive
  SignalSpec beta;   // price sensitivity, must stay positive
  double a = 0.6;    // quadratic production cost coefficient
  double C_h = 3.0, C_s = 40.0;      // running holding / shortage weights
  double C_h_T = 6.0, C_s_T = 410.0; // terminal weights
  double sigma = 0.0;
  double T = 1.0;
  double x0 = 0.0;
  std::optional<double> y0;  // defaults to the tracked value at t0, i.e. x0
  SmoothingSpec smoothing{SmoothingKind::linear, 0.01, 1.0};

  double gamma(double t) const { return 1.0 + a * beta(t); }
  double y0_effective() const { return y0.value_or(x0); }
  void validate() const;
};

// Demand at posted price: (alpha - beta * price)+.
double demand(const InventoryParams& prm, double t, double price);

// Optimal price as a function of the production rate: a*u + alpha/(2 beta).
double price_from_rate(const InventoryParams& prm, double t, double u);

// Reduced inventory drift u * gamma(t) - alpha(t)/2.
double reduced_rhs(const InventoryParams& prm, double t, double x, double u);

// Control-free part of the reward rate: alpha^2/(4 beta) - holding/shortage
// cost. The quadratic production cost -a u^2 gamma joins it in the problem's
// running reward.
double running_reward(const InventoryParams& prm, double t, double x);

double holding_cost(const InventoryParams& prm, double x);           // C_s x^2 / C_h x^2
double terminal_holding_cost(const InventoryParams& prm, double x);  // C_s_T x^2 / C_h_T x^2

CombinedProblem build_problem(const InventoryParams& prm);

// Costate dynamics. proportional keeps the band term proportional to the raw
// drift; gradient_consistent gates it by drift > 0 (matching the auxiliary
// dynamics' rising-edge detector). indicator_mode drops the band coupling
// entirely (the raw detector has zero slope almost everywhere).
CostateRhs costate_rhs(const InventoryParams& prm, CostateTerminalMode mode,
                       bool indicator_mode = false);

// proportional: lambda_x(T) = -C_T x (half the true terminal-cost gradient,
// kept as an alternative); gradient_consistent: -2 C_T x. lambda_y(T) = -sigma.
CostateTerminal costate_terminal(const InventoryParams& prm, CostateTerminalMode mode);

// Exact pointwise maximizer of the piecewise-quadratic Hamiltonian in u:
// enumerates the stationary point of each branch clamped to its validity
// interval (split at the zero-drift control alpha/(2 gamma)) and keeps the
// larger-Hamiltonian candidate, ties toward smaller u.
ControlUpdate control_update(const InventoryParams& prm, bool indicator_mode = false);

struct StructuralChecks {
  bool terminal_shortage_ok = false;   // x(T) <= 1e-3
  double monotonicity_fraction = 1.0;  // u rising where x > 0, falling where x < 0
  int monotonicity_nodes = 0;
  bool monotonicity_empty = false;
  double x_threshold = 0.02;  // |x| gate for eligibility, reported with results
};

StructuralChecks structural_checks(const InventoryParams& prm, const FbsSolution& sol);

struct InventoryCaseResult {
  FbsSolution sol;
  double revenue = 0.0;  // integral + terminal (peak penalty excluded)
  double peak = 0.0;     // y(T)
  Trajectory price;      // posted price along the solution
  StructuralChecks checks;
};

InventoryCaseResult solve_case(const InventoryParams& prm, const FbsConfig& config);

// DN variant: sweep on the raw indicator dynamics, best iterate kept.
InventoryCaseResult solve_case_dn(const InventoryParams& prm, const FbsConfig& config);

struct SigmaRow {
  double sigma = 0.0;
  double revenue = 0.0;
  double peak = 0.0;
  bool converged = false;
  int iterations = 0;
};

// One solve per sigma, dispatched to a worker pool; rows keep input order.
std::vector<SigmaRow> sweep_sigma(const InventoryParams& prm, const std::vector<double>& sigmas,
                                  const FbsConfig& config, int n_threads = 0);

}  // namespace peakctl
