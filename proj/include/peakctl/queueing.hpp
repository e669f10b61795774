#pragma once

#include <optional>
#include <vector>

#include "peakctl/fbs.hpp"
#include "peakctl/inventory.hpp"  // SignalSpec
#include "peakctl/problem.hpp"

namespace peakctl {

// Fluid queue x' = alpha - mu with service rate mu = (alpha + x) u, u in
// [0, u_bar]. Costs: rho * x (congestion), beta * (mu - mu_id)^2 (utilization),
// terminal eta * x(T), and the peak penalty sigma * y(T).
struct QueueParams {
  SignalSpec alpha;
  double rho = 0.0;
  double sigma = 0.0;
  double beta = 14.0;
  double eta = 1.0;
  double mu_id = 11.5;
  double u_bar = 0.9;
  double T = 1.0;
  double x0 = 0.0;
  std::optional<double> y0;  // defaults to x0
  SmoothingSpec smoothing{SmoothingKind::linear, 0.2, 1.0};

  double y0_effective() const { return y0.value_or(x0); }
  void validate() const;
};

double service_rate(double alpha, double x, double u);  // (alpha + x) u
double queue_rhs(const QueueParams& prm, double t, double x, double u);
double congestion_cost(double x);                              // g(x) = x
double utilization_cost(const QueueParams& prm, double mu);    // (mu - mu_id)^2

CombinedProblem build_problem(const QueueParams& prm);

CostateRhs costate_rhs_queue(const QueueParams& prm, bool indicator_mode = false);

// (lambda_x, lambda_y)(T) = (-eta, -sigma).
CostateTerminal costate_terminal_queue(const QueueParams& prm);

// Exact maximizer of the piecewise-quadratic Hamiltonian in u, split at the
// zero-drift control alpha/(alpha + x); ties toward smaller u.
ControlUpdate control_update_queue(const QueueParams& prm, bool indicator_mode = false);

struct QueueCaseResult {
  FbsSolution sol;
  double peak = 0.0;        // y(T)
  double integral_g = 0.0;  // trapezoid of x
  double integral_h = 0.0;  // trapezoid of (mu - mu_id)^2
  bool state_above_neg_alpha = true;  // x(t) > -alpha(t) held at every node
};

QueueCaseResult solve_queue(const QueueParams& prm, const FbsConfig& config);

enum class ParetoMode { peak_vs_utilization, congestion_vs_utilization };

struct ParetoRow {
  double weight = 0.0;
  double peak = 0.0;
  double integral_g = 0.0;
  double integral_h = 0.0;
  bool converged = false;
  int iterations = 0;
};

// peak_vs_utilization: rho = 0, weight = sigma; congestion_vs_utilization:
// sigma = 0, weight = rho. One solve per weight on a worker pool; weights must
// come sorted ascending.
std::vector<ParetoRow> pareto_sweep(const QueueParams& base, ParetoMode mode,
                                    const std::vector<double>& weights, const FbsConfig& config,
                                    int n_threads = 0);

// Row whose utilization cost integral lands closest to the target.
int matched_row(const std::vector<ParetoRow>& rows, double target_integral_h);

}  // namespace peakctl
