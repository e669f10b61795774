#pragma once

#include <functional>
#include <span>
#include <vector>

#include "peakctl/problem.hpp"

namespace peakctl {

enum class ControlInit { midpoint, zero, given };
enum class CostateTerminalMode { proportional, gradient_consistent };

struct FbsConfig {
  TimeGrid grid;
  int max_iterations = 20000;
  double tolerance = 1e-6;  // sup-norm change in the control between sweeps
  double relaxation = 0.5;
  ControlInit u_init = ControlInit::midpoint;
  Trajectory u_given;  // consulted only when u_init == given
  CostateTerminalMode costate_terminal_mode = CostateTerminalMode::proportional;
};

// rhs(t, x, y, costate, u, dcostate_out); costate = (lambda_x.., lambda_y).
using CostateRhs = std::function<void(double, std::span<const double>, double,
                                      std::span<const double>, std::span<const double>,
                                      std::span<double>)>;

// terminal(xT, yT, costate_out)
using CostateTerminal =
    std::function<void(std::span<const double>, double, std::span<double>)>;

// update(t, x, y, costate, u_out): pointwise Hamiltonian-maximizing candidate.
using ControlUpdate = std::function<void(double, std::span<const double>, double,
                                         std::span<const double>, std::span<double>)>;

struct FbsSolution {
  Trajectory control;
  Trajectory states;    // augmented (x, y)
  Trajectory costates;  // (lambda_x.., lambda_y), terminal node seeded bit-exactly
  ObjectiveBreakdown breakdown;
  bool converged = false;
  int iterations = 0;
  double final_update_norm = 0.0;
  std::vector<double> objective_history;  // total_smoothed of each sweep's incoming control
};

// Forward-backward sweep: integrate states forward, costates backward along
// the frozen forward data, then relax the control toward the pointwise
// Hamiltonian maximizer until the sup-norm update drops below tolerance.
// The relaxation factor adapts: it halves when the objective stalls for 50
// sweeps or the candidate gap blows up, doubles back toward the configured
// value after a long run of strict improvement, and never exceeds it.
FbsSolution solve(const CombinedProblem& p, const CostateRhs& costate_rhs,
                  const CostateTerminal& costate_terminal, const ControlUpdate& control_update,
                  const FbsConfig& config);

// Same sweep on the raw indicator dynamics. Convergence is not expected; the
// best-objective iterate encountered is returned (its costates recomputed so
// the solution is internally consistent).
FbsSolution solve_dn(const CombinedProblem& p, const CostateRhs& costate_rhs,
                     const CostateTerminal& costate_terminal, const ControlUpdate& control_update,
                     const FbsConfig& config);

struct MaximalityReport {
  double fraction = 0.0;  // nodes where the stored control attains the probed max
  int n_nodes = 0;
  int n_failing = 0;
};

// Probes n_probe equispaced controls in the box at every node and counts where
// H(stored control) falls short of the probed max by more than
// 1e-6 * (1 + |H|). Scalar controls only.
MaximalityReport hamiltonian_maximality_report(const CombinedProblem& p, const FbsSolution& sol,
                                               int n_probe = 101, bool use_indicator = false);

struct GradientCheckResult {
  double max_rel_error = 0.0;
  int n_used = 0;
};

// Central-difference check of d(total_smoothed)/du_k against dH/du * dt at up
// to n_samples nodes. Endpoint nodes, nodes hugging the control bounds, and
// nodes in or near the smoothing band are skipped; scalar controls only.
GradientCheckResult adjoint_gradient_check(const CombinedProblem& p, const CostateRhs& costate_rhs,
                                           const CostateTerminal& costate_terminal,
                                           const TimeGrid& grid, const Trajectory& control,
                                           int n_samples = 10);

// Derivative-free fallback update: n_grid-point scan of H over the box plus
// one golden-section refinement around the best cell. Scalar controls only.
ControlUpdate make_grid_maximizer(const CombinedProblem& p, int n_grid = 257,
                                  bool use_indicator = false);

}  // namespace peakctl
