#pragma once

#include <functional>
#include <span>
#include <vector>

#include "peakctl/grid.hpp"
#include "peakctl/smoothing.hpp"

namespace peakctl {

// Peak-tracked quantity with the partials needed by the auxiliary dynamics.
struct PeakFunction {
  std::function<double(double, std::span<const double>)> value;
  std::function<void(double, std::span<const double>, std::span<double>)> grad_x;
  std::function<double(double, std::span<const double>)> dt;
};

// Finite-horizon control problem whose objective combines an integral reward,
// a terminal reward, and a peak penalty -sigma * sup of the tracked quantity.
// The peak is carried as one extra state y that ratchets up whenever the
// tracked value is rising inside the smoothing band below y.
struct CombinedProblem {
  int state_dim = 1;
  int control_dim = 1;

  // f(t, x, u) -> dx
  std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)>
      dynamics;
  // Reward rate L(t, x, u); costs enter with negative sign.
  std::function<double(double, std::span<const double>, std::span<const double>)> running_reward;
  PeakFunction peak;
  std::function<double(std::span<const double>)> terminal_reward;  // Psi(x(T))
  double sigma = 0.0;

  // Per-component box bounds at time t.
  std::function<void(double, std::span<double>)> control_lower;
  std::function<void(double, std::span<double>)> control_upper;

  SmoothingSpec smoothing;
  std::vector<double> x0;
  double y0 = 0.0;  // must start at or above the tracked value at t0

  int augmented_dim() const { return state_dim + 1; }
};

// Time derivative of the rising-edge detector feeding y: d/dt of the tracked
// value along the flow, grad_x . f + d/dt.
double peak_rate(const CombinedProblem& p, double t, std::span<const double> x,
                 std::span<const double> dx);

// Smoothed augmented dynamics: state = (x, y), dy = max(peak_rate, 0) *
// psi(peak - y).
void augmented_rhs(const CombinedProblem& p, double t, std::span<const double> state,
                   std::span<const double> u, std::span<double> out);

// Raw (non-smooth) variant: dy = peak_rate * 1{peak >= y and peak_rate >= 0}.
void augmented_rhs_indicator(const CombinedProblem& p, double t, std::span<const double> state,
                             std::span<const double> u, std::span<double> out);

struct ObjectiveBreakdown {
  double integral_term = 0.0;   // trapezoid of L on the grid nodes
  double peak_smoothed = 0.0;   // y(T)
  double peak_exact = 0.0;      // max over grid nodes of the tracked value
  double terminal_term = 0.0;   // Psi(x(T))
  double total_smoothed = 0.0;  // integral - sigma * peak_smoothed + terminal
  double total_exact = 0.0;     // integral - sigma * peak_exact + terminal
};

struct EvaluationResult {
  Trajectory states;  // dim state_dim + 1, last component is y
  ObjectiveBreakdown breakdown;
  int clamped_nodes = 0;  // control samples that violated the box and were clamped
};

// Integrates the augmented dynamics under the given control (clamped into the
// box where it violates it) and accumulates the objective. Throws
// std::invalid_argument when y0 sits below the tracked value at t0 or the box
// is inverted at some node; NonFiniteStateError propagates from integration.
EvaluationResult evaluate(const CombinedProblem& p, const TimeGrid& grid,
                          const Trajectory& control, bool use_indicator = false);

// Objective accounting for an already-integrated augmented trajectory.
ObjectiveBreakdown breakdown_from_states(const CombinedProblem& p, const TimeGrid& grid,
                                         const Trajectory& states, const Trajectory& control);

// Pointwise Hamiltonian lambda_x . f + lambda_y * dy + L with dy from the
// smoothed (or indicator) auxiliary dynamics. costate = (lambda_x, lambda_y).
double hamiltonian(const CombinedProblem& p, double t, std::span<const double> x, double y,
                   std::span<const double> u, std::span<const double> costate,
                   bool use_indicator = false);

}  // namespace peakctl
