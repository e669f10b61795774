#include "peakctl/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace peakctl {

double peak_rate(const CombinedProblem& p, double t, std::span<const double> x,
                 std::span<const double> dx) {
  thread_local std::vector<double> grad;
  grad.resize(x.size());
  p.peak.grad_x(t, x, grad);
  double r = p.peak.dt(t, x);
  for (size_t i = 0; i < x.size(); ++i) r += grad[i] * dx[i];
  return r;
}

void augmented_rhs(const CombinedProblem& p, double t, std::span<const double> state,
                   std::span<const double> u, std::span<double> out) {
  const int n = p.state_dim;
  std::span<const double> x = state.first(n);
  const double y = state[n];
  p.dynamics(t, x, u, out.first(n));
  const double rate = peak_rate(p, t, x, out.first(n));
  const double d = p.peak.value(t, x) - y;
  out[n] = std::max(rate, 0.0) * psi(p.smoothing, d);
}

void augmented_rhs_indicator(const CombinedProblem& p, double t, std::span<const double> state,
                             std::span<const double> u, std::span<double> out) {
  const int n = p.state_dim;
  std::span<const double> x = state.first(n);
  const double y = state[n];
  p.dynamics(t, x, u, out.first(n));
  const double rate = peak_rate(p, t, x, out.first(n));
  out[n] = (p.peak.value(t, x) >= y && rate >= 0.0) ? rate : 0.0;
}

namespace {

void validate_inputs(const CombinedProblem& p, const TimeGrid& grid, const Trajectory& control) {
  if (static_cast<int>(p.x0.size()) != p.state_dim)
    throw std::invalid_argument("evaluate: x0 dimension mismatch");
  if (control.dim() != p.control_dim)
    throw std::invalid_argument("evaluate: control dimension mismatch");
  p.smoothing.validate();
  const double peak0 = p.peak.value(grid.t0, p.x0);
  if (p.y0 < peak0 - 1e-12)
    throw std::invalid_argument("evaluate: y0 = " + std::to_string(p.y0) +
                                " below tracked value at t0 = " + std::to_string(peak0));
  std::vector<double> lo(p.control_dim), hi(p.control_dim);
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.node(k);
    p.control_lower(t, lo);
    p.control_upper(t, hi);
    for (int c = 0; c < p.control_dim; ++c) {
      if (lo[c] > hi[c])
        throw std::invalid_argument("evaluate: inverted control box at node " + std::to_string(k));
    }
  }
}

}  // namespace

EvaluationResult evaluate(const CombinedProblem& p, const TimeGrid& grid,
                          const Trajectory& control, bool use_indicator) {
  validate_inputs(p, grid, control);

  Trajectory u = control;
  int clamped = 0;
  {
    std::vector<double> lo(p.control_dim), hi(p.control_dim);
    for (int k = 0; k <= grid.n_steps; ++k) {
      const double t = grid.node(k);
      p.control_lower(t, lo);
      p.control_upper(t, hi);
      bool touched = false;
      for (int c = 0; c < p.control_dim; ++c) {
        double& v = u.at(k, c);
        if (v < lo[c]) v = lo[c], touched = true;
        if (v > hi[c]) v = hi[c], touched = true;
      }
      if (touched) ++clamped;
    }
  }

  ForwardRhs rhs = [&](double t, std::span<const double> s, std::span<const double> uu,
                       std::span<double> out) {
    if (use_indicator)
      augmented_rhs_indicator(p, t, s, uu, out);
    else
      augmented_rhs(p, t, s, uu, out);
  };

  std::vector<double> s0(p.augmented_dim());
  std::copy(p.x0.begin(), p.x0.end(), s0.begin());
  s0[p.state_dim] = p.y0;

  EvaluationResult res{integrate_forward(rhs, s0, grid, u), {}, clamped};
  res.breakdown = breakdown_from_states(p, grid, res.states, u);
  return res;
}

ObjectiveBreakdown breakdown_from_states(const CombinedProblem& p, const TimeGrid& grid,
                                         const Trajectory& states, const Trajectory& control) {
  double integral = 0.0;
  double peak_exact = -std::numeric_limits<double>::infinity();
  double prev_L = 0.0;
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.node(k);
    std::span<const double> x = states.at(k).first(p.state_dim);
    const double L = p.running_reward(t, x, control.at(k));
    if (k > 0) integral += 0.5 * grid.dt * (prev_L + L);
    prev_L = L;
    peak_exact = std::max(peak_exact, p.peak.value(t, x));
  }

  ObjectiveBreakdown b;
  b.integral_term = integral;
  b.peak_smoothed = states.at(grid.n_steps, p.state_dim);
  b.peak_exact = peak_exact;
  b.terminal_term = p.terminal_reward(states.at(grid.n_steps).first(p.state_dim));
  b.total_smoothed = b.integral_term - p.sigma * b.peak_smoothed + b.terminal_term;
  b.total_exact = b.integral_term - p.sigma * b.peak_exact + b.terminal_term;
  return b;
}

double hamiltonian(const CombinedProblem& p, double t, std::span<const double> x, double y,
                   std::span<const double> u, std::span<const double> costate,
                   bool use_indicator) {
  thread_local std::vector<double> dx;
  dx.resize(p.state_dim);
  p.dynamics(t, x, u, dx);
  double h = 0.0;
  for (int i = 0; i < p.state_dim; ++i) h += costate[i] * dx[i];
  const double rate = peak_rate(p, t, x, dx);
  const double d = p.peak.value(t, x) - y;
  double dy;
  if (use_indicator)
    dy = (d >= 0.0 && rate >= 0.0) ? rate : 0.0;
  else
    dy = std::max(rate, 0.0) * psi(p.smoothing, d);
  h += costate[p.state_dim] * dy;
  h += p.running_reward(t, x, u);
  return h;
}

}  // namespace peakctl
