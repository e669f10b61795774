#include "peakctl/grid.hpp"

#include <cmath>
#include <string>

namespace peakctl {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

NonFiniteStateError::NonFiniteStateError(int node, double t)
    : std::runtime_error("non-finite state at node " + std::to_string(node) + " (t = " +
                         std::to_string(t) + ")"),
      node_(node),
      t_(t) {}

TimeGrid make_grid(double t0, double end, int n_steps) {
  if (!(end > t0)) throw std::invalid_argument("make_grid: empty horizon (end <= t0)");
  if (n_steps < 1) throw std::invalid_argument("make_grid: n_steps must be at least 1");
  TimeGrid g;
  g.t0 = t0;
  g.end = end;
  g.n_steps = n_steps;
  g.dt = (end - t0) / n_steps;
  return g;
}

void Trajectory::interpolate(double t, std::span<double> out) const {
  double s = (t - grid_.t0) / grid_.dt;
  if (s < 0.0) s = 0.0;
  if (s > grid_.n_steps) s = grid_.n_steps;
  int k = static_cast<int>(s);
  if (k >= grid_.n_steps) k = grid_.n_steps - 1;
  double w = s - k;
  std::span<const double> a = at(k);
  std::span<const double> b = at(k + 1);
  for (int c = 0; c < dim_; ++c) out[c] = (1.0 - w) * a[c] + w * b[c];
}

Trajectory integrate_forward(const ForwardRhs& rhs, std::span<const double> s0,
                             const TimeGrid& grid, const Trajectory& control) {
  if (control.grid().n_steps != grid.n_steps)
    throw std::invalid_argument("integrate_forward: control grid mismatch");
  const int dim = static_cast<int>(s0.size());
  Trajectory out(grid, dim);
  std::copy(s0.begin(), s0.end(), out.at(0).begin());
  if (!all_finite(out.at(0))) throw NonFiniteStateError(0, grid.t0);

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const double dt = grid.dt;
  for (int k = 0; k < grid.n_steps; ++k) {
    const double t = grid.node(k);
    std::span<const double> u = control.at(k);
    std::span<const double> s = out.at(k);

    rhs(t, s, u, k1);
    for (int c = 0; c < dim; ++c) tmp[c] = s[c] + 0.5 * dt * k1[c];
    rhs(t + 0.5 * dt, tmp, u, k2);
    for (int c = 0; c < dim; ++c) tmp[c] = s[c] + 0.5 * dt * k2[c];
    rhs(t + 0.5 * dt, tmp, u, k3);
    for (int c = 0; c < dim; ++c) tmp[c] = s[c] + dt * k3[c];
    rhs(t + dt, tmp, u, k4);

    std::span<double> next = out.at(k + 1);
    for (int c = 0; c < dim; ++c)
      next[c] = s[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    if (!all_finite(next)) throw NonFiniteStateError(k + 1, grid.node(k + 1));
  }
  return out;
}

Trajectory integrate_backward(const BackwardRhs& rhs, std::span<const double> sT,
                              const TimeGrid& grid, const Trajectory& forward_data) {
  if (forward_data.grid().n_steps != grid.n_steps)
    throw std::invalid_argument("integrate_backward: forward data grid mismatch");
  const int dim = static_cast<int>(sT.size());
  Trajectory out(grid, dim);
  std::copy(sT.begin(), sT.end(), out.at(grid.n_steps).begin());
  if (!all_finite(out.at(grid.n_steps))) throw NonFiniteStateError(grid.n_steps, grid.end);

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  std::vector<double> fwd(forward_data.dim());
  const double h = -grid.dt;  // stepping toward t0
  for (int k = grid.n_steps - 1; k >= 0; --k) {
    const double t_hi = grid.node(k + 1);
    std::span<const double> s = out.at(k + 1);

    forward_data.interpolate(t_hi, fwd);
    rhs(t_hi, s, fwd, k1);
    forward_data.interpolate(t_hi + 0.5 * h, fwd);
    for (int c = 0; c < dim; ++c) tmp[c] = s[c] + 0.5 * h * k1[c];
    rhs(t_hi + 0.5 * h, tmp, fwd, k2);
    for (int c = 0; c < dim; ++c) tmp[c] = s[c] + 0.5 * h * k2[c];
    rhs(t_hi + 0.5 * h, tmp, fwd, k3);
    forward_data.interpolate(t_hi + h, fwd);
    for (int c = 0; c < dim; ++c) tmp[c] = s[c] + h * k3[c];
    rhs(t_hi + h, tmp, fwd, k4);

    std::span<double> prev = out.at(k);
    for (int c = 0; c < dim; ++c)
      prev[c] = s[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    if (!all_finite(prev)) throw NonFiniteStateError(k, grid.node(k));
  }
  return out;
}

}  // namespace peakctl
