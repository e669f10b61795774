#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace peakctl {

// Thrown when an integration produces NaN or Inf in any state component.
class NonFiniteStateError : public std::runtime_error {
public:
  NonFiniteStateError(int node, double t);
  int node() const { return node_; }
  double time() const { return t_; }

private:
  int node_;
  double t_;
};

// Uniform grid on [t0, end] with n_steps intervals, dt = (end - t0) / n_steps.
struct TimeGrid {
  double t0 = 0.0;
  double end = 1.0;
  int n_steps = 1;
  double dt = 1.0;

  double node(int k) const { return t0 + k * dt; }
  int n_nodes() const { return n_steps + 1; }
};

// Throws std::invalid_argument on an empty horizon (end <= t0) or zero steps.
TimeGrid make_grid(double t0, double end, int n_steps);

// Node-indexed values of fixed dimension on a TimeGrid. Storage is flat,
// node-major, so hot loops do not allocate.
class Trajectory {
public:
  Trajectory() = default;
  Trajectory(const TimeGrid& grid, int dim)
      : grid_(grid), dim_(dim), data_(static_cast<size_t>(grid.n_nodes()) * dim, 0.0) {
    if (dim <= 0) throw std::invalid_argument("Trajectory: dim must be positive");
  }

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int n_nodes() const { return grid_.n_nodes(); }

  std::span<double> at(int k) {
    return {data_.data() + static_cast<size_t>(k) * dim_, static_cast<size_t>(dim_)};
  }
  std::span<const double> at(int k) const {
    return {data_.data() + static_cast<size_t>(k) * dim_, static_cast<size_t>(dim_)};
  }
  double& at(int k, int c) { return data_[static_cast<size_t>(k) * dim_ + c]; }
  double at(int k, int c) const { return data_[static_cast<size_t>(k) * dim_ + c]; }

  // Linear interpolation between the two bracketing nodes; t is clamped to the
  // grid span first.
  void interpolate(double t, std::span<double> out) const;

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

private:
  TimeGrid grid_;
  int dim_ = 0;
  std::vector<double> data_;
};

// rhs(t, state, control_at_t, deriv_out). The control is sampled and held at
// the left node of each step, including at the RK4 half-step evaluations.
using ForwardRhs =
    std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)>;

// rhs(t, state, forward_data_at_t, deriv_out). Forward data is linearly
// interpolated between nodes at interior evaluation points.
using BackwardRhs =
    std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)>;

// Classic fixed-step RK4 from grid.t0 to grid.end. control must live on the
// same grid. Throws NonFiniteStateError as soon as a node goes non-finite.
Trajectory integrate_forward(const ForwardRhs& rhs, std::span<const double> s0,
                             const TimeGrid& grid, const Trajectory& control);

// RK4 run in reverse (node n_steps down to 0) for costate sweeps; sT seeds the
// terminal node exactly (bit-equal). forward_data must live on the same grid.
Trajectory integrate_backward(const BackwardRhs& rhs, std::span<const double> sT,
                              const TimeGrid& grid, const Trajectory& forward_data);

}  // namespace peakctl
