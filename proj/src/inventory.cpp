#include "peakctl/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "peakctl/parallel.hpp"

namespace peakctl {

double SignalSpec::operator()(double t) const {
  switch (kind) {
    case Kind::constant: return base;
    case Kind::sinusoid: return base + amplitude * std::sin(phase + angular_rate * t);
    case Kind::abs_cosine: return base + amplitude * std::abs(std::cos(phase + angular_rate * t));
  }
  return base;
}

void SignalSpec::require_positive(double t0, double end, const char* name) const {
  if (kind == Kind::constant) {
    if (base > 0.0) return;
    throw std::invalid_argument(std::string(name) + ": signal must be strictly positive");
  }
  if (base - std::abs(amplitude) > 0.0) return;
  const int n = 4096;
  for (int i = 0; i <= n; ++i) {
    const double t = t0 + (end - t0) * i / n;
    if (!((*this)(t) > 0.0))
      throw std::invalid_argument(std::string(name) + ": signal must be strictly positive on [" +
                                  std::to_string(t0) + ", " + std::to_string(end) +
                                  "], violated near t = " + std::to_string(t));
  }
}

void InventoryParams::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("InventoryParams: T must be positive");
  if (!(a > 0.0)) throw std::invalid_argument("InventoryParams: a must be positive");
  if (C_h < 0.0 || C_s < 0.0 || C_h_T < 0.0 || C_s_T < 0.0)
    throw std::invalid_argument("InventoryParams: cost weights must be nonnegative");
  if (sigma < 0.0) throw std::invalid_argument("InventoryParams: sigma must be nonnegative");
  alpha.require_positive(0.0, T, "alpha");
  beta.require_positive(0.0, T, "beta");
  smoothing.validate();
  if (y0 && *y0 < x0 - 1e-12)
    throw std::invalid_argument("InventoryParams: y0 below x0");
}

double demand(const InventoryParams& prm, double t, double price) {
  return std::max(prm.alpha(t) - prm.beta(t) * price, 0.0);
}

double price_from_rate(const InventoryParams& prm, double t, double u) {
  return prm.a * u + prm.alpha(t) / (2.0 * prm.beta(t));
}

double reduced_rhs(const InventoryParams& prm, double t, double /*x*/, double u) {
  return u * prm.gamma(t) - 0.5 * prm.alpha(t);
}

double holding_cost(const InventoryParams& prm, double x) {
  return (x < 0.0 ? prm.C_s : prm.C_h) * x * x;
}

double terminal_holding_cost(const InventoryParams& prm, double x) {
  return (x < 0.0 ? prm.C_s_T : prm.C_h_T) * x * x;
}

double running_reward(const InventoryParams& prm, double t, double x) {
  const double al = prm.alpha(t);
  return al * al / (4.0 * prm.beta(t)) - holding_cost(prm, x);
}

CombinedProblem build_problem(const InventoryParams& prm) {
  prm.validate();
  CombinedProblem p;
  p.state_dim = 1;
  p.control_dim = 1;
  p.dynamics = [prm](double t, std::span<const double> x, std::span<const double> u,
                     std::span<double> out) { out[0] = reduced_rhs(prm, t, x[0], u[0]); };
  p.running_reward = [prm](double t, std::span<const double> x, std::span<const double> u) {
    return running_reward(prm, t, x[0]) - prm.a * u[0] * u[0] * prm.gamma(t);
  };
  p.peak.value = [](double, std::span<const double> x) { return x[0]; };
  p.peak.grad_x = [](double, std::span<const double>, std::span<double> g) { g[0] = 1.0; };
  p.peak.dt = [](double, std::span<const double>) { return 0.0; };
  p.terminal_reward = [prm](std::span<const double> x) {
    return -terminal_holding_cost(prm, x[0]);
  };
  p.sigma = prm.sigma;
  p.control_lower = [](double, std::span<double> lo) { lo[0] = 0.0; };
  p.control_upper = [prm](double t, std::span<double> hi) {
    hi[0] = prm.alpha(t) / (2.0 * prm.a * prm.beta(t));
  };
  p.smoothing = prm.smoothing;
  p.x0 = {prm.x0};
  p.y0 = prm.y0_effective();
  return p;
}

namespace {

double shortage_gradient(const InventoryParams& prm, double x) {
  if (x < 0.0) return 2.0 * prm.C_s * x;
  if (x > 0.0) return 2.0 * prm.C_h * x;
  return 0.0;
}

}  // namespace

CostateRhs costate_rhs(const InventoryParams& prm, CostateTerminalMode mode, bool indicator_mode) {
  return [prm, mode, indicator_mode](double t, std::span<const double> x, double y,
                                     std::span<const double> lam, std::span<const double> u,
                                     std::span<double> out) {
    const double xdot = reduced_rhs(prm, t, x[0], u[0]);
    double band = 0.0;
    if (!indicator_mode) {
      const double drift = (mode == CostateTerminalMode::gradient_consistent)
                               ? std::max(xdot, 0.0)
                               : xdot;
      band = lam[1] * dpsi_dd(prm.smoothing, x[0] - y) * drift;
    }
    out[0] = shortage_gradient(prm, x[0]) - band;
    out[1] = band;
  };
}

CostateTerminal costate_terminal(const InventoryParams& prm, CostateTerminalMode mode) {
  const double factor = (mode == CostateTerminalMode::gradient_consistent) ? 2.0 : 1.0;
  return [prm, factor](std::span<const double> xT, double /*yT*/, std::span<double> out) {
    const double x = xT[0];
    out[0] = -factor * ((x < 0.0 ? prm.C_s_T : prm.C_h_T)) * x;
    out[1] = -prm.sigma;
  };
}

ControlUpdate control_update(const InventoryParams& prm, bool indicator_mode) {
  return [prm, indicator_mode](double t, std::span<const double> x, double y,
                               std::span<const double> lam, std::span<double> out) {
    const double al = prm.alpha(t);
    const double g = prm.gamma(t);
    const double hi = al / (2.0 * prm.a * prm.beta(t));
    const double u_brk = al / (2.0 * g);  // zero-drift control, always inside (0, hi)
    const double lx = lam[0], ly = lam[1];
    const double d = x[0] - y;
    const double psi_v = indicator_mode ? (d >= 0.0 ? 1.0 : 0.0) : psi(prm.smoothing, d);

    // u-dependent part of H on each branch; both branches are concave in u.
    auto h_of = [&](double u) {
      const double xdot = u * g - 0.5 * al;
      return lx * xdot + ly * std::max(xdot, 0.0) * psi_v - prm.a * u * u * g;
    };
    const double c1 = std::clamp(lx / (2.0 * prm.a), 0.0, u_brk);
    const double c2 = std::clamp((lx + ly * psi_v) / (2.0 * prm.a), u_brk, hi);
    out[0] = (h_of(c2) > h_of(c1)) ? c2 : c1;
  };
}

StructuralChecks structural_checks(const InventoryParams& prm, const FbsSolution& sol) {
  StructuralChecks res;
  const TimeGrid& grid = sol.states.grid();
  res.terminal_shortage_ok = sol.states.at(grid.n_steps, 0) <= 1e-3;

  const double delta = prm.smoothing.delta;
  int eligible = 0, agree = 0;
  for (int k = 0; k + 1 <= grid.n_steps; ++k) {
    const double t = grid.node(k);
    const double x = sol.states.at(k, 0);
    if (std::abs(x) <= res.x_threshold) continue;
    const double width = prm.alpha(t) / (2.0 * prm.a * prm.beta(t));
    const double u = sol.control.at(k, 0);
    if (u < 1e-3 * width || u > width - 1e-3 * width) continue;
    const double d = x - sol.states.at(k, 1);
    if (d >= -delta && d <= 0.0) continue;  // on the band
    ++eligible;
    const double diff = sol.control.at(k + 1, 0) - u;
    const bool ok = (x > 0.0) ? diff >= -1e-12 : diff <= 1e-12;
    if (ok) ++agree;
  }
  res.monotonicity_nodes = eligible;
  if (eligible == 0) {
    res.monotonicity_empty = true;
    res.monotonicity_fraction = 1.0;
  } else {
    res.monotonicity_fraction = static_cast<double>(agree) / eligible;
  }
  return res;
}

namespace {

InventoryCaseResult finish_case(const InventoryParams& prm, FbsSolution&& sol) {
  InventoryCaseResult res;
  res.revenue = sol.breakdown.integral_term + sol.breakdown.terminal_term;
  res.peak = sol.breakdown.peak_smoothed;
  const TimeGrid& grid = sol.states.grid();
  res.price = Trajectory(grid, 1);
  for (int k = 0; k <= grid.n_steps; ++k)
    res.price.at(k, 0) = price_from_rate(prm, grid.node(k), sol.control.at(k, 0));
  res.checks = structural_checks(prm, sol);
  res.sol = std::move(sol);
  return res;
}

}  // namespace

InventoryCaseResult solve_case(const InventoryParams& prm, const FbsConfig& config) {
  CombinedProblem p = build_problem(prm);
  FbsSolution sol = solve(p, costate_rhs(prm, config.costate_terminal_mode),
                          costate_terminal(prm, config.costate_terminal_mode),
                          control_update(prm), config);
  return finish_case(prm, std::move(sol));
}

InventoryCaseResult solve_case_dn(const InventoryParams& prm, const FbsConfig& config) {
  CombinedProblem p = build_problem(prm);
  FbsSolution sol = solve_dn(p, costate_rhs(prm, config.costate_terminal_mode, true),
                             costate_terminal(prm, config.costate_terminal_mode),
                             control_update(prm, true), config);
  return finish_case(prm, std::move(sol));
}

std::vector<SigmaRow> sweep_sigma(const InventoryParams& prm, const std::vector<double>& sigmas,
                                  const FbsConfig& config, int n_threads) {
  std::vector<SigmaRow> rows(sigmas.size());
  parallel_for(static_cast<int>(sigmas.size()), n_threads, [&](int i) {
    InventoryParams row_prm = prm;
    row_prm.sigma = sigmas[i];
    InventoryCaseResult r = solve_case(row_prm, config);
    rows[i] = {sigmas[i], r.revenue, r.peak, r.sol.converged, r.sol.iterations};
  });
  return rows;
}

}  // namespace peakctl
