#include "peakctl/fbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace peakctl {

namespace {

Trajectory initial_control(const CombinedProblem& p, const FbsConfig& config) {
  const TimeGrid& grid = config.grid;
  Trajectory u(grid, p.control_dim);
  std::vector<double> lo(p.control_dim), hi(p.control_dim);
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.node(k);
    p.control_lower(t, lo);
    p.control_upper(t, hi);
    for (int c = 0; c < p.control_dim; ++c) {
      double v;
      switch (config.u_init) {
        case ControlInit::midpoint: v = 0.5 * (lo[c] + hi[c]); break;
        case ControlInit::zero: v = 0.0; break;
        case ControlInit::given:
          if (config.u_given.n_nodes() != grid.n_nodes() ||
              config.u_given.dim() != p.control_dim)
            throw std::invalid_argument("solve: u_given does not match the grid");
          v = config.u_given.at(k, c);
          break;
        default: v = 0.0;
      }
      u.at(k, c) = std::clamp(v, lo[c], hi[c]);
    }
  }
  return u;
}

FbsSolution run_sweeps(const CombinedProblem& p, const CostateRhs& costate_rhs,
                       const CostateTerminal& costate_terminal,
                       const ControlUpdate& control_update, const FbsConfig& config,
                       bool use_indicator, bool track_best) {
  const TimeGrid& grid = config.grid;
  const int n = p.state_dim;
  const int m = p.control_dim;
  p.smoothing.validate();
  if (p.y0 < p.peak.value(grid.t0, p.x0) - 1e-12)
    throw std::invalid_argument("solve: y0 below tracked value at t0");

  Trajectory u = initial_control(p, config);

  ForwardRhs fwd_rhs = [&](double t, std::span<const double> s, std::span<const double> uu,
                           std::span<double> out) {
    if (use_indicator)
      augmented_rhs_indicator(p, t, s, uu, out);
    else
      augmented_rhs(p, t, s, uu, out);
  };
  BackwardRhs bck_rhs = [&](double t, std::span<const double> lam, std::span<const double> fwd,
                            std::span<double> out) {
    costate_rhs(t, fwd.first(n), fwd[n], lam, fwd.subspan(n + 1, m), out);
  };

  std::vector<double> s0(n + 1);
  std::copy(p.x0.begin(), p.x0.end(), s0.begin());
  s0[n] = p.y0;

  // Adaptive damping. Periodic orbits of the sweep map repeat the objective
  // exactly, so a stall is detected as 50 sweeps without a new best objective
  // and answered by halving omega. A sweep whose candidate gap blows past
  // 10x the best gap seen at the current omega halves immediately (explosive
  // regrowth is caught in a few sweeps, before it erases converged structure).
  // 200 consecutive best-setting sweeps signal an over-damped healthy run and
  // double omega back, never above the configured value. The floor sits far
  // below 1/64 because stiff terminal feedback can demand omega near 1e-3 of
  // the configured value before the sweep map contracts.
  constexpr int kStallSweeps = 50;
  constexpr int kRestoreSweeps = 200;
  const double omega_floor = config.relaxation * 0x1p-20;
  double omega = config.relaxation;
  double best_objective = -std::numeric_limits<double>::infinity();
  double best_gap_here = std::numeric_limits<double>::infinity();
  int sweeps_since_best = 0;
  int improving_run = 0;

  double best_total = -std::numeric_limits<double>::infinity();
  Trajectory best_u;
  int best_iter = 0;

  FbsSolution sol;
  Trajectory packed(grid, n + 1 + m);
  std::vector<double> lamT(n + 1), lo(m), hi(m), cand(m);

  for (int it = 1; it <= config.max_iterations; ++it) {
    Trajectory states = integrate_forward(fwd_rhs, s0, grid, u);
    ObjectiveBreakdown b = breakdown_from_states(p, grid, states, u);
    sol.objective_history.push_back(b.total_smoothed);
    if (track_best && b.total_smoothed > best_total) {
      best_total = b.total_smoothed;
      best_u = u;
      best_iter = it;
    }

    for (int k = 0; k <= grid.n_steps; ++k) {
      std::span<const double> s = states.at(k);
      std::span<double> dst = packed.at(k);
      std::copy(s.begin(), s.end(), dst.begin());
      std::copy(u.at(k).begin(), u.at(k).end(), dst.begin() + n + 1);
    }
    std::span<const double> sT = states.at(grid.n_steps);
    costate_terminal(sT.first(n), sT[n], lamT);
    Trajectory costates = integrate_backward(bck_rhs, lamT, grid, packed);

    double gap = 0.0;
    for (int k = 0; k <= grid.n_steps; ++k) {
      const double t = grid.node(k);
      std::span<const double> s = states.at(k);
      control_update(t, s.first(n), s[n], costates.at(k), cand);
      p.control_lower(t, lo);
      p.control_upper(t, hi);
      for (int c = 0; c < m; ++c) {
        const double target = std::clamp(cand[c], lo[c], hi[c]);
        gap = std::max(gap, std::abs(target - u.at(k, c)));
        u.at(k, c) = (1.0 - omega) * u.at(k, c) + omega * target;
      }
    }
    const double delta = omega * gap;

    sol.iterations = it;
    sol.final_update_norm = delta;
    if (delta < config.tolerance && gap < 1000.0 * config.tolerance) {
      sol.converged = true;
      break;
    }

    if (b.total_smoothed > best_objective) {
      best_objective = b.total_smoothed;
      sweeps_since_best = 0;
      if (++improving_run >= kRestoreSweeps) {
        omega = std::min(2.0 * omega, config.relaxation);
        improving_run = 0;
        best_gap_here = std::numeric_limits<double>::infinity();
      }
    } else {
      improving_run = 0;
      ++sweeps_since_best;
    }
    best_gap_here = std::min(best_gap_here, gap);
    const bool exploding = gap > 10.0 * best_gap_here;
    if (exploding || sweeps_since_best >= kStallSweeps) {
      omega = std::max(0.5 * omega, omega_floor);
      best_objective = b.total_smoothed;
      sweeps_since_best = 0;
      improving_run = 0;
      best_gap_here = std::numeric_limits<double>::infinity();
    }
    if (std::getenv("PEAKCTL_TRACE_FBS") && it % 100 == 0)
      std::fprintf(stderr, "sweep %d gap %.6g omega %.6g obj %.8g\n", it, gap, omega,
                   b.total_smoothed);
  }

  Trajectory final_u = (track_best && best_iter > 0) ? best_u : u;
  Trajectory states = integrate_forward(fwd_rhs, s0, grid, final_u);
  for (int k = 0; k <= grid.n_steps; ++k) {
    std::span<const double> s = states.at(k);
    std::span<double> dst = packed.at(k);
    std::copy(s.begin(), s.end(), dst.begin());
    std::copy(final_u.at(k).begin(), final_u.at(k).end(), dst.begin() + n + 1);
  }
  std::span<const double> sT = states.at(grid.n_steps);
  costate_terminal(sT.first(n), sT[n], lamT);
  sol.costates = integrate_backward(bck_rhs, lamT, grid, packed);
  sol.breakdown = breakdown_from_states(p, grid, states, final_u);
  sol.states = std::move(states);
  sol.control = std::move(final_u);
  return sol;
}

}  // namespace

FbsSolution solve(const CombinedProblem& p, const CostateRhs& costate_rhs,
                  const CostateTerminal& costate_terminal, const ControlUpdate& control_update,
                  const FbsConfig& config) {
  return run_sweeps(p, costate_rhs, costate_terminal, control_update, config,
                    /*use_indicator=*/false, /*track_best=*/false);
}

FbsSolution solve_dn(const CombinedProblem& p, const CostateRhs& costate_rhs,
                     const CostateTerminal& costate_terminal, const ControlUpdate& control_update,
                     const FbsConfig& config) {
  return run_sweeps(p, costate_rhs, costate_terminal, control_update, config,
                    /*use_indicator=*/true, /*track_best=*/true);
}

MaximalityReport hamiltonian_maximality_report(const CombinedProblem& p, const FbsSolution& sol,
                                               int n_probe, bool use_indicator) {
  if (p.control_dim != 1)
    throw std::invalid_argument("hamiltonian_maximality_report: scalar controls only");
  const TimeGrid& grid = sol.states.grid();
  MaximalityReport rep;
  rep.n_nodes = grid.n_nodes();
  std::vector<double> lo(1), hi(1), probe(1);
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.node(k);
    std::span<const double> s = sol.states.at(k);
    std::span<const double> x = s.first(p.state_dim);
    const double y = s[p.state_dim];
    std::span<const double> lam = sol.costates.at(k);
    const double h_star = hamiltonian(p, t, x, y, sol.control.at(k), lam, use_indicator);
    p.control_lower(t, lo);
    p.control_upper(t, hi);
    double h_best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_probe; ++j) {
      probe[0] = lo[0] + (hi[0] - lo[0]) * j / (n_probe - 1);
      h_best = std::max(h_best, hamiltonian(p, t, x, y, probe, lam, use_indicator));
    }
    if (h_star < h_best - 1e-6 * (1.0 + std::abs(h_star))) ++rep.n_failing;
  }
  rep.fraction = 1.0 - static_cast<double>(rep.n_failing) / rep.n_nodes;
  return rep;
}

GradientCheckResult adjoint_gradient_check(const CombinedProblem& p, const CostateRhs& costate_rhs,
                                           const CostateTerminal& costate_terminal,
                                           const TimeGrid& grid, const Trajectory& control,
                                           int n_samples) {
  if (p.control_dim != 1)
    throw std::invalid_argument("adjoint_gradient_check: scalar controls only");
  const int n = p.state_dim;

  EvaluationResult base = evaluate(p, grid, control);
  Trajectory packed(grid, n + 2);
  for (int k = 0; k <= grid.n_steps; ++k) {
    std::span<const double> s = base.states.at(k);
    std::span<double> dst = packed.at(k);
    std::copy(s.begin(), s.end(), dst.begin());
    dst[n + 1] = control.at(k, 0);
  }
  BackwardRhs bck_rhs = [&](double t, std::span<const double> lam, std::span<const double> fwd,
                            std::span<double> out) {
    costate_rhs(t, fwd.first(n), fwd[n], lam, fwd.subspan(n + 1, 1), out);
  };
  std::vector<double> lamT(n + 1);
  std::span<const double> sT = base.states.at(grid.n_steps);
  costate_terminal(sT.first(n), sT[n], lamT);
  Trajectory costates = integrate_backward(bck_rhs, lamT, grid, packed);

  const double delta = p.smoothing.delta;
  std::vector<int> eligible;
  std::vector<double> lo(1), hi(1);
  for (int k = 1; k < grid.n_steps; ++k) {
    const double t = grid.node(k);
    p.control_lower(t, lo);
    p.control_upper(t, hi);
    const double uk = control.at(k, 0);
    const double width = hi[0] - lo[0];
    if (uk - lo[0] < 1e-3 * width || hi[0] - uk < 1e-3 * width) continue;
    std::span<const double> x = base.states.at(k).first(n);
    const double d = p.peak.value(t, x) - base.states.at(k, n);
    if (d >= -1.25 * delta && d <= 0.05 * delta) continue;  // in or hugging the band
    eligible.push_back(k);
  }

  GradientCheckResult res;
  if (eligible.empty()) return res;
  const int count = std::min<int>(n_samples, static_cast<int>(eligible.size()));
  for (int i = 0; i < count; ++i) {
    const int k = eligible[i * eligible.size() / count];
    const double t = grid.node(k);
    const double uk = control.at(k, 0);
    const double h = 1e-5 * std::max(1.0, std::abs(uk));

    Trajectory pert = control;
    pert.at(k, 0) = uk + h;
    const double j_plus = evaluate(p, grid, pert).breakdown.total_smoothed;
    pert.at(k, 0) = uk - h;
    const double j_minus = evaluate(p, grid, pert).breakdown.total_smoothed;
    const double fd = (j_plus - j_minus) / (2.0 * h);

    std::span<const double> x = base.states.at(k).first(n);
    const double y = base.states.at(k, n);
    const double hu = 1e-6 * std::max(1.0, std::abs(uk));
    std::vector<double> up{uk + hu}, um{uk - hu};
    const double dh_du =
        (hamiltonian(p, t, x, y, up, costates.at(k)) - hamiltonian(p, t, x, y, um, costates.at(k))) /
        (2.0 * hu);
    const double pred = dh_du * grid.dt;

    const double rel = std::abs(fd - pred) / std::max({std::abs(fd), std::abs(pred), 1e-12});
    res.max_rel_error = std::max(res.max_rel_error, rel);
    ++res.n_used;
  }
  return res;
}

ControlUpdate make_grid_maximizer(const CombinedProblem& p, int n_grid, bool use_indicator) {
  if (p.control_dim != 1)
    throw std::invalid_argument("make_grid_maximizer: scalar controls only");
  const CombinedProblem* pp = &p;
  return [pp, n_grid, use_indicator](double t, std::span<const double> x, double y,
                                     std::span<const double> costate, std::span<double> out) {
    std::vector<double> lo(1), hi(1), probe(1);
    pp->control_lower(t, lo);
    pp->control_upper(t, hi);
    double u_best = lo[0];
    double h_best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_grid; ++j) {
      probe[0] = lo[0] + (hi[0] - lo[0]) * j / (n_grid - 1);
      const double h = hamiltonian(*pp, t, x, y, probe, costate, use_indicator);
      if (h > h_best) {
        h_best = h;
        u_best = probe[0];
      }
    }
    // One golden-section refinement pass around the winning cell.
    const double cell = (hi[0] - lo[0]) / (n_grid - 1);
    double a = std::max(lo[0], u_best - cell);
    double b = std::min(hi[0], u_best + cell);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    probe[0] = c1;
    double f1 = hamiltonian(*pp, t, x, y, probe, costate, use_indicator);
    probe[0] = c2;
    double f2 = hamiltonian(*pp, t, x, y, probe, costate, use_indicator);
    for (int it = 0; it < 60 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
      if (f1 >= f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        probe[0] = c1;
        f1 = hamiltonian(*pp, t, x, y, probe, costate, use_indicator);
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        probe[0] = c2;
        f2 = hamiltonian(*pp, t, x, y, probe, costate, use_indicator);
      }
    }
    probe[0] = 0.5 * (a + b);
    const double h_ref = hamiltonian(*pp, t, x, y, probe, costate, use_indicator);
    out[0] = (h_ref > h_best) ? probe[0] : u_best;
  };
}

}  // namespace peakctl
