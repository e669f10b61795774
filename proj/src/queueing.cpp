#include "peakctl/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "peakctl/parallel.hpp"

namespace peakctl {

void QueueParams::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("QueueParams: T must be positive");
  if (!(u_bar > 0.0 && u_bar <= 1.0))
    throw std::invalid_argument("QueueParams: u_bar must lie in (0, 1]");
  if (rho < 0.0 || sigma < 0.0 || beta < 0.0)
    throw std::invalid_argument("QueueParams: weights must be nonnegative");
  if (x0 < 0.0) throw std::invalid_argument("QueueParams: x0 must be nonnegative");
  alpha.require_positive(0.0, T, "alpha");
  smoothing.validate();
  if (y0 && *y0 < x0 - 1e-12) throw std::invalid_argument("QueueParams: y0 below x0");
}

double service_rate(double alpha, double x, double u) { return (alpha + x) * u; }

double queue_rhs(const QueueParams& prm, double t, double x, double u) {
  const double al = prm.alpha(t);
  return al - service_rate(al, x, u);
}

double congestion_cost(double x) { return x; }

double utilization_cost(const QueueParams& prm, double mu) {
  const double d = mu - prm.mu_id;
  return d * d;
}

CombinedProblem build_problem(const QueueParams& prm) {
  prm.validate();
  CombinedProblem p;
  p.state_dim = 1;
  p.control_dim = 1;
  p.dynamics = [prm](double t, std::span<const double> x, std::span<const double> u,
                     std::span<double> out) { out[0] = queue_rhs(prm, t, x[0], u[0]); };
  p.running_reward = [prm](double t, std::span<const double> x, std::span<const double> u) {
    const double mu = service_rate(prm.alpha(t), x[0], u[0]);
    return -prm.rho * congestion_cost(x[0]) - prm.beta * utilization_cost(prm, mu);
  };
  p.peak.value = [](double, std::span<const double> x) { return x[0]; };
  p.peak.grad_x = [](double, std::span<const double>, std::span<double> g) { g[0] = 1.0; };
  p.peak.dt = [](double, std::span<const double>) { return 0.0; };
  p.terminal_reward = [prm](std::span<const double> x) { return -prm.eta * x[0]; };
  p.sigma = prm.sigma;
  p.control_lower = [](double, std::span<double> lo) { lo[0] = 0.0; };
  p.control_upper = [prm](double, std::span<double> hi) { hi[0] = prm.u_bar; };
  p.smoothing = prm.smoothing;
  p.x0 = {prm.x0};
  p.y0 = prm.y0_effective();
  return p;
}

CostateRhs costate_rhs_queue(const QueueParams& prm, bool indicator_mode) {
  return [prm, indicator_mode](double t, std::span<const double> x, double y,
                               std::span<const double> lam, std::span<const double> u,
                               std::span<double> out) {
    const double al = prm.alpha(t);
    const double mu = service_rate(al, x[0], u[0]);
    const double inflow = std::max(al - mu, 0.0);
    const double d = x[0] - y;
    double psi_v = 0.0, dpsi_v = 0.0;
    if (!indicator_mode) {
      psi_v = psi(prm.smoothing, d);
      dpsi_v = dpsi_dd(prm.smoothing, d);
    } else {
      psi_v = d >= 0.0 ? 1.0 : 0.0;
    }
    const double rising = (al >= mu) ? 1.0 : 0.0;
    out[0] = lam[0] * u[0] - lam[1] * (dpsi_v * inflow - psi_v * u[0] * rising) + prm.rho +
             2.0 * prm.beta * u[0] * (mu - prm.mu_id);
    out[1] = lam[1] * dpsi_v * inflow;
  };
}

CostateTerminal costate_terminal_queue(const QueueParams& prm) {
  return [prm](std::span<const double>, double, std::span<double> out) {
    out[0] = -prm.eta;
    out[1] = -prm.sigma;
  };
}

ControlUpdate control_update_queue(const QueueParams& prm, bool indicator_mode) {
  return [prm, indicator_mode](double t, std::span<const double> x, double y,
                               std::span<const double> lam, std::span<double> out) {
    const double al = prm.alpha(t);
    const double cap = al + x[0];
    if (cap <= 1e-12) {
      out[0] = 0.0;  // service has no effect; x > -alpha restores itself
      return;
    }
    const double d = x[0] - y;
    const double psi_v = indicator_mode ? (d >= 0.0 ? 1.0 : 0.0) : psi(prm.smoothing, d);
    const double lx = lam[0], ly = lam[1];

    auto h_of = [&](double u) {
      const double mu = cap * u;
      return lx * (al - mu) + ly * std::max(al - mu, 0.0) * psi_v -
             prm.beta * utilization_cost(prm, mu);
    };

    const double b = al / cap;  // zero-drift control
    const double b_in = std::min(b, prm.u_bar);
    double best_u = 0.0;
    double best_h = h_of(0.0);
    auto consider = [&](double u) {
      const double h = h_of(u);
      if (h > best_h) {
        best_h = h;
        best_u = u;
      }
    };
    consider(b_in);
    consider(prm.u_bar);
    if (prm.beta > 0.0) {
      const double mu1 = prm.mu_id - (lx + ly * psi_v) / (2.0 * prm.beta);
      consider(std::clamp(mu1 / cap, 0.0, b_in));
      if (b < prm.u_bar) {
        const double mu2 = prm.mu_id - lx / (2.0 * prm.beta);
        consider(std::clamp(mu2 / cap, b, prm.u_bar));
      }
    }
    out[0] = best_u;
  };
}

QueueCaseResult solve_queue(const QueueParams& prm, const FbsConfig& config) {
  CombinedProblem p = build_problem(prm);
  QueueCaseResult res;
  res.sol = solve(p, costate_rhs_queue(prm), costate_terminal_queue(prm),
                  control_update_queue(prm), config);

  const TimeGrid& grid = res.sol.states.grid();
  double prev_g = 0.0, prev_h = 0.0;
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.node(k);
    const double al = prm.alpha(t);
    const double xk = res.sol.states.at(k, 0);
    if (!(xk > -al)) res.state_above_neg_alpha = false;
    const double g = congestion_cost(xk);
    const double h = utilization_cost(prm, service_rate(al, xk, res.sol.control.at(k, 0)));
    if (k > 0) {
      res.integral_g += 0.5 * grid.dt * (prev_g + g);
      res.integral_h += 0.5 * grid.dt * (prev_h + h);
    }
    prev_g = g;
    prev_h = h;
  }
  res.peak = res.sol.breakdown.peak_smoothed;
  return res;
}

std::vector<ParetoRow> pareto_sweep(const QueueParams& base, ParetoMode mode,
                                    const std::vector<double>& weights, const FbsConfig& config,
                                    int n_threads) {
  for (size_t i = 1; i < weights.size(); ++i) {
    if (weights[i] < weights[i - 1])
      throw std::invalid_argument("pareto_sweep: weights must be sorted ascending");
  }
  std::vector<ParetoRow> rows(weights.size());
  parallel_for(static_cast<int>(weights.size()), n_threads, [&](int i) {
    QueueParams prm = base;
    if (mode == ParetoMode::peak_vs_utilization) {
      prm.rho = 0.0;
      prm.sigma = weights[i];
    } else {
      prm.sigma = 0.0;
      prm.rho = weights[i];
    }
    QueueCaseResult r = solve_queue(prm, config);
    rows[i] = {weights[i], r.peak,      r.integral_g,
               r.integral_h, r.sol.converged, r.sol.iterations};
  });
  return rows;
}

int matched_row(const std::vector<ParetoRow>& rows, double target_integral_h) {
  if (rows.empty()) throw std::invalid_argument("matched_row: empty frontier");
  int best = 0;
  double best_err = std::abs(rows[0].integral_h - target_integral_h);
  for (size_t i = 1; i < rows.size(); ++i) {
    const double err = std::abs(rows[i].integral_h - target_integral_h);
    if (err < best_err) {
      best_err = err;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace peakctl
