#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "peakctl/queueing.hpp"

using namespace peakctl;

namespace {

// Arrival bump 12 (1 + |cos(3 pi / 2 + 1.7 pi t)|): large enough that the
// ideal service rate 11.5 is reachable inside the control box.
QueueParams bump_params(double sigma = 0.0, double rho = 0.0) {
  QueueParams prm;
  prm.alpha = SignalSpec{SignalSpec::Kind::abs_cosine, 12.0, 12.0, 1.5 * std::numbers::pi,
                         1.7 * std::numbers::pi};
  prm.sigma = sigma;
  prm.rho = rho;
  return prm;
}

FbsConfig queue_config(int n_steps) {
  FbsConfig cfg;
  cfg.grid = make_grid(0.0, 1.0, n_steps);
  cfg.costate_terminal_mode = CostateTerminalMode::gradient_consistent;
  return cfg;
}

}  // namespace

TEST_CASE("service rate and queue drift") {
  CHECK(service_rate(1.0, 0.5, 0.9) == doctest::Approx(1.35).epsilon(1e-14));
  CHECK(service_rate(1.0, 0.5, 0.0) == 0.0);
  // u = alpha / (alpha + x) serves exactly the arrivals.
  CHECK(service_rate(2.0, 3.0, 2.0 / 5.0) == doctest::Approx(2.0).epsilon(1e-14));

  QueueParams prm;
  prm.alpha = SignalSpec{SignalSpec::Kind::constant, 1.0, 0.0, 0.0, 0.0};
  CHECK(queue_rhs(prm, 0.0, 1.0, 0.9) == doctest::Approx(-0.8).epsilon(1e-14));
  CHECK(queue_rhs(prm, 0.0, 3.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(queue_rhs(prm, 0.0, 1.0, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("cost pieces") {
  QueueParams prm;
  CHECK(congestion_cost(2.0) == 2.0);
  CHECK(utilization_cost(prm, prm.mu_id) == 0.0);
  CHECK(utilization_cost(prm, 10.0) == doctest::Approx(2.25).epsilon(1e-14));

  // Terminal reward -(eta x + sigma y) through the assembled problem.
  QueueParams pterm = bump_params(2.0, 0.0);
  pterm.eta = 1.0;
  CombinedProblem p = build_problem(pterm);
  std::vector<double> xT{1.0};
  // terminal_reward carries only the x-part; the y-part enters via sigma.
  CHECK(p.terminal_reward(xT) - p.sigma * 6.0 == doctest::Approx(-13.0).epsilon(1e-12));

  // Running reward at x = 2 with rho = 1, beta = 0 is -2.
  QueueParams prun = bump_params(0.0, 1.0);
  prun.beta = 0.0;
  CombinedProblem pr = build_problem(prun);
  std::vector<double> x2{2.0};
  std::vector<double> u0{0.0};
  CHECK(pr.running_reward(0.0, x2, u0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("queue costate field") {
  QueueParams prm = bump_params(3.0, 1.0);
  prm.alpha = SignalSpec{SignalSpec::Kind::constant, 2.0, 0.0, 0.0, 0.0};
  CostateRhs rhs = costate_rhs_queue(prm);
  std::vector<double> out(2);

  // Off band, u = 0: every coupling term dies, dlambda_x = rho.
  std::vector<double> x{1.0};
  std::vector<double> lam{0.4, -3.0};
  std::vector<double> uz{0.0};
  rhs(0.0, x, 5.0, lam, uz, out);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out[1] == 0.0);

  // Draining (mu > alpha) keeps only the direct terms.
  std::vector<double> uh{0.9};  // mu = 2.7 > alpha = 2
  rhs(0.0, x, 5.0, lam, uh, out);
  double mu = service_rate(2.0, 1.0, 0.9);
  double expect = 0.4 * 0.9 + 1.0 + 2.0 * prm.beta * 0.9 * (mu - prm.mu_id);
  CHECK(out[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(out[1] == 0.0);

  // On band with alpha - mu = 0.5: dlambda_y = -2.5 sigma for delta = 0.2.
  QueueParams band = bump_params(3.0, 0.0);
  band.alpha = SignalSpec{SignalSpec::Kind::constant, 2.0, 0.0, 0.0, 0.0};
  band.beta = 0.0;
  CostateRhs brhs = costate_rhs_queue(band);
  // mu = 1.5 needs u = 1.5 / (alpha + x) = 0.5 at x = 1.
  std::vector<double> ub{0.5};
  std::vector<double> lam_sig{0.0, -3.0};
  brhs(0.0, x, 1.0, lam_sig, ub, out);  // x - y = 0: inside the band
  CHECK(out[1] == doctest::Approx(-2.5 * 3.0).epsilon(1e-10));
}

TEST_CASE("queue terminal costate is constant") {
  QueueParams prm = bump_params(2.0, 0.0);
  prm.eta = 1.0;
  CostateTerminal term = costate_terminal_queue(prm);
  std::vector<double> out(2);
  std::vector<double> xT{4.2};
  term(xT, 9.9, out);
  CHECK(out[0] == -1.0);
  CHECK(out[1] == -2.0);

  QueueParams zero = bump_params(0.0, 0.0);
  zero.eta = 0.0;
  CostateTerminal tz = costate_terminal_queue(zero);
  tz(xT, 9.9, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("auxiliary costate vanishes identically without a peak weight") {
  QueueParams prm = bump_params(0.0, 0.5);
  FbsConfig cfg = queue_config(300);
  QueueCaseResult r = solve_queue(prm, cfg);
  for (int k = 0; k < cfg.grid.n_nodes(); ++k) CHECK(r.sol.costates.at(k, 1) == 0.0);
}

TEST_CASE("queue control update against a dense grid") {
  QueueParams prm = bump_params(1.3, 0.7);
  CombinedProblem p = build_problem(prm);
  ControlUpdate up = control_update_queue(prm);
  ControlUpdate scan = make_grid_maximizer(p, 1025);
  std::vector<double> u_exact(1), u_scan(1);

  // Costate-free case: the update chases the ideal service rate.
  double t0 = 0.25;
  double alpha = prm.alpha(t0);
  std::vector<double> x1{1.0};
  std::vector<double> lam0{0.0, 0.0};
  up(t0, x1, 5.0, lam0, u_exact);
  double chase = std::clamp(prm.mu_id / (alpha + 1.0), 0.0, prm.u_bar);
  CHECK(u_exact[0] == doctest::Approx(chase).epsilon(1e-10));

  // Linear-in-u Hamiltonian pushes to the cap when lambda_x < 0 off band.
  QueueParams lin = bump_params(0.0, 0.0);
  lin.beta = 0.0;
  ControlUpdate up_lin = control_update_queue(lin);
  std::vector<double> lam_neg{-2.0, 0.0};
  up_lin(t0, x1, 50.0, lam_neg, u_exact);
  CHECK(u_exact[0] == lin.u_bar);

  // Randomized sweep: the exact update must never lose to the dense scan by
  // more than the scan's own resolution allows.
  std::mt19937 rng(13579u);
  std::uniform_real_distribution<double> xs(0.0, 8.0);
  std::uniform_real_distribution<double> dy(0.0, 0.5);
  std::uniform_real_distribution<double> lx(-3.0, 3.0);
  std::uniform_real_distribution<double> ly(-1.3, 0.0);
  std::uniform_real_distribution<double> ts(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double t = ts(rng);
    std::vector<double> x{xs(rng)};
    double y = x[0] + dy(rng);
    std::vector<double> lam{lx(rng), ly(rng)};
    up(t, x, y, lam, u_exact);
    scan(t, x, y, lam, u_scan);
    CHECK(u_exact[0] >= 0.0);
    CHECK(u_exact[0] <= prm.u_bar);
    std::vector<double> cost{lam[0], lam[1]};
    double h_exact = hamiltonian(p, t, x, y, u_exact, cost);
    double h_scan = hamiltonian(p, t, x, y, u_scan, cost);
    CHECK(h_exact >= h_scan - 1e-9 * (1.0 + std::abs(h_scan)));
    CHECK(std::abs(u_exact[0] - u_scan[0]) <= prm.u_bar / 1024.0 + 1e-6);
  }
}

TEST_CASE("service effort beats idling when utilization is all that matters") {
  QueueParams prm = bump_params(0.0, 0.0);
  prm.eta = 0.0;
  FbsConfig cfg = queue_config(400);
  QueueCaseResult r = solve_queue(prm, cfg);
  REQUIRE(r.sol.converged);

  // u == 0 leaves mu = 0, so every h-sample is mu_id^2.
  double idle_h = prm.mu_id * prm.mu_id * prm.T;
  CHECK(r.integral_h <= idle_h);
  CHECK(r.integral_h < 0.5 * idle_h);  // the bump makes mu_id reachable most of the time
  CHECK(r.state_above_neg_alpha);
}

TEST_CASE("queue solution respects box, state floor, and costate range") {
  QueueParams prm = bump_params(5.0, 0.0);
  FbsConfig cfg = queue_config(300);
  QueueCaseResult r = solve_queue(prm, cfg);
  const TimeGrid& grid = cfg.grid;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    CHECK(r.sol.control.at(k, 0) >= 0.0);
    CHECK(r.sol.control.at(k, 0) <= prm.u_bar);
    CHECK(r.sol.states.at(k, 0) > -prm.alpha(grid.node(k)));
    double ly = r.sol.costates.at(k, 1);
    CHECK(ly <= 0.0);
    CHECK(ly >= -prm.sigma - 1e-12);
  }
  CHECK(r.state_above_neg_alpha);

  // The ratchet state never decreases and dominates the tracked state.
  double prev_y = r.sol.states.at(0, 1);
  double run_max = prev_y;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    double y = r.sol.states.at(k, 1);
    CHECK(y >= prev_y - 1e-14);
    run_max = std::max(run_max, r.sol.states.at(k, 0));
    prev_y = y;
  }
  CHECK(r.peak >= run_max - prm.smoothing.delta - 2.0 * grid.dt * 30.0);
}

TEST_CASE("pareto frontiers move the right way") {
  QueueParams prm = bump_params();
  FbsConfig cfg = queue_config(200);
  std::vector<double> weights{0.0, 2.0, 10.0, 50.0};

  std::vector<ParetoRow> peak_rows =
      pareto_sweep(prm, ParetoMode::peak_vs_utilization, weights, cfg);
  REQUIRE(peak_rows.size() == weights.size());
  for (size_t i = 0; i + 1 < peak_rows.size(); ++i) {
    CHECK(peak_rows[i].weight < peak_rows[i + 1].weight);
    CHECK(peak_rows[i + 1].peak <= peak_rows[i].peak + 1e-3);
  }

  std::vector<ParetoRow> cong_rows =
      pareto_sweep(prm, ParetoMode::congestion_vs_utilization, weights, cfg);
  for (size_t i = 0; i + 1 < cong_rows.size(); ++i) {
    CHECK(cong_rows[i + 1].integral_g <= cong_rows[i].integral_g + 1e-3);
  }

  // Heavier state weights demand more service effort on this instance.
  for (size_t i = 0; i + 1 < peak_rows.size(); ++i)
    CHECK(peak_rows[i + 1].integral_h >= peak_rows[i].integral_h - 1e-3);
  for (size_t i = 0; i + 1 < cong_rows.size(); ++i)
    CHECK(cong_rows[i + 1].integral_h >= cong_rows[i].integral_h - 1e-3);
}

TEST_CASE("matched row picks the closest utilization integral") {
  std::vector<ParetoRow> rows(3);
  rows[0].integral_h = 10.0;
  rows[1].integral_h = 24.0;
  rows[2].integral_h = 40.0;
  CHECK(matched_row(rows, 26.1) == 1);
  CHECK(matched_row(rows, 9.0) == 0);
  CHECK(matched_row(rows, 1000.0) == 2);
}

TEST_CASE("queue adjoint gradient check on a half-open valve") {
  QueueParams prm = bump_params(0.0, 0.3);
  // Start the ratchet well above anything reachable so the sampled nodes sit
  // clear of the band; the probe control must be strictly interior to the box.
  prm.y0 = 50.0;
  CombinedProblem p = build_problem(prm);
  TimeGrid grid = make_grid(0.0, 1.0, 400);
  Trajectory u(grid, 1);
  for (int k = 0; k < grid.n_nodes(); ++k) u.at(k, 0) = 0.45;
  GradientCheckResult g = adjoint_gradient_check(p, costate_rhs_queue(prm),
                                                 costate_terminal_queue(prm), grid, u);
  CHECK(g.n_used > 0);
  CHECK(g.max_rel_error < 1e-2);
}

TEST_CASE("queue parameter validation") {
  QueueParams prm = bump_params();
  CHECK_NOTHROW(prm.validate());
  prm.u_bar = 0.0;
  CHECK_THROWS_AS(prm.validate(), std::invalid_argument);
  prm = bump_params();
  prm.x0 = -1.0;
  CHECK_THROWS_AS(prm.validate(), std::invalid_argument);
  prm = bump_params();
  prm.y0 = -0.5;  // below x0
  CHECK_THROWS_AS(prm.validate(), std::invalid_argument);
}
