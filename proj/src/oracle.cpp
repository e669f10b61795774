#include "peakctl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peakctl {

namespace {

// Ranking value for a candidate under the configured criterion.
double score(const OracleCandidate& c, bool rank_by_exact) {
  return rank_by_exact ? c.breakdown.total_exact : c.breakdown.total_smoothed;
}

// True when a should be ranked ahead of b.
bool better(const OracleCandidate& a, const OracleCandidate& b, bool rank_by_exact) {
  const double sa = score(a, rank_by_exact);
  const double sb = score(b, rank_by_exact);
  if (sa != sb) return sa > sb;
  return a.level_index < b.level_index;
}

}  // namespace

int segment_of_node(const TimeGrid& grid, int n_segments, int k) {
  const double span = grid.end - grid.t0;
  const double frac = (grid.node(k) - grid.t0) / span;
  const int seg = static_cast<int>(frac * n_segments);
  return std::clamp(seg, 0, n_segments - 1);
}

Trajectory control_from_levels(const TimeGrid& grid, std::span<const double> levels) {
  const int n_segments = static_cast<int>(levels.size());
  Trajectory u(grid, 1);
  for (int k = 0; k < grid.n_nodes(); ++k) {
    u.at(k)[0] = levels[segment_of_node(grid, n_segments, k)];
  }
  return u;
}

Trajectory project_to_segments(const Trajectory& control, int n_segments) {
  if (n_segments < 1) throw std::invalid_argument("n_segments must be at least 1");
  const TimeGrid& grid = control.grid();
  const int dim = control.dim();
  std::vector<double> sum(static_cast<size_t>(n_segments) * dim, 0.0);
  std::vector<int> count(n_segments, 0);
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const int seg = segment_of_node(grid, n_segments, k);
    ++count[seg];
    auto row = control.at(k);
    for (int c = 0; c < dim; ++c) sum[static_cast<size_t>(seg) * dim + c] += row[c];
  }
  Trajectory out(grid, dim);
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const int seg = segment_of_node(grid, n_segments, k);
    auto row = out.at(k);
    for (int c = 0; c < dim; ++c) {
      row[c] = sum[static_cast<size_t>(seg) * dim + c] / count[seg];
    }
  }
  return out;
}

OracleResult brute_force(const CombinedProblem& p, const OracleConfig& config) {
  if (p.control_dim != 1) {
    throw std::invalid_argument("oracle supports scalar controls only");
  }
  if (config.n_segments < 1) throw std::invalid_argument("n_segments must be at least 1");
  if (config.n_levels < 2) throw std::invalid_argument("n_levels must be at least 2");
  const double combos = std::pow(static_cast<double>(config.n_levels),
                                 static_cast<double>(config.n_segments));
  if (combos > 1e7) {
    throw std::invalid_argument("oracle search space exceeds 1e7 combinations");
  }

  const TimeGrid& grid = config.eval_grid;
  const double seg_len = (grid.end - grid.t0) / config.n_segments;

  // Level grids from the box bounds sampled at segment midpoints.
  std::vector<std::vector<double>> level_values(config.n_segments);
  for (int s = 0; s < config.n_segments; ++s) {
    const double t_mid = grid.t0 + (s + 0.5) * seg_len;
    double lo = 0.0;
    double hi = 0.0;
    p.control_lower(t_mid, std::span<double>(&lo, 1));
    p.control_upper(t_mid, std::span<double>(&hi, 1));
    level_values[s].resize(config.n_levels);
    for (int l = 0; l < config.n_levels; ++l) {
      level_values[s][l] = lo + (hi - lo) * l / (config.n_levels - 1);
    }
  }

  OracleResult result;
  std::vector<int> index(config.n_segments, 0);
  std::vector<double> levels(config.n_segments, 0.0);
  bool done = false;
  while (!done) {
    for (int s = 0; s < config.n_segments; ++s) levels[s] = level_values[s][index[s]];
    OracleCandidate cand;
    cand.level_index = index;
    cand.levels = levels;
    Trajectory u = control_from_levels(grid, levels);
    cand.breakdown = evaluate(p, grid, u).breakdown;
    ++result.n_evaluated;

    auto pos = std::lower_bound(
        result.top.begin(), result.top.end(), cand,
        [&](const OracleCandidate& a, const OracleCandidate& b) {
          return better(a, b, config.rank_by_exact);
        });
    result.top.insert(pos, std::move(cand));
    if (result.top.size() > 5) result.top.pop_back();

    // Odometer advance, last segment fastest; lexicographic enumeration order.
    done = true;
    for (int s = config.n_segments - 1; s >= 0; --s) {
      if (++index[s] < config.n_levels) {
        done = false;
        break;
      }
      index[s] = 0;
    }
  }
  result.best = result.top.front();
  return result;
}

}  // namespace peakctl
