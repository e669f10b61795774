#pragma once

#include <vector>

#include "peakctl/problem.hpp"

namespace peakctl {

// Exhaustive piecewise-constant control search: n_levels uniform levels per
// segment between the box bounds sampled at segment midpoints.
struct OracleConfig {
  int n_segments = 4;
  int n_levels = 9;
  TimeGrid eval_grid;
  bool rank_by_exact = false;  // rank by total_exact instead of total_smoothed
};

struct OracleCandidate {
  std::vector<int> level_index;  // one entry per segment
  std::vector<double> levels;    // control value per segment
  ObjectiveBreakdown breakdown;
};

struct OracleResult {
  OracleCandidate best;
  std::vector<OracleCandidate> top;  // up to 5, best first
  long long n_evaluated = 0;
};

// Throws std::invalid_argument when n_levels^n_segments exceeds 1e7. Ties are
// broken toward the lexicographically smaller level-index vector. Scalar
// controls only.
OracleResult brute_force(const CombinedProblem& p, const OracleConfig& config);

// Segment index of node k under the oracle's segment map.
int segment_of_node(const TimeGrid& grid, int n_segments, int k);

// Projects a nodal control into the piecewise-constant class by averaging the
// node values over each segment.
Trajectory project_to_segments(const Trajectory& control, int n_segments);

// Expands per-segment levels into a nodal control on the grid.
Trajectory control_from_levels(const TimeGrid& grid, std::span<const double> levels);

}  // namespace peakctl
