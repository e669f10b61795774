#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "peakctl/fbs.hpp"
#include "peakctl/inventory.hpp"
#include "peakctl/queueing.hpp"

namespace peakctl {

// Round-trip-exact decimal rendering (printf %.17g).
std::string format_g17(double v);

// Creates path (and parents) if missing; throws std::runtime_error on failure.
void ensure_directory(const std::string& path);

// Columns t,x...,y,u...,lambda_x...,lambda_y and optionally a trailing price
// column; one row per grid node, every value %.17g.
void write_trajectory_csv(const std::string& path, const FbsSolution& sol,
                          const Trajectory* price = nullptr);

nlohmann::json breakdown_to_json(const ObjectiveBreakdown& b);

// Convergence diagnostics shared by every run kind.
nlohmann::json solution_diagnostics(const FbsSolution& sol);

nlohmann::json checks_to_json(const StructuralChecks& c);

void write_json(const std::string& path, const nlohmann::json& j);

// sigma,revenue,peak,converged,iterations
void write_sigma_frontier_csv(const std::string& path, const std::vector<SigmaRow>& rows);

// weight,peak,integral_congestion,integral_utilization,converged,iterations
void write_pareto_frontier_csv(const std::string& path, const std::vector<ParetoRow>& rows);

}  // namespace peakctl
