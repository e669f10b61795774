#include "peakctl/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace peakctl {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + path + "': " + ec.message());
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const FbsSolution& sol,
                          const Trajectory* price) {
  std::ofstream out = open_out(path);
  const TimeGrid& grid = sol.states.grid();
  const int n_x = sol.states.dim() - 1;  // trailing component is the tracked peak
  const int n_u = sol.control.dim();

  out << "t";
  if (n_x == 1) {
    out << ",x";
  } else {
    for (int c = 0; c < n_x; ++c) out << ",x" << c;
  }
  out << ",y";
  if (n_u == 1) {
    out << ",u";
  } else {
    for (int c = 0; c < n_u; ++c) out << ",u" << c;
  }
  if (n_x == 1) {
    out << ",lambda_x";
  } else {
    for (int c = 0; c < n_x; ++c) out << ",lambda_x" << c;
  }
  out << ",lambda_y";
  if (price) out << ",p";
  out << "\n";

  for (int k = 0; k < grid.n_nodes(); ++k) {
    out << format_g17(grid.node(k));
    auto xs = sol.states.at(k);
    for (int c = 0; c < n_x + 1; ++c) out << "," << format_g17(xs[c]);
    auto us = sol.control.at(k);
    for (int c = 0; c < n_u; ++c) out << "," << format_g17(us[c]);
    auto ls = sol.costates.at(k);
    for (int c = 0; c < n_x + 1; ++c) out << "," << format_g17(ls[c]);
    if (price) out << "," << format_g17(price->at(k)[0]);
    out << "\n";
  }
}

nlohmann::json breakdown_to_json(const ObjectiveBreakdown& b) {
  return nlohmann::json{{"integral_term", b.integral_term},
                        {"peak_smoothed", b.peak_smoothed},
                        {"peak_exact", b.peak_exact},
                        {"terminal_term", b.terminal_term},
                        {"total_smoothed", b.total_smoothed},
                        {"total_exact", b.total_exact}};
}

nlohmann::json solution_diagnostics(const FbsSolution& sol) {
  return nlohmann::json{{"converged", sol.converged},
                        {"iterations", sol.iterations},
                        {"final_update_norm", sol.final_update_norm}};
}

nlohmann::json checks_to_json(const StructuralChecks& c) {
  return nlohmann::json{{"terminal_shortage_ok", c.terminal_shortage_ok},
                        {"monotonicity_fraction", c.monotonicity_fraction},
                        {"monotonicity_nodes", c.monotonicity_nodes},
                        {"monotonicity_empty", c.monotonicity_empty},
                        {"x_threshold", c.x_threshold}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_sigma_frontier_csv(const std::string& path, const std::vector<SigmaRow>& rows) {
  std::ofstream out = open_out(path);
  out << "sigma,revenue,peak,converged,iterations\n";
  for (const SigmaRow& r : rows) {
    out << format_g17(r.sigma) << "," << format_g17(r.revenue) << "," << format_g17(r.peak)
        << "," << (r.converged ? 1 : 0) << "," << r.iterations << "\n";
  }
}

void write_pareto_frontier_csv(const std::string& path, const std::vector<ParetoRow>& rows) {
  std::ofstream out = open_out(path);
  out << "weight,peak,integral_congestion,integral_utilization,converged,iterations\n";
  for (const ParetoRow& r : rows) {
    out << format_g17(r.weight) << "," << format_g17(r.peak) << ","
        << format_g17(r.integral_g) << "," << format_g17(r.integral_h) << ","
        << (r.converged ? 1 : 0) << "," << r.iterations << "\n";
  }
}

}  // namespace peakctl
