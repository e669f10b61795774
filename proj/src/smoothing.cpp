#include "peakctl/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace peakctl {

void SmoothingSpec::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("SmoothingSpec: delta must be positive");
  if (kind == SmoothingKind::gaussian_band && !(gamma > 0.0))
    throw std::invalid_argument("SmoothingSpec: gamma must be positive");
}

std::optional<std::string> SmoothingSpec::config_warning() const {
  if (kind == SmoothingKind::gaussian_band && std::exp(-gamma * delta * delta) > 0.01) {
    return "gaussian band does not decay inside the band: exp(-gamma*delta^2) = " +
           std::to_string(std::exp(-gamma * delta * delta)) + " > 0.01";
  }
  return std::nullopt;
}

double psi(const SmoothingSpec& spec, double d) {
  if (d > 0.0) return 1.0;
  if (d < -spec.delta) return 0.0;
  if (spec.kind == SmoothingKind::linear) return 1.0 + d / spec.delta;
  return std::exp(-spec.gamma * d * d);
}

double dpsi_dd(const SmoothingSpec& spec, double d) {
  if (d > 0.0 || d < -spec.delta) return 0.0;
  if (spec.kind == SmoothingKind::linear) return 1.0 / spec.delta;
  return -2.0 * spec.gamma * d * std::exp(-spec.gamma * d * d);
}

}  // namespace peakctl
