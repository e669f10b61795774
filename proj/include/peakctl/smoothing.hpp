#pragma once

#include <optional>
#include <string>

namespace peakctl {

enum class SmoothingKind { linear, gaussian_band };

// Band profile used to smooth the running-max dynamics. Both kinds return 1
// above the band (d > 0), 0 below it (d < -delta), and interpolate on
// [-delta, 0]: linearly, or with the Gaussian bump exp(-gamma d^2).
struct SmoothingSpec {
  SmoothingKind kind = SmoothingKind::linear;
  double delta = 0.01;
  double gamma = 1.0;  // gaussian_band only

  // Throws std::invalid_argument on delta <= 0 (or gamma <= 0 for the
  // Gaussian profile).
  void validate() const;

  // Non-empty when the Gaussian tail does not decay inside the band
  // (exp(-gamma delta^2) > 0.01), i.e. the profile jumps at d = -delta.
  std::optional<std::string> config_warning() const;
};

// Profile value; continuous on [-delta, 0] up to the Gaussian's lower edge.
double psi(const SmoothingSpec& spec, double d);

// d-derivative of psi. Zero outside the band; at the kinks d in {-delta, 0}
// the band-interior one-sided value is returned.
double dpsi_dd(const SmoothingSpec& spec, double d);

}  // namespace peakctl
