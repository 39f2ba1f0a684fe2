#pragma once

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "dipres/optical_config.hpp"

namespace dipres::testing {

inline constexpr double kPi = std::numbers::pi;

/// Coarse imaging (512-point DFT at 10 nm pitch, 23-sample pupil) for
/// invariant checks that hold at any sampling.
inline OpticalConfig small_config() {
  OpticalConfig cfg = OpticalConfig::desk();
  cfg.pupil_grid_side = 257;
  cfg.image_fft_side = 512;
  cfg.image_pixel_object_nm = 10.0;
  cfg.image_fov_nm = 1000.0;
  return cfg;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

}  // namespace dipres::testing
