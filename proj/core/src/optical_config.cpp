#include "dipres/optical_config.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace dipres {

void OpticalConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(numerical_aperture > 0.0)) fail("numerical_aperture must be positive");
  if (!(numerical_aperture < immersion_index))
    fail(fmt::format("numerical_aperture ({}) must be below immersion_index ({})",
                     numerical_aperture, immersion_index));
  if (!(vacuum_wavelength_nm > 0.0)) fail("vacuum_wavelength_nm must be positive");
  if (!(magnification > 0.0)) fail("magnification must be positive");
  if (pupil_grid_side < 3 || pupil_grid_side % 2 == 0)
    fail(fmt::format("pupil_grid_side must be odd and >= 3 (got {})", pupil_grid_side));
  if (!(support_fill > 0.0 && support_fill < 1.0)) fail("support_fill must lie in (0,1)");
  if (zernike_order < 0 || zernike_order > 30) fail("zernike_order must lie in [0,30]");
  if (!(image_pixel_object_nm > 0.0)) fail("image_pixel_object_nm must be positive");
  if (image_fft_side < 16 || image_fft_side % 2 != 0)
    fail(fmt::format("image_fft_side must be even and >= 16 (got {})", image_fft_side));
  if (image_fft_side > 16384) fail("image_fft_side exceeds 16384 (padding size overflow)");
  if (!(image_fov_nm > 0.0)) fail("image_fov_nm must be positive");
  if (!(intensity_floor >= 0.0 && intensity_floor < 1.0))
    fail("intensity_floor must lie in [0,1)");

  // The imaging pupil must fit inside the periodic DFT with room to spare,
  // otherwise the image aliases onto itself.
  const double spacing =
      vacuum_wavelength_nm / (immersion_index * image_pixel_object_nm * image_fft_side);
  const int half = static_cast<int>(std::floor(pupil_radius() / spacing));
  if (half < 8)
    fail("image sampling leaves fewer than 8 pupil samples per radius; "
         "increase image_fft_side or decrease image_pixel_object_nm");
  if (2 * half + 1 > image_fft_side / 2)
    fail("pupil support does not fit in half the image DFT; decrease image_fft_side");
}

OpticalConfig OpticalConfig::paper() { return OpticalConfig{}; }

OpticalConfig OpticalConfig::desk() {
  OpticalConfig cfg;
  cfg.pupil_grid_side = 513;
  return cfg;
}

OpticalConfig profile_config(const std::string& name) {
  if (name == "paper") return OpticalConfig::paper();
  if (name == "desk") return OpticalConfig::desk();
  throw std::invalid_argument(fmt::format("unknown profile '{}' (expected paper|desk)", name));
}

}  // namespace dipres
