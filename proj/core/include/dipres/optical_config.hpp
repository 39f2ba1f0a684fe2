#pragma once

#include <numbers>
#include <string>

namespace dipres {

/// Microscope and simulation settings. Defaults are the high-NA oil-immersion
/// objective used throughout (NA 1.45, n = 1.518, 670 nm, 100x) on the full
/// 2049-sample pupil grid; `desk()` trades the pupil grid for speed.
struct OpticalConfig {
  double numerical_aperture = 1.45;
  double immersion_index = 1.518;
  double vacuum_wavelength_nm = 670.0;
  double magnification = 100.0;

  /// Side of the square pupil grid used for modal (quantum) calculations. Odd.
  int pupil_grid_side = 2049;
  /// Fraction of the pupil grid area covered by the support disk.
  double support_fill = 0.60;
  /// Highest Zernike radial order retained in the modal basis.
  int zernike_order = 8;

  /// Image pixel pitch projected back to object space.
  double image_pixel_object_nm = 5.0;
  /// Side of the periodic image-plane DFT. Together with the pixel pitch this
  /// fixes the pupil sampling used for imaging.
  int image_fft_side = 4096;
  /// Square field of view written by image exports (the FI always uses the
  /// full periodic image).
  double image_fov_nm = 4000.0;
  /// Pixels with I < floor * max(I) are dropped from the Fisher sum.
  double intensity_floor = 1e-12;

  /// Wavenumber in the immersion medium, k1 = 2 pi n1 / lambda, in nm^-1.
  double wavenumber() const {
    return 2.0 * std::numbers::pi * immersion_index / vacuum_wavelength_nm;
  }
  /// Radius of the pupil support in unitless back-focal-plane coordinates.
  double pupil_radius() const { return numerical_aperture / immersion_index; }

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  static OpticalConfig paper();
  static OpticalConfig desk();
};

/// Parses a named profile ("paper" or "desk").
OpticalConfig profile_config(const std::string& name);

/// Polar and azimuthal angle of the emission dipole (radians).
struct DipoleOrientation {
  double theta = 0.0;
  double phi = 0.0;

  /// phi is meaningless on the optical axis; canonical() pins it to zero there.
  DipoleOrientation canonical() const {
    return theta == 0.0 ? DipoleOrientation{0.0, 0.0} : *this;
  }
};

}  // namespace dipres
