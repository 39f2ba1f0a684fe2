#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "dipres/optical_config.hpp"

namespace dipres {

using Complex = std::complex<double>;
using ComplexArray = std::vector<Complex>;

/// Square, odd-sided sampling of the back focal plane in unitless
/// coordinates. The center sample sits on the optical axis, so coordinate
/// inversions are exact index permutations. Storage is row-major with rows
/// along y.
struct PupilGrid {
  int side = 0;
  double spacing = 0.0;         ///< sample pitch in unitless pupil coordinates
  double support_radius = 0.0;  ///< NA / n1

  /// Grid for modal calculations: the support disk covers `support_fill` of
  /// the grid area.
  static PupilGrid from_config(const OpticalConfig& cfg);
  /// Grid for imaging: the spacing is chosen so that a periodic DFT of side
  /// `image_fft_side` yields exactly `image_pixel_object_nm` object-space
  /// pixels. Only the samples covering the support are kept.
  static PupilGrid for_imaging(const OpticalConfig& cfg);

  int center() const { return (side - 1) / 2; }
  std::size_t size() const { return static_cast<std::size_t>(side) * side; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * side + col;
  }
  double x(int col) const { return (col - center()) * spacing; }
  double y(int row) const { return (row - center()) * spacing; }
  double cell_area() const { return spacing * spacing; }
  /// Binary mask: a cell belongs to the support when its center does.
  bool in_support(int row, int col) const;
  std::size_t support_count() const;
};

/// One scalar (single polarization) component sampled on a pupil grid.
struct ScalarField {
  PupilGrid grid;
  ComplexArray values;
};

/// Transverse back-focal-plane field; the z component vanishes identically.
struct PupilField {
  PupilGrid grid;
  ComplexArray ex;
  ComplexArray ey;
};

/// Sum of |value|^2 times the cell area.
double power(const ScalarField& field);
double power(const PupilField& field);

/// f(x,y) -> f(-x,y), f(x,-y) and f(-x,-y) on a centered odd grid.
template <typename T>
std::vector<T> flip_x(const std::vector<T>& values, int side) {
  std::vector<T> out(values.size());
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      out[static_cast<std::size_t>(r) * side + c] =
          values[static_cast<std::size_t>(r) * side + (side - 1 - c)];
  return out;
}

template <typename T>
std::vector<T> flip_y(const std::vector<T>& values, int side) {
  std::vector<T> out(values.size());
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      out[static_cast<std::size_t>(r) * side + c] =
          values[static_cast<std::size_t>(side - 1 - r) * side + c];
  return out;
}

template <typename T>
std::vector<T> flip_xy(const std::vector<T>& values, int /*side*/) {
  // Full inversion of a centered grid is a reversal of the flat storage.
  return std::vector<T>(values.rbegin(), values.rend());
}

}  // namespace dipres
