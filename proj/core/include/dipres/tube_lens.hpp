#pragma once

#include <memory>
#include <span>

#include "dipres/optical_config.hpp"
#include "dipres/pupil_grid.hpp"

namespace dipres {

/// Periodic image-plane grid in object-projected coordinates. Storage is
/// row-major (rows along y) in DFT order: index i maps to coordinate
/// (i < side/2 ? i : i - side) * pitch.
struct ImageGrid {
  int side = 0;
  double pitch_nm = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(side) * side; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * side + col;
  }
  int signed_index(int i) const { return i < side / 2 ? i : i - side; }
  int wrap(int signed_i) const { return ((signed_i % side) + side) % side; }
  double coordinate(int i) const { return signed_index(i) * pitch_nm; }
  double cell_area() const { return pitch_nm * pitch_nm; }
  /// Flat index of the pixel at (-x', -y').
  std::size_t inverted(std::size_t flat) const {
    const int row = static_cast<int>(flat / side), col = static_cast<int>(flat % side);
    return index(wrap(-row), wrap(-col));
  }
};

/// Scaled Fourier transform from the back focal plane to the image plane,
///   E'(x', y') = sum_{x,y} E(x, y) exp(+i k1 (x x' + y y')),
/// with x', y' in object-projected coordinates (the magnification cancels).
/// The pupil is sampled on PupilGrid::for_imaging, which makes the transform
/// an exact unnormalized inverse DFT of side `image_fft_side`, so the image
/// covers one full period and
///   sum |E'|^2 = side^2 * sum |E|^2.
/// Instances own FFT plans and scratch buffers: use one per thread.
class TubeLens {
 public:
  explicit TubeLens(const OpticalConfig& cfg);
  ~TubeLens();
  TubeLens(const TubeLens&) = delete;
  TubeLens& operator=(const TubeLens&) = delete;
  TubeLens(TubeLens&&) noexcept;
  TubeLens& operator=(TubeLens&&) noexcept;

  const PupilGrid& pupil_grid() const;
  const ImageGrid& image_grid() const;

  /// Image-plane field of one scalar pupil component.
  ComplexArray image_field(std::span<const Complex> pupil_values);

  /// Transforms a field and its derivative into the internal image buffers
  /// read by image() and d_image(); valid until the next transform.
  void transform_pair(std::span<const Complex> field, std::span<const Complex> d_field);
  std::span<const Complex> image() const;
  std::span<const Complex> d_image() const;

  /// intensity += weight |E'|^2 and derivative += 2 weight Re(conj(E') dE'),
  /// where E' and dE' are the images of `field` and `d_field`.
  void accumulate(std::span<const Complex> field, std::span<const Complex> d_field, double weight,
                  std::span<double> intensity, std::span<double> derivative);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dipres
