#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "dipres/pupil_grid.hpp"

namespace dipres {

struct ZernikeIndex {
  int n = 0;
  int m = 0;
  friend bool operator==(const ZernikeIndex&, const ZernikeIndex&) = default;
};

bool is_valid(ZernikeIndex index);

/// Radial polynomial R_n^|m|(u), zero for u > 1. Throws std::invalid_argument
/// for |m| > n or odd n - |m|.
double zernike_radial(int n, int m, double u);

/// Z_n^m at pupil radius r (unitless) and azimuth phi; u = r / support_radius.
/// cos(m phi) for m >= 0, sin(|m| phi) for m < 0.
double zernike_eval(int n, int m, double r, double phi, double support_radius);

/// Modes with n <= n_max, ordered by n then ascending m.
std::vector<ZernikeIndex> zernike_modes(int n_max);

/// One-photon state in the Zernike x polarization basis. The first
/// `modes_per_polarization` coefficients belong to x-hat, the rest to y-hat.
struct ModalState {
  Eigen::VectorXcd coefficients;
  int modes_per_polarization = 0;

  double norm() const { return coefficients.norm(); }
  ModalState normalized() const;
};

/// Zernike modes sampled on a pupil grid and orthonormalized under the
/// discrete inner product sum_cells f* g dA, in (n, m) order: mode k is a
/// combination of raw modes 0..k only. The basis stores the triangular map
/// from raw to orthonormal modes; raw values are regenerated per sample, so
/// memory does not grow with the grid.
class ZernikeBasis {
 public:
  ZernikeBasis(const PupilGrid& grid, int n_max);

  const PupilGrid& grid() const { return grid_; }
  int n_max() const { return n_max_; }
  int mode_count() const { return static_cast<int>(indices_.size()); }
  int dimension() const { return 2 * mode_count(); }
  const std::vector<ZernikeIndex>& indices() const { return indices_; }

  /// Discrete inner products of both polarization components with every
  /// orthonormal mode. Not normalized.
  ModalState project(const PupilField& field) const;
  /// Projects several fields in one pass over the grid.
  std::vector<ModalState> project(std::span<const PupilField> fields) const;

  /// Orthonormalized mode k sampled on the grid (zero off the support).
  std::vector<double> mode_values(int k) const;

 private:
  void raw_values(double u, double c, double s, std::span<double> out) const;

  PupilGrid grid_;
  int n_max_;
  std::vector<ZernikeIndex> indices_;
  // Coefficients of R_n^|m| as a polynomial in u, per mode (highest power n).
  std::vector<std::vector<double>> radial_coefficients_;
  Eigen::MatrixXd raw_to_orthonormal_;  // lower triangular
};

}  // namespace dipres
