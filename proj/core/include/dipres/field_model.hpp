#pragma once

#include <array>

#include <Eigen/Core>

#include "dipres/optical_config.hpp"
#include "dipres/pupil_grid.hpp"

namespace dipres {

/// Which of the two emitters: the one at x = +l/2 or at x = -l/2.
enum class Source { plus, minus };

constexpr double sign(Source s) { return s == Source::plus ? 1.0 : -1.0; }

/// (sin T cos P, sin T sin P, cos T).
std::array<double, 3> dipole_unit_vector(const DipoleOrientation& orientation);

/// Back-focal-plane Green's tensor of an aplanatic objective with unit field
/// constant. The bottom row is identically zero. Throws std::domain_error for
/// r >= 1.
Eigen::Matrix3d green_tensor(double r, double phi);

/// Vortex half-wave plate: maps r-hat to x-hat and phi-hat to -y-hat.
Eigen::Matrix2d jones_matrix(double phi);

/// Field of a dipole displaced by `x_offset_nm` along x, sampled on `grid`
/// and zero outside the support:
///   E = exp(-i k1 x x_offset) G(r, phi) mu.
PupilField bfp_field(const PupilGrid& grid, const OpticalConfig& cfg,
                     const DipoleOrientation& orientation, double x_offset_nm);

/// d/dl of the field of `source` at separation l (offset sign(source) l / 2):
/// the field times -i k1 x sign(source) / 2.
PupilField bfp_field_l_derivative(const PupilGrid& grid, const OpticalConfig& cfg,
                                  const DipoleOrientation& orientation, Source source,
                                  double separation_nm);

/// Field and its l-derivative from a single evaluation of the tensor.
struct FieldWithDerivative {
  PupilField field;
  PupilField derivative;
};
FieldWithDerivative bfp_field_with_derivative(const PupilGrid& grid, const OpticalConfig& cfg,
                                              const DipoleOrientation& orientation,
                                              Source source, double separation_nm);

/// Output of the VHWP + PBS pair: the x-hat port carries light that was
/// radially polarized, the y-hat port light that was azimuthally polarized.
/// The plate's fast axis is undefined on the optical axis, so the r = 0
/// sample is blocked in both ports.
struct PolarizationSplit {
  ScalarField radial;
  ScalarField azimuthal;
};
PolarizationSplit radial_azimuthal_split(const PupilField& field);

/// Ratio of collection probabilities of a z-oriented and an x-oriented dipole.
/// Evaluated by tensor-product Gauss-Legendre quadrature over the support in
/// polar coordinates with area element r dr dphi.
double collection_efficiency_ratio(const OpticalConfig& cfg);

/// Same ratio as a midpoint sum over the cells of `grid`.
double collection_efficiency_ratio(const PupilGrid& grid);

}  // namespace dipres
