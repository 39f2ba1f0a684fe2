#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

#include "dipres/field_model.hpp"
#include "dipres/zernike.hpp"

namespace dipres {

/// A normalized state and its derivative with respect to the separation.
struct StateWithDerivative {
  Eigen::VectorXcd state;
  Eigen::VectorXcd derivative;
};

/// Normalizes c and carries dc through the normalization:
///   psi = c / |c|,  dpsi = dc / |c| - psi Re<psi, dc / |c|>.
StateWithDerivative normalize_with_derivative(const Eigen::VectorXcd& coefficients,
                                              const Eigen::VectorXcd& d_coefficients);

/// The two one-photon states (x = +l/2 and x = -l/2 emitters).
struct SourcePairStates {
  StateWithDerivative plus;
  StateWithDerivative minus;
};

/// Projects the analytic fields of both emitters and their l-derivatives into
/// `basis` and normalizes them.
SourcePairStates modal_states(const ZernikeBasis& basis, const OpticalConfig& cfg,
                              const DipoleOrientation& orientation, double separation_nm);

struct DensityMatrix {
  Eigen::MatrixXcd rho;
  Eigen::MatrixXcd drho_dl;
};

/// rho = (|psi+><psi+| + |psi-><psi-|) / 2 and its product-rule derivative.
/// Throws std::invalid_argument on mismatched dimensions.
DensityMatrix assemble_density(const SourcePairStates& states);

/// Weights (1, 1, zeta) / (2 + zeta) over the x, y and z dipole densities.
struct IsotropicWeights {
  double x, y, z;
};
IsotropicWeights isotropic_weights(double zeta);

/// The three orientations of the isotropic mixture, in weight order.
std::array<DipoleOrientation, 3> isotropic_orientations();

DensityMatrix assemble_isotropic_density(const ZernikeBasis& basis, const OpticalConfig& cfg,
                                         double separation_nm, double zeta);

struct SldResult {
  Eigen::MatrixXcd sld;           ///< in the basis of the input density
  double qfi = 0.0;               ///< Tr(L^2 rho)
  Eigen::VectorXd eigenvalues;    ///< ascending
  int retained_pairs = 0;         ///< (k, k') pairs with D_k + D_k' above the cutoff
  double eigen_cutoff = 0.0;
};

/// Relative eigenvalue cutoff: pairs with D_k + D_k' <= cutoff * max(D) are
/// treated as the null space.
inline constexpr double kEigenCutoff = 1e-12;

/// Diagonalizes rho, forms the SLD in its eigenbasis, and evaluates
/// Tr(L^2 rho). Throws std::runtime_error if the eigensolver fails.
SldResult compute_sld_qfi(const DensityMatrix& dm);

/// sum over retained pairs of 2 |<k|drho|k'>|^2 / (D_k + D_k'); equal to the
/// QFI but evaluated without forming L.
double qfi_pair_sum(const DensityMatrix& dm);

/// One weighted two-emitter term of a mixture.
struct WeightedPair {
  double weight;
  SourcePairStates states;
};

/// QFI of sum_i w_i rho_i restricted to span{psi+-, dpsi+-} of all terms.
/// Exact: rho and drho both live in that span. Dimension <= 4 * terms.
double low_rank_qfi(std::span<const WeightedPair> terms);

/// Variance bound 1 / qfi. Throws std::domain_error for qfi <= 0.
double qcrb(double qfi);

}  // namespace dipres
