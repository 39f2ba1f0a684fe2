#include "dipres/quantum_bounds.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/core.h>

namespace dipres {

StateWithDerivative normalize_with_derivative(const Eigen::VectorXcd& coefficients,
                                              const Eigen::VectorXcd& d_coefficients) {
  if (coefficients.size() != d_coefficients.size())
    throw std::invalid_argument("normalize_with_derivative: dimension mismatch");
  const double nrm = coefficients.norm();
  if (!(nrm > 0.0)) throw std::domain_error("normalize_with_derivative: zero state");
  StateWithDerivative out;
  out.state = coefficients / nrm;
  const Eigen::VectorXcd scaled = d_coefficients / nrm;
  out.derivative = scaled - out.state * out.state.dot(scaled).real();
  return out;
}

SourcePairStates modal_states(const ZernikeBasis& basis, const OpticalConfig& cfg,
                              const DipoleOrientation& orientation, double separation_nm) {
  const auto plus = bfp_field_with_derivative(basis.grid(), cfg, orientation, Source::plus,
                                              separation_nm);
  const auto minus = bfp_field_with_derivative(basis.grid(), cfg, orientation, Source::minus,
                                               separation_nm);
  const std::array<PupilField, 4> fields{plus.field, plus.derivative, minus.field,
                                         minus.derivative};
  const auto modal = basis.project(fields);
  return {normalize_with_derivative(modal[0].coefficients, modal[1].coefficients),
          normalize_with_derivative(modal[2].coefficients, modal[3].coefficients)};
}

namespace {

void add_pair(DensityMatrix& dm, const SourcePairStates& s, double weight) {
  const double h = 0.5 * weight;
  for (const auto* sd : {&s.plus, &s.minus}) {
    dm.rho.noalias() += h * sd->state * sd->state.adjoint();
    dm.drho_dl.noalias() += h * (sd->derivative * sd->state.adjoint() +
                                 sd->state * sd->derivative.adjoint());
  }
}

Eigen::Index pair_dimension(const SourcePairStates& s) {
  const auto n = s.plus.state.size();
  if (s.plus.derivative.size() != n || s.minus.state.size() != n ||
      s.minus.derivative.size() != n)
    throw std::invalid_argument(fmt::format(
        "assemble_density: dimension mismatch ({}, {}, {}, {})", n, s.plus.derivative.size(),
        s.minus.state.size(), s.minus.derivative.size()));
  return n;
}

}  // namespace

DensityMatrix assemble_density(const SourcePairStates& states) {
  const auto n = pair_dimension(states);
  DensityMatrix dm{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n)};
  add_pair(dm, states, 1.0);
  return dm;
}

IsotropicWeights isotropic_weights(double zeta) {
  if (!(zeta >= 0.0)) throw std::invalid_argument("isotropic_weights: zeta must be >= 0");
  const double total = 2.0 + zeta;
  return {1.0 / total, 1.0 / total, zeta / total};
}

std::array<DipoleOrientation, 3> isotropic_orientations() {
  return {DipoleOrientation{std::numbers::pi / 2, 0.0},
          DipoleOrientation{std::numbers::pi / 2, std::numbers::pi / 2},
          DipoleOrientation{0.0, 0.0}};
}

DensityMatrix assemble_isotropic_density(const ZernikeBasis& basis, const OpticalConfig& cfg,
                                         double separation_nm, double zeta) {
  const auto w = isotropic_weights(zeta);
  const std::array<double, 3> weights{w.x, w.y, w.z};
  const auto orientations = isotropic_orientations();
  const auto n = basis.dimension();
  DensityMatrix dm{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n)};
  for (int i = 0; i < 3; ++i)
    add_pair(dm, modal_states(basis, cfg, orientations[i], separation_nm), weights[i]);
  return dm;
}

namespace {

struct Eigenbasis {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  Eigen::MatrixXcd drho;  // drho in the eigenbasis
  double cutoff;
};

Eigenbasis diagonalize(const DensityMatrix& dm) {
  if (dm.rho.rows() != dm.rho.cols() || dm.drho_dl.rows() != dm.rho.rows() ||
      dm.drho_dl.cols() != dm.rho.cols())
    throw std::invalid_argument("density matrix and derivative must be square and equal-sized");
  // Hermitian parts only; rounding asymmetry is not physical.
  const Eigen::MatrixXcd rho = 0.5 * (dm.rho + dm.rho.adjoint());
  const Eigen::MatrixXcd drho = 0.5 * (dm.drho_dl + dm.drho_dl.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("compute_sld_qfi: Hermitian eigensolver did not converge");
  Eigenbasis e;
  e.values = solver.eigenvalues();
  e.vectors = solver.eigenvectors();
  e.drho = e.vectors.adjoint() * drho * e.vectors;
  e.cutoff = kEigenCutoff * e.values.maxCoeff();
  return e;
}

}  // namespace

SldResult compute_sld_qfi(const DensityMatrix& dm) {
  const Eigenbasis e = diagonalize(dm);
  const auto n = e.values.size();
  Eigen::MatrixXcd sld_eig = Eigen::MatrixXcd::Zero(n, n);
  int kept = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index kp = 0; kp < n; ++kp) {
      const double denom = e.values(k) + e.values(kp);
      if (denom <= e.cutoff) continue;
      sld_eig(k, kp) = 2.0 * e.drho(k, kp) / denom;
      ++kept;
    }
  }
  SldResult out;
  out.sld = e.vectors * sld_eig * e.vectors.adjoint();
  // Tr(L L rho) with rho diagonal in this basis
  double qfi = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    qfi += std::max(e.values(k), 0.0) * (sld_eig.row(k) * sld_eig.col(k)).value().real();
  out.qfi = qfi;
  out.eigenvalues = e.values;
  out.retained_pairs = kept;
  out.eigen_cutoff = e.cutoff;
  return out;
}

double qfi_pair_sum(const DensityMatrix& dm) {
  const Eigenbasis e = diagonalize(dm);
  double qfi = 0.0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    for (Eigen::Index kp = 0; kp < e.values.size(); ++kp) {
      const double denom = e.values(k) + e.values(kp);
      if (denom > e.cutoff) qfi += 2.0 * std::norm(e.drho(k, kp)) / denom;
    }
  return qfi;
}

double low_rank_qfi(std::span<const WeightedPair> terms) {
  if (terms.empty()) throw std::invalid_argument("low_rank_qfi: no terms");
  const auto n = pair_dimension(terms.front().states);
  Eigen::MatrixXcd span_vectors(n, 4 * static_cast<Eigen::Index>(terms.size()));
  Eigen::Index col = 0;
  for (const auto& t : terms) {
    if (pair_dimension(t.states) != n) throw std::invalid_argument("low_rank_qfi: mixed dimensions");
    span_vectors.col(col++) = t.states.plus.state;
    span_vectors.col(col++) = t.states.minus.state;
    span_vectors.col(col++) = t.states.plus.derivative;
    span_vectors.col(col++) = t.states.minus.derivative;
  }
  const auto k = std::min(n, span_vectors.cols());
  // Householder Q is orthonormal even when the spanning set is rank deficient
  // (as it is at l = 0); its columns contain the span either way.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(span_vectors);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);

  DensityMatrix small{Eigen::MatrixXcd::Zero(k, k), Eigen::MatrixXcd::Zero(k, k)};
  for (const auto& t : terms) {
    SourcePairStates reduced{{q.adjoint() * t.states.plus.state, q.adjoint() * t.states.plus.derivative},
                             {q.adjoint() * t.states.minus.state, q.adjoint() * t.states.minus.derivative}};
    add_pair(small, reduced, t.weight);
  }
  return compute_sld_qfi(small).qfi;
}

double qcrb(double qfi) {
  if (!(qfi > 0.0)) throw std::domain_error(fmt::format("qcrb: nonpositive QFI {}", qfi));
  return 1.0 / qfi;
}

}  // namespace dipres
