#include "dipres/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "dipres/classical_bounds.hpp"
#include "dipres/field_model.hpp"
#include "dipres/imaging.hpp"
#include "dipres/quantum_bounds.hpp"
#include "dipres/zernike.hpp"

namespace dipres {

namespace {

constexpr double kPi = std::numbers::pi;

double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

CheckResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

// Azimuthal averages reduce both collection integrals to elementary ones in
// c = sqrt(1 - r^2).
double zeta_closed_form(double r_max) {
  const double cm = std::sqrt(1.0 - r_max * r_max);
  const double a = 1.0 - cm;
  const double b = 2.0 / 3.0 - cm + cm * cm * cm / 3.0;
  return b / (a - 0.5 * b);
}

double max_relative_field_error(const ComplexArray& a, const ComplexArray& b) {
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? err / scale : err;
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  const OpticalConfig& cfg = options.cfg;
  cfg.validate();
  const double l = options.separation_nm;
  std::vector<CheckResult> out;
  const std::vector<DipoleOrientation> sample{
      {kPi / 2, 0.0}, {0.0, 0.0}, {kPi / 3, kPi / 3}, {kPi / 4, kPi / 4}};

  {
    const double z = collection_efficiency_ratio(cfg);
    const double ref = zeta_closed_form(cfg.pupil_radius());
    const double err = relative_difference(z, ref);
    out.push_back(check("collection ratio matches closed form", err < 1e-6,
                        fmt::format("zeta = {:.9f}, closed form {:.9f}", z, ref)));
  }

  const PupilGrid grid = PupilGrid::from_config(cfg);
  const ZernikeBasis basis(grid, cfg.zernike_order);

  for (const auto& o : sample) {
    const auto label = fmt::format("theta={:.4f} phi={:.4f}", o.theta, o.phi);
    const auto states = modal_states(basis, cfg, o, l);
    const auto dm = assemble_density(states);
    const double trace_err = std::abs(dm.rho.trace() - 1.0);
    const double herm_err = (dm.rho - dm.rho.adjoint()).norm();
    const double dtrace = std::abs(dm.drho_dl.trace());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dm.rho, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    out.push_back(check("density matrix invariants " + label,
                        trace_err < 1e-12 && herm_err < 1e-12 && dtrace < 1e-12 && min_eig > -1e-12,
                        fmt::format("|tr-1| {:.1e}, |rho-rho^H| {:.1e}, |tr drho| {:.1e}, min eig {:.1e}",
                                    trace_err, herm_err, dtrace, min_eig)));

    const double dense = compute_sld_qfi(dm).qfi;
    const double pairs = qfi_pair_sum(dm);
    const WeightedPair term{1.0, states};
    const double low = low_rank_qfi(std::span(&term, 1));
    const double err = std::max(relative_difference(dense, pairs), relative_difference(dense, low));
    out.push_back(check("QFI evaluations agree " + label, err < 1e-6,
                        fmt::format("Tr(L^2 rho) {:.9e}, pair sum {:.9e}, low rank {:.9e}", dense,
                                    pairs, low)));

    const double h = 1e-3;
    const auto f = bfp_field_with_derivative(grid, cfg, o, Source::minus, l);
    const auto fp = bfp_field_with_derivative(grid, cfg, o, Source::minus, l + h).field;
    const auto fm = bfp_field_with_derivative(grid, cfg, o, Source::minus, l - h).field;
    ComplexArray fd(grid.size());
    for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = (fp.ex[i] - fm.ex[i]) / (2 * h);
    const double deriv_err = max_relative_field_error(fd, f.derivative.ex);
    out.push_back(check("field derivative matches central difference " + label, deriv_err < 1e-6,
                        fmt::format("max relative error {:.2e}", deriv_err)));

    const auto split = radial_azimuthal_split(f.field);
    ComplexArray er(grid.size()), ephi(grid.size());
    const double k1 = cfg.wavenumber();
    for (int row = 0; row < grid.side; ++row)
      for (int col = 0; col < grid.side; ++col) {
        if (!grid.in_support(row, col)) continue;
        const double x = grid.x(col), y = grid.y(row);
        const double r = std::hypot(x, y), phi = std::atan2(y, x);
        if (r == 0.0) continue;
        const double root = std::sqrt(1.0 - r * r), apod = 1.0 / std::sqrt(root);
        const Complex phase = std::polar(1.0, k1 * x * l / 2);
        const auto i = grid.index(row, col);
        er[i] = apod * (root * std::sin(o.theta) * std::cos(phi - o.phi) - r * std::cos(o.theta)) * phase;
        ephi[i] = apod * std::sin(o.theta) * std::sin(phi - o.phi) * phase;
      }
    const double split_err = std::max(max_relative_field_error(split.radial.values, er),
                                      max_relative_field_error(split.azimuthal.values, ephi));
    out.push_back(check("radial/azimuthal split matches closed form " + label, split_err < 1e-10,
                        fmt::format("max relative error {:.2e}", split_err)));
  }

  if (!options.include_imaging) return out;

  ImagingModel model(cfg);
  for (const auto& o : sample) {
    const auto label = fmt::format("theta={:.4f} phi={:.4f}", o.theta, o.phi);
    const auto states = modal_states(basis, cfg, o, l);
    const double qfi = compute_sld_qfi(assemble_density(states)).qfi;
    double worst_norm = 0.0, worst_deriv = 0.0, worst_ratio = 0.0;
    for (ImageSet set : {ImageSet::direct, ImageSet::iii, ImageSet::polarized}) {
      const auto images = model.channel_images(o, l, set);
      double total = 0.0, dtotal = 0.0, fi = 0.0;
      for (const auto& p : images) {
        total += p.image.integral();
        dtotal += p.derivative_integral();
        fi += fisher_information(p, cfg.intensity_floor);
      }
      worst_norm = std::max(worst_norm, std::abs(total - 1.0));
      worst_deriv = std::max(worst_deriv, std::abs(dtotal));
      worst_ratio = std::max(worst_ratio, fi / qfi);
    }
    out.push_back(check("channel densities integrate to one " + label,
                        worst_norm < 1e-9 && worst_deriv < 1e-9,
                        fmt::format("|sum-1| {:.1e}, |sum dI| {:.1e}", worst_norm, worst_deriv)));
    out.push_back(check("classical FI below QFI " + label, worst_ratio <= 1.005,
                        fmt::format("max J/K {:.6f}", worst_ratio)));
  }

  {
    const auto iii_x = model.iii_images({kPi / 2, 0.3}, 0.0);
    const auto iii_z = model.iii_images({0.0, 0.0}, 0.0);
    const auto pol = model.polarized_iii_images({kPi / 4, kPi / 4}, 0.0);
    const double n1 = iii_x[0].image.integral(), n2 = iii_z[1].image.integral();
    const double n3 = pol[3].image.integral();
    out.push_back(check("III nulls at zero separation", n1 < 1e-20 && n2 < 1e-20 && n3 < 1e-20,
                        fmt::format("in-plane out1 {:.1e}, axial out2 {:.1e}, azimuthal out2 {:.1e}",
                                    n1, n2, n3)));
  }
  return out;
}

}  // namespace dipres
