#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "dipres/classical_bounds.hpp"
#include "dipres/quantum_bounds.hpp"
#include "dipres/sweep.hpp"
#include "dipres/validation.hpp"

using namespace dipres;

namespace {

constexpr double kPi = std::numbers::pi;

// tolerances
constexpr double kDirectRatioMin = 5.0, kDirectRatioMax = 20.0;
constexpr double kSaturationMax = 1.10;
constexpr double kAxialLeakMax = 1e-10;
constexpr double kCombinedRatioMax = 2.5;
constexpr double kUnpolarizedFailureMin = 3.0;
constexpr double kAzimuthalRatioMax = 1.5;
constexpr double kNullMax = 1e-20;
constexpr double kOrderingSlack = 1.005;
constexpr double kRankTol = 1e-6, kPixelTol = 0.01, kDerivTol = 1e-6, kSplitTol = 1e-10;
constexpr double kNormTol = 1e-9, kTwoPortTol = 1e-10;
constexpr double kIsotropicOtherMin = 3.0;

struct Point {
  double qfi = 0.0;
  std::map<Modality, double> fi;
  std::map<Channel, double> power;

  double ratio(Modality m) const { return std::sqrt(qfi / fi.at(m)); }
};

class Harness {
 public:
  Harness()
      : cfg_(OpticalConfig::desk()),
        basis_(PupilGrid::from_config(cfg_), cfg_.zernike_order),
        model_(cfg_) {}

  const OpticalConfig& cfg() const { return cfg_; }
  const ZernikeBasis& basis() const { return basis_; }
  ImagingModel& model() { return model_; }

  double qfi(const Emitter& e, double l) {
    if (const auto* o = std::get_if<DipoleOrientation>(&e))
      return compute_sld_qfi(assemble_density(modal_states(basis_, cfg_, o->canonical(), l))).qfi;
    return compute_sld_qfi(assemble_isotropic_density(basis_, cfg_, l, model_.zeta())).qfi;
  }

  Point evaluate(const Emitter& e, double l, const std::vector<Modality>& modalities, bool with_qfi = true) {
    Point p;
    if (with_qfi) p.qfi = qfi(e, l);
    for (ImageSet set : {ImageSet::direct, ImageSet::iii, ImageSet::polarized}) {
      const bool needed = std::any_of(modalities.begin(), modalities.end(),
                                      [&](Modality m) { return image_set_of(m) == set; });
      if (!needed) continue;
      const auto images = model_.channel_images(e, l, set);
      std::map<Channel, double> fi;
      double total = 0.0, dtotal = 0.0;
      for (const auto& img : images) {
        fi[img.image.channel] = fisher_information(img, cfg_.intensity_floor);
        p.power[img.image.channel] = img.image.integral();
        total += img.image.integral();
        dtotal += img.derivative_integral();
      }
      worst_norm_ = std::max(worst_norm_, std::abs(total - 1.0));
      worst_dnorm_ = std::max(worst_dnorm_, std::abs(dtotal));
      ++image_sets_;
      for (Modality m : modalities) {
        if (image_set_of(m) != set) continue;
        double sum = 0.0;
        for (Channel c : channels_of(m)) sum += fi.at(c);
        p.fi[m] = sum;
      }
    }
    if (with_qfi) {
      for (const auto& [m, j] : p.fi) {
        worst_ordering_ = std::max(worst_ordering_, j / p.qfi);
        ++ordering_points_;
      }
      if (p.fi.count(Modality::rphi_iii) && p.fi.count(Modality::r_iii) && p.fi.count(Modality::phi_iii)) {
        const double sum = p.fi[Modality::r_iii] + p.fi[Modality::phi_iii];
        worst_additivity_ = std::max(worst_additivity_, std::abs(p.fi[Modality::rphi_iii] - sum) / sum);
      }
    }
    return p;
  }

  double worst_norm_ = 0.0, worst_dnorm_ = 0.0, worst_ordering_ = 0.0, worst_additivity_ = 0.0;
  int image_sets_ = 0, ordering_points_ = 0;

 private:
  OpticalConfig cfg_;
  ZernikeBasis basis_;
  ImagingModel model_;
};

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds) {
  std::printf("%s criterion %d: %s [%s] (%.0f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Pixel-basis QFI: the normalized support samples of both emitters and their
/// derivatives, reduced to their 4-dimensional span.
double pixel_basis_qfi(const OpticalConfig& cfg, const DipoleOrientation& o, double l) {
  const auto grid = PupilGrid::from_config(cfg);
  const auto n = static_cast<Eigen::Index>(grid.support_count());
  std::vector<Eigen::VectorXcd> v, dv;
  for (Source s : {Source::plus, Source::minus}) {
    const auto f = bfp_field_with_derivative(grid, cfg, o, s, l);
    Eigen::VectorXcd c(2 * n), dc(2 * n);
    Eigen::Index k = 0;
    for (int row = 0; row < grid.side; ++row)
      for (int col = 0; col < grid.side; ++col) {
        if (!grid.in_support(row, col)) continue;
        const auto i = grid.index(row, col);
        c[k] = f.field.ex[i];
        c[n + k] = f.field.ey[i];
        dc[k] = f.derivative.ex[i];
        dc[n + k] = f.derivative.ey[i];
        ++k;
      }
    const double norm = c.norm();
    Eigen::VectorXcd psi = c / norm;
    v.push_back(psi);
    dv.push_back(dc / norm - psi * psi.dot(dc / norm).real());
  }
  Eigen::MatrixXcd span(2 * n, 4);
  span << v[0], v[1], dv[0], dv[1];
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(span).householderQ() *
                             Eigen::MatrixXcd::Identity(2 * n, 4);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(4, 4), drho = rho;
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXcd a = q.adjoint() * v[s], da = q.adjoint() * dv[s];
    rho += 0.5 * a * a.adjoint();
    drho += 0.5 * (da * a.adjoint() + a * da.adjoint());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  const auto& d = es.eigenvalues();
  const Eigen::MatrixXcd m = es.eigenvectors().adjoint() * drho * es.eigenvectors();
  double out = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      if (d[j] + d[k] > 1e-12 * d.maxCoeff()) out += 2 * std::norm(m(j, k)) / (d[j] + d[k]);
  return out;
}

}  // namespace

int main() {
  Harness h;
  const double l10 = snap_separation(10.0, h.cfg().image_pixel_object_nm);
  std::printf("desk profile: pupil grid %d, image DFT %d at %.1f nm, l~10 nm snapped to %.3f nm\n",
              h.cfg().pupil_grid_side, h.cfg().image_fft_side, h.cfg().image_pixel_object_nm, l10);

  std::vector<double> ls;
  for (double l = 5.0; l <= 50.0 + 1e-9; l += 5.0) ls.push_back(l);

  {
    Timer t;
    const DipoleOrientation o{kPi / 2, 0.0};
    bool monotone = true;
    double previous = INFINITY, ratio10 = 0.0;
    std::string sigmas;
    for (auto it = ls.rbegin(); it != ls.rend(); ++it) {
      const auto p = h.evaluate(o, *it, {Modality::direct});
      const double sigma = std::sqrt(crb(p.fi.at(Modality::direct)));
      if (it != ls.rbegin() && !(sigma > previous)) monotone = false;
      previous = sigma;
      if (*it == l10) ratio10 = p.ratio(Modality::direct);
      sigmas += fmt::format("{}{:.4g}", sigmas.empty() ? "" : ",", sigma);
    }
    report(1, "direct imaging of in-plane dipoles degrades as l shrinks", monotone &&
               ratio10 >= kDirectRatioMin && ratio10 <= kDirectRatioMax,
           fmt::format("sigma*sqrtN for l=50..5: {}; ratio at l={} is {:.3f}, required [{}, {}]", sigmas, l10,
                       ratio10, kDirectRatioMin, kDirectRatioMax),
           t.seconds());
  }

  {
    Timer t;
    double worst = 0.0;
    std::string where;
    for (const DipoleOrientation o : {DipoleOrientation{kPi / 2, 0.0}, DipoleOrientation{0.0, 0.0}})
      for (double l : ls) {
        const double r = h.evaluate(o, l, {Modality::iii}).ratio(Modality::iii);
        if (r > worst) {
          worst = r;
          where = fmt::format("theta={:.4f} l={}", o.theta, l);
        }
      }
    report(2, "unpolarized III reaches the quantum bound for in-plane and axial dipoles",
           worst <= kSaturationMax, fmt::format("max ratio {:.4f} at {}, required <= {}", worst, where, kSaturationMax),
           t.seconds());
  }

  {
    Timer t;
    const auto p = h.evaluate(DipoleOrientation{0.0, 0.0}, l10, {Modality::phi_iii, Modality::r_iii, Modality::rphi_iii});
    const double leak = p.power.at(Channel::phi_iii_out1) + p.power.at(Channel::phi_iii_out2);
    const double j = p.fi.at(Modality::phi_iii);
    report(3, "axial dipoles emit no azimuthal light", leak < kAxialLeakMax && j < kAxialLeakMax,
           fmt::format("azimuthal power fraction {:.2e}, azimuthal FI {:.2e} nm^-2", leak, j), t.seconds());
  }

  {
    Timer t;
    double worst = 0.0;
    std::string where;
    std::map<std::pair<double, double>, double> cache;
    for (const auto& o : polar_grid(6)) {
      const auto c = o.canonical();
      auto it = cache.find({c.theta, c.phi});
      if (it == cache.end())
        it = cache.emplace(std::pair{c.theta, c.phi},
                           h.evaluate(c, l10, {Modality::r_iii, Modality::phi_iii, Modality::rphi_iii})
                               .ratio(Modality::rphi_iii))
                 .first;
      if (it->second > worst) {
        worst = it->second;
        where = fmt::format("theta={:.4f} phi={:.4f}", o.theta, o.phi);
      }
    }
    report(4, "combined polarized III stays near the quantum bound over all orientations",
           worst <= kCombinedRatioMax,
           fmt::format("max ratio {:.4f} at {} over 49 orientations, required <= {}", worst, where, kCombinedRatioMax),
           t.seconds());
  }

  {
    Timer t;
    bool ok = true;
    std::string detail;
    for (const DipoleOrientation o : {DipoleOrientation{kPi / 3, kPi / 3}, DipoleOrientation{kPi / 4, kPi / 4}}) {
      const auto p = h.evaluate(o, l10, {Modality::iii, Modality::r_iii, Modality::phi_iii, Modality::rphi_iii});
      const double iii = p.ratio(Modality::iii), phi = p.ratio(Modality::phi_iii);
      ok = ok && iii >= kUnpolarizedFailureMin && phi <= kAzimuthalRatioMax;
      detail += fmt::format("{}({:.4f},{:.4f}): iii {:.3f} (>= {}), phi_iii {:.3f} (<= {})",
                            detail.empty() ? "" : "; ", o.theta, o.phi, iii, kUnpolarizedFailureMin, phi,
                            kAzimuthalRatioMax);
    }
    report(5, "unpolarized III fails at intermediate angles while azimuthal III does not", ok, detail, t.seconds());
  }

  {
    Timer t;
    double worst_x = 0.0, worst_z = 0.0, worst_phi = 0.0;
    for (int k = 0; k <= 6; ++k) {
      const auto p = h.evaluate(DipoleOrientation{kPi / 2, k * kPi / 12}, 0.0, {Modality::iii}, false);
      worst_x = std::max(worst_x, p.power.at(Channel::iii_out1));
    }
    worst_z = h.evaluate(DipoleOrientation{0.0, 0.0}, 0.0, {Modality::iii}, false).power.at(Channel::iii_out2);
    std::map<std::pair<double, double>, bool> seen;
    for (const auto& o : polar_grid(6)) {
      const auto c = o.canonical();
      if (!seen.emplace(std::pair{c.theta, c.phi}, true).second) continue;
      const auto p = h.evaluate(c, 0.0, {Modality::phi_iii}, false);
      worst_phi = std::max(worst_phi, p.power.at(Channel::phi_iii_out2));
    }
    report(6, "exact interferometer nulls at zero separation",
           worst_x < kNullMax && worst_z < kNullMax && worst_phi < kNullMax,
           fmt::format("in-plane out1 {:.2e}, axial out2 {:.2e}, azimuthal out2 {:.2e} (grid max), required < {}",
                       worst_x, worst_z, worst_phi, kNullMax),
           t.seconds());
  }

  double iso_tiny = 0.0, iso_small = 0.0;
  Point iso;
  Timer iso_timer;
  {
    iso_tiny = h.qfi(Isotropic{}, 1e-3);
    iso_small = h.qfi(Isotropic{}, 1e-2);
    iso = h.evaluate(Isotropic{}, l10, {Modality::direct, Modality::r_iii, Modality::phi_iii, Modality::rphi_iii});
  }
  const double iso_seconds = iso_timer.seconds();

  {
    report(7, "no measurement beats the QFI; polarized FIs add",
           h.worst_ordering_ <= kOrderingSlack && h.worst_additivity_ <= 1e-12,
           fmt::format("max J/K {:.5f} over {} (modality, point) pairs (<= {}), max |J_rphi - J_r - J_phi| / sum {:.1e}",
                       h.worst_ordering_, h.ordering_points_, kOrderingSlack, h.worst_additivity_),
           0.0);
  }

  {
    Timer t;
    ValidationOptions v;
    v.cfg = h.cfg();
    v.separation_nm = l10;
    v.include_imaging = false;
    double rank = 0.0, deriv = 0.0, split = 0.0;
    bool modal_ok = true;
    for (const auto& r : run_validation(v)) {
      if (r.name.rfind("QFI evaluations", 0) == 0 || r.name.rfind("field derivative", 0) == 0 ||
          r.name.rfind("radial/azimuthal", 0) == 0)
        modal_ok = modal_ok && r.passed;
    }
    // the validation suite pins the same tolerances; recompute the numbers for the report
    auto tiny = h.cfg();
    tiny.pupil_grid_side = 129;
    double pixel = 0.0;
    for (const DipoleOrientation o : {DipoleOrientation{kPi / 2, 0.0}, DipoleOrientation{0.0, 0.0},
                                      DipoleOrientation{kPi / 3, kPi / 3}, DipoleOrientation{kPi / 4, kPi / 4}}) {
      const auto states = modal_states(h.basis(), h.cfg(), o, l10);
      const double dense = compute_sld_qfi(assemble_density(states)).qfi;
      const WeightedPair term{1.0, states};
      rank = std::max(rank, std::abs(low_rank_qfi(std::span(&term, 1)) - dense) / dense);
      for (double l : {1.0, l10, 50.0}) {
        const double z = compute_sld_qfi(assemble_density(modal_states(h.basis(), h.cfg(), o, l))).qfi;
        pixel = std::max(pixel, std::abs(pixel_basis_qfi(tiny, o, l) - z) / z);
      }
      const auto grid = PupilGrid::from_config(h.cfg());
      const auto f = bfp_field_with_derivative(grid, h.cfg(), o, Source::plus, l10);
      const auto fp = bfp_field_with_derivative(grid, h.cfg(), o, Source::plus, l10 + 1e-3).field;
      const auto fm = bfp_field_with_derivative(grid, h.cfg(), o, Source::plus, l10 - 1e-3).field;
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        err = std::max(err, std::abs((fp.ey[i] - fm.ey[i]) / 2e-3 - f.derivative.ey[i]));
        scale = std::max(scale, std::abs(f.derivative.ey[i]));
      }
      if (scale > 0) deriv = std::max(deriv, err / scale);
      const auto sp = radial_azimuthal_split(f.field);
      double e2 = 0.0, s2 = 0.0;
      for (int row = 0; row < grid.side; ++row)
        for (int col = 0; col < grid.side; ++col) {
          const double x = grid.x(col), y = grid.y(row), r = std::hypot(x, y);
          if (!grid.in_support(row, col) || r == 0.0) continue;
          const double phi = std::atan2(y, x), c = std::sqrt(1 - r * r);
          const Complex ramp = std::polar(1.0, -h.cfg().wavenumber() * x * l10 / 2) / std::sqrt(c);
          const Complex er = ramp * (c * std::sin(o.theta) * std::cos(phi - o.phi) - r * std::cos(o.theta));
          const Complex ep = ramp * std::sin(o.theta) * std::sin(phi - o.phi);
          const auto i = grid.index(row, col);
          e2 = std::max({e2, std::abs(sp.radial.values[i] - er), std::abs(sp.azimuthal.values[i] - ep)});
          s2 = std::max(s2, std::abs(er));
        }
      split = std::max(split, e2 / s2);
    }
    report(8, "independent oracles agree",
           modal_ok && rank < kRankTol && pixel < kPixelTol && deriv < kDerivTol && split < kSplitTol,
           fmt::format("low-rank vs dense {:.1e} (< {}), pixel vs Zernike {:.2e} (< {}), derivative vs FD {:.1e} "
                       "(< {}), E_r/E_phi closed form {:.1e} (< {})",
                       rank, kRankTol, pixel, kPixelTol, deriv, kDerivTol, split, kSplitTol),
           t.seconds());
  }

  {
    Timer t;
    double two_port = 0.0, trace = 0.0, herm = 0.0, min_eig = 0.0;
    const auto grid = PupilGrid::from_config(h.cfg());
    for (const auto& o : polar_grid(3)) {
      const auto f = bfp_field(grid, h.cfg(), o, l10 / 2);
      for (const auto* comp : {&f.ex, &f.ey}) {
        const auto out = iii_fields(*comp, grid.side);
        double in = 0.0, p = 0.0;
        for (std::size_t i = 0; i < comp->size(); ++i) {
          in += std::norm((*comp)[i]);
          p += std::norm(out.out1[i]) + std::norm(out.out2[i]);
        }
        if (in > 0) two_port = std::max(two_port, std::abs(p - in) / in);
      }
      const auto dm = assemble_density(modal_states(h.basis(), h.cfg(), o, l10));
      trace = std::max(trace, std::abs(dm.rho.trace() - 1.0));
      herm = std::max(herm, (dm.rho - dm.rho.adjoint()).norm());
      min_eig = std::min(min_eig, compute_sld_qfi(dm).eigenvalues.minCoeff());
    }
    const bool ok = h.worst_norm_ < kNormTol && h.worst_dnorm_ < kNormTol && two_port < kTwoPortTol &&
                    trace < 1e-12 && herm < 1e-12 && min_eig > -1e-12;
    report(9, "probability and power conservation", ok,
           fmt::format("{} image sets: max |sum I - 1| {:.1e}, max |sum dI| {:.1e} (< {}); two-port {:.1e} (< {}); "
                       "rho |tr-1| {:.1e}, |rho-rho^H| {:.1e}, min eig {:.1e}",
                       h.image_sets_, h.worst_norm_, h.worst_dnorm_, kNormTol, two_port, kTwoPortTol, trace, herm,
                       min_eig),
           t.seconds());
  }

  {
    const double phi = iso.ratio(Modality::phi_iii), r = iso.ratio(Modality::r_iii),
                 direct = iso.ratio(Modality::direct);
    const bool ok = std::isfinite(iso_tiny) && iso_tiny > 0 && std::isfinite(iso_small) && iso_small > 0 &&
                    phi <= kAzimuthalRatioMax && r > kIsotropicOtherMin && direct > kIsotropicOtherMin;
    report(10, "isotropic emitters", ok,
           fmt::format("QFI(l=1e-3) {:.4e}, QFI(l=1e-2) {:.4e} nm^-2; at l={}: phi_iii {:.3f} (<= {}), r_iii {:.3f}, "
                       "direct {:.3f} (> {})",
                       iso_tiny, iso_small, l10, phi, kAzimuthalRatioMax, r, direct, kIsotropicOtherMin),
           iso_seconds);
  }

  std::printf("%d criterion/criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
