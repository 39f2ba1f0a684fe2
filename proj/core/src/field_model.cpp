#include "dipres/field_model.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace dipres {

std::array<double, 3> dipole_unit_vector(const DipoleOrientation& orientation) {
  const auto o = orientation.canonical();
  const double st = std::sin(o.theta);
  return {st * std::cos(o.phi), st * std::sin(o.phi), std::cos(o.theta)};
}

namespace {

// G(r, phi) . mu for the two transverse rows, with cos/sin of phi supplied so
// grid loops can avoid atan2.
struct TransverseGreen {
  double xx, xy, xz, yy, yz;
};

TransverseGreen transverse_green(double r, double c, double s) {
  const double root = std::sqrt(1.0 - r * r);
  const double apod = 1.0 / std::sqrt(root);  // (1 - r^2)^(-1/4)
  const double off = c * s * (root - 1.0);     // sin(2 phi)(root - 1) / 2
  return {apod * (s * s + c * c * root), apod * off, -apod * r * c,
          apod * (c * c + s * s * root), -apod * r * s};
}

}  // namespace

Eigen::Matrix3d green_tensor(double r, double phi) {
  if (!(r >= 0.0 && r < 1.0))
    throw std::domain_error(fmt::format("green_tensor: r = {} outside [0,1)", r));
  const auto g = transverse_green(r, std::cos(phi), std::sin(phi));
  Eigen::Matrix3d m;
  m << g.xx, g.xy, g.xz,
       g.xy, g.yy, g.yz,
       0.0, 0.0, 0.0;
  return m;
}

Eigen::Matrix2d jones_matrix(double phi) {
  Eigen::Matrix2d j;
  j << std::cos(phi), std::sin(phi),
       std::sin(phi), -std::cos(phi);
  return j;
}

namespace {

template <typename Visit>
void for_each_support_sample(const PupilGrid& grid, Visit&& visit) {
  for (int row = 0; row < grid.side; ++row) {
    const double y = grid.y(row);
    for (int col = 0; col < grid.side; ++col) {
      if (!grid.in_support(row, col)) continue;
      const double x = grid.x(col);
      const double r = std::hypot(x, y);
      const double c = r > 0.0 ? x / r : 1.0;
      const double s = r > 0.0 ? y / r : 0.0;
      visit(grid.index(row, col), x, r, c, s);
    }
  }
}

}  // namespace

FieldWithDerivative bfp_field_with_derivative(const PupilGrid& grid, const OpticalConfig& cfg,
                                              const DipoleOrientation& orientation,
                                              Source source, double separation_nm) {
  const auto mu = dipole_unit_vector(orientation);
  const double k1 = cfg.wavenumber();
  const double offset = 0.5 * sign(source) * separation_nm;
  const double dphase = -0.5 * sign(source) * k1;  // d(phase)/dl per unit x

  FieldWithDerivative out{{grid, ComplexArray(grid.size()), ComplexArray(grid.size())},
                          {grid, ComplexArray(grid.size()), ComplexArray(grid.size())}};
  for_each_support_sample(grid, [&](std::size_t i, double x, double r, double c, double s) {
    const auto g = transverse_green(r, c, s);
    const double ex = g.xx * mu[0] + g.xy * mu[1] + g.xz * mu[2];
    const double ey = g.xy * mu[0] + g.yy * mu[1] + g.yz * mu[2];
    const Complex phase = std::polar(1.0, -k1 * x * offset);
    out.field.ex[i] = ex * phase;
    out.field.ey[i] = ey * phase;
    const Complex factor{0.0, dphase * x};
    out.derivative.ex[i] = factor * out.field.ex[i];
    out.derivative.ey[i] = factor * out.field.ey[i];
  });
  return out;
}

PupilField bfp_field(const PupilGrid& grid, const OpticalConfig& cfg,
                     const DipoleOrientation& orientation, double x_offset_nm) {
  // offset = +l/2 for the plus source with l = 2 * offset
  return bfp_field_with_derivative(grid, cfg, orientation, Source::plus, 2.0 * x_offset_nm).field;
}

PupilField bfp_field_l_derivative(const PupilGrid& grid, const OpticalConfig& cfg,
                                  const DipoleOrientation& orientation, Source source,
                                  double separation_nm) {
  return bfp_field_with_derivative(grid, cfg, orientation, source, separation_nm).derivative;
}

PolarizationSplit radial_azimuthal_split(const PupilField& field) {
  const PupilGrid& grid = field.grid;
  PolarizationSplit out{{grid, ComplexArray(grid.size())}, {grid, ComplexArray(grid.size())}};
  for (int row = 0; row < grid.side; ++row) {
    const double y = grid.y(row);
    for (int col = 0; col < grid.side; ++col) {
      const double x = grid.x(col);
      const double r = std::hypot(x, y);
      const std::size_t i = grid.index(row, col);
      if (r == 0.0) continue;  // the plate axis passes neither port
      const double c = x / r;
      const double s = y / r;
      // rows of J(phi)
      out.radial.values[i] = c * field.ex[i] + s * field.ey[i];
      out.azimuthal.values[i] = s * field.ex[i] - c * field.ey[i];
    }
  }
  return out;
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct ZetaTerms {
  double z_dipole = 0.0;
  double x_dipole = 0.0;
  void add(double r, double c, double s, double weight) {
    const auto g = transverse_green(r, c, s);
    z_dipole += weight * (g.xz * g.xz + g.yz * g.yz);
    x_dipole += weight * (g.xx * g.xx + g.xy * g.xy);
  }
};

}  // namespace

double collection_efficiency_ratio(const OpticalConfig& cfg) {
  cfg.validate();
  const double rmax = cfg.pupil_radius();
  // The integrand is smooth in r on [0, rmax] since rmax < 1; 64 radial nodes
  // converge to machine precision. The azimuthal integrand is a trigonometric
  // polynomial, integrated exactly by the uniform rule.
  constexpr int radial_nodes = 64;
  constexpr int azimuthal_nodes = 32;
  std::vector<double> t, w;
  gauss_legendre(radial_nodes, t, w);
  ZetaTerms terms;
  for (int i = 0; i < radial_nodes; ++i) {
    const double r = 0.5 * rmax * (t[i] + 1.0);
    const double wr = 0.5 * rmax * w[i] * r;
    for (int j = 0; j < azimuthal_nodes; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / azimuthal_nodes;
      terms.add(r, std::cos(phi), std::sin(phi), wr);
    }
  }
  return terms.z_dipole / terms.x_dipole;
}

double collection_efficiency_ratio(const PupilGrid& grid) {
  ZetaTerms terms;
  for_each_support_sample(grid, [&](std::size_t, double, double r, double c, double s) {
    terms.add(r, c, s, 1.0);
  });
  return terms.z_dipole / terms.x_dipole;
}

}  // namespace dipres
