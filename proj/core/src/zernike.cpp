#include "dipres/zernike.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <fmt/core.h>

namespace dipres {

bool is_valid(ZernikeIndex index) {
  const int am = std::abs(index.m);
  return index.n >= 0 && am <= index.n && (index.n - am) % 2 == 0;
}

namespace {

void require_valid(int n, int m) {
  if (!is_valid({n, m}))
    throw std::invalid_argument(fmt::format("invalid Zernike index (n={}, m={})", n, m));
}

double factorial(int k) { return std::tgamma(k + 1.0); }

// c_k of R_n^m(u) = sum_k c_k u^(n - 2k)
std::vector<double> radial_terms(int n, int m) {
  const int am = std::abs(m);
  std::vector<double> terms;
  for (int k = 0; k <= (n - am) / 2; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    terms.push_back(sgn * factorial(n - k) /
                    (factorial(k) * factorial((n + am) / 2 - k) * factorial((n - am) / 2 - k)));
  }
  return terms;
}

}  // namespace

double zernike_radial(int n, int m, double u) {
  require_valid(n, m);
  if (u < 0.0) throw std::invalid_argument("zernike_radial: negative radius");
  if (u > 1.0) return 0.0;
  const auto terms = radial_terms(n, m);
  double value = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k)
    value += terms[k] * std::pow(u, n - 2 * static_cast<int>(k));
  return value;
}

double zernike_eval(int n, int m, double r, double phi, double support_radius) {
  const double radial = zernike_radial(n, m, r / support_radius);
  return m >= 0 ? radial * std::cos(m * phi) : radial * std::sin(-m * phi);
}

std::vector<ZernikeIndex> zernike_modes(int n_max) {
  if (n_max < 0) throw std::invalid_argument("zernike_modes: negative order");
  std::vector<ZernikeIndex> modes;
  for (int n = 0; n <= n_max; ++n)
    for (int m = -n; m <= n; m += 2) modes.push_back({n, m});
  return modes;
}

ModalState ModalState::normalized() const {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw std::domain_error("cannot normalize a zero modal state");
  return {coefficients / nrm, modes_per_polarization};
}

ZernikeBasis::ZernikeBasis(const PupilGrid& grid, int n_max)
    : grid_(grid), n_max_(n_max), indices_(zernike_modes(n_max)) {
  if (n_max > 30) throw std::invalid_argument("ZernikeBasis: n_max above 30 is not supported");
  for (const auto& idx : indices_) radial_coefficients_.push_back(radial_terms(idx.n, idx.m));

  const int b = mode_count();
  raw_to_orthonormal_ = Eigen::MatrixXd::Identity(b, b);
  std::vector<double> raw(b);
  Eigen::VectorXd q(b);

  // Two passes of Cholesky orthonormalization. Each pass is Gram-Schmidt in
  // mode order expressed through the Gram matrix of the current modes; the
  // second pass removes the rounding left by the first.
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(b, b);
    for (int row = 0; row < grid_.side; ++row) {
      for (int col = 0; col < grid_.side; ++col) {
        if (!grid_.in_support(row, col)) continue;
        const double x = grid_.x(col), y = grid_.y(row);
        const double r = std::hypot(x, y);
        raw_values(r / grid_.support_radius, r > 0 ? x / r : 1.0, r > 0 ? y / r : 0.0, raw);
        q = raw_to_orthonormal_ * Eigen::Map<const Eigen::VectorXd>(raw.data(), b);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(q);
      }
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram *= grid_.cell_area();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(
          "Zernike modes are linearly dependent on this grid; use a finer pupil grid");
    const Eigen::MatrixXd lower = llt.matrixL();
    raw_to_orthonormal_ =
        lower.triangularView<Eigen::Lower>().solve(raw_to_orthonormal_).eval();
  }
}

void ZernikeBasis::raw_values(double u, double c, double s, std::span<double> out) const {
  // cos(m phi), sin(m phi) by angle addition
  std::array<double, 64> cm{}, sm{};
  cm[0] = 1.0;
  sm[0] = 0.0;
  for (int m = 1; m <= n_max_; ++m) {
    cm[m] = cm[m - 1] * c - sm[m - 1] * s;
    sm[m] = sm[m - 1] * c + cm[m - 1] * s;
  }
  std::array<double, 64> upow{};
  upow[0] = 1.0;
  for (int p = 1; p <= n_max_; ++p) upow[p] = upow[p - 1] * u;

  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const auto& idx = indices_[k];
    const auto& terms = radial_coefficients_[k];
    double radial = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) radial += terms[t] * upow[idx.n - 2 * t];
    out[k] = idx.m >= 0 ? radial * cm[idx.m] : radial * sm[-idx.m];
  }
}

ModalState ZernikeBasis::project(const PupilField& field) const {
  return project(std::span<const PupilField>(&field, 1)).front();
}

std::vector<ModalState> ZernikeBasis::project(std::span<const PupilField> fields) const {
  const int b = mode_count();
  for (const auto& f : fields)
    if (f.grid.side != grid_.side || f.grid.spacing != grid_.spacing)
      throw std::invalid_argument("project: field sampled on a different grid than the basis");

  // raw inner products, columns: field0.x, field0.y, field1.x, ...
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(b, 2 * static_cast<Eigen::Index>(fields.size()));
  std::vector<double> raw(b);
  Eigen::RowVectorXcd samples(acc.cols());
  for (int row = 0; row < grid_.side; ++row) {
    for (int col = 0; col < grid_.side; ++col) {
      if (!grid_.in_support(row, col)) continue;
      const double x = grid_.x(col), y = grid_.y(row);
      const double r = std::hypot(x, y);
      raw_values(r / grid_.support_radius, r > 0 ? x / r : 1.0, r > 0 ? y / r : 0.0, raw);
      const std::size_t i = grid_.index(row, col);
      for (std::size_t f = 0; f < fields.size(); ++f) {
        samples(2 * f) = fields[f].ex[i];
        samples(2 * f + 1) = fields[f].ey[i];
      }
      acc.noalias() += Eigen::Map<const Eigen::VectorXd>(raw.data(), b).cast<Complex>() * samples;
    }
  }
  const Eigen::MatrixXcd coeffs = raw_to_orthonormal_.cast<Complex>() * acc * grid_.cell_area();

  std::vector<ModalState> out;
  out.reserve(fields.size());
  for (std::size_t f = 0; f < fields.size(); ++f) {
    ModalState s;
    s.modes_per_polarization = b;
    s.coefficients.resize(2 * b);
    s.coefficients.head(b) = coeffs.col(2 * f);
    s.coefficients.tail(b) = coeffs.col(2 * f + 1);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> ZernikeBasis::mode_values(int k) const {
  if (k < 0 || k >= mode_count()) throw std::out_of_range("mode_values: bad mode index");
  const int b = mode_count();
  std::vector<double> values(grid_.size(), 0.0);
  std::vector<double> raw(b);
  for (int row = 0; row < grid_.side; ++row) {
    for (int col = 0; col < grid_.side; ++col) {
      if (!grid_.in_support(row, col)) continue;
      const double x = grid_.x(col), y = grid_.y(row);
      const double r = std::hypot(x, y);
      raw_values(r / grid_.support_radius, r > 0 ? x / r : 1.0, r > 0 ? y / r : 0.0, raw);
      values[grid_.index(row, col)] =
          raw_to_orthonormal_.row(k).dot(Eigen::Map<const Eigen::VectorXd>(raw.data(), b));
    }
  }
  return values;
}

}  // namespace dipres
