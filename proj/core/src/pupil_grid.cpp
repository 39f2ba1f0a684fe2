#include "dipres/pupil_grid.hpp"

#include <cmath>
#include <numeric>

namespace dipres {

PupilGrid PupilGrid::from_config(const OpticalConfig& cfg) {
  cfg.validate();
  PupilGrid g;
  g.side = cfg.pupil_grid_side;
  g.support_radius = cfg.pupil_radius();
  // pi R^2 = fill * L^2
  const double extent = g.support_radius * std::sqrt(std::numbers::pi / cfg.support_fill);
  g.spacing = extent / g.side;
  return g;
}

PupilGrid PupilGrid::for_imaging(const OpticalConfig& cfg) {
  cfg.validate();
  PupilGrid g;
  g.support_radius = cfg.pupil_radius();
  g.spacing = cfg.vacuum_wavelength_nm /
              (cfg.immersion_index * cfg.image_pixel_object_nm * cfg.image_fft_side);
  const int half = static_cast<int>(std::floor(g.support_radius / g.spacing));
  g.side = 2 * half + 1;
  return g;
}

bool PupilGrid::in_support(int row, int col) const {
  const double xx = x(col);
  const double yy = y(row);
  return xx * xx + yy * yy <= support_radius * support_radius;
}

std::size_t PupilGrid::support_count() const {
  std::size_t n = 0;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) n += in_support(r, c) ? 1 : 0;
  return n;
}

namespace {
double sum_norm(const ComplexArray& v) {
  return std::accumulate(v.begin(), v.end(), 0.0,
                         [](double acc, const Complex& z) { return acc + std::norm(z); });
}
}  // namespace

double power(const ScalarField& field) { return sum_norm(field.values) * field.grid.cell_area(); }

double power(const PupilField& field) {
  return (sum_norm(field.ex) + sum_norm(field.ey)) * field.grid.cell_area();
}

}  // namespace dipres
