#include "dipres/tube_lens.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace dipres {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftw_complex* data = nullptr;
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};
}  // namespace

struct TubeLens::Impl {
  PupilGrid pupil;
  ImageGrid image;
  int n;
  int s;
  FftwBuffer columns;  // s x n: pupil columns transformed along y
  FftwBuffer field;    // n x n
  FftwBuffer d_field;  // n x n
  fftw_plan column_plan = nullptr;
  fftw_plan row_plan = nullptr;
  fftw_plan d_row_plan = nullptr;

  explicit Impl(const OpticalConfig& cfg)
      : pupil(PupilGrid::for_imaging(cfg)),
        image{cfg.image_fft_side, cfg.image_pixel_object_nm},
        n(cfg.image_fft_side),
        s(pupil.side),
        columns(static_cast<std::size_t>(s) * n),
        field(static_cast<std::size_t>(n) * n),
        d_field(static_cast<std::size_t>(n) * n) {
    std::lock_guard lock(planner_mutex());
    int len[1] = {n};
    column_plan = fftw_plan_many_dft(1, len, s, columns.data, nullptr, 1, n, columns.data, nullptr,
                                     1, n, FFTW_BACKWARD, FFTW_ESTIMATE);
    row_plan = fftw_plan_many_dft(1, len, n, field.data, nullptr, 1, n, field.data, nullptr, 1, n,
                                  FFTW_BACKWARD, FFTW_ESTIMATE);
    d_row_plan = fftw_plan_many_dft(1, len, n, d_field.data, nullptr, 1, n, d_field.data, nullptr,
                                    1, n, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!column_plan || !row_plan || !d_row_plan) throw std::runtime_error("FFTW planning failed");
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(column_plan);
    fftw_destroy_plan(row_plan);
    fftw_destroy_plan(d_row_plan);
  }

  // Separable transform that skips the zero rows/columns of the padded pupil:
  // y-transforms of the s pupil columns, scatter, then x-transforms of all
  // n rows.
  void transform(std::span<const Complex> values, fftw_complex* out, fftw_plan plan) {
    if (values.size() != pupil.size())
      throw std::invalid_argument("TubeLens: pupil field has the wrong size");
    const int half = pupil.center();
    std::memset(columns.data, 0, sizeof(fftw_complex) * static_cast<std::size_t>(s) * n);
    for (int row = 0; row < s; ++row) {
      const int wrapped = image.wrap(row - half);
      for (int col = 0; col < s; ++col) {
        const Complex v = values[pupil.index(row, col)];
        auto* dst = columns.data[static_cast<std::size_t>(col) * n + wrapped];
        dst[0] = v.real();
        dst[1] = v.imag();
      }
    }
    fftw_execute(column_plan);

    std::memset(out, 0, sizeof(fftw_complex) * static_cast<std::size_t>(n) * n);
    for (int col = 0; col < s; ++col) {
      const int wrapped = image.wrap(col - half);
      const fftw_complex* src = columns.data + static_cast<std::size_t>(col) * n;
      for (int yq = 0; yq < n; ++yq) {
        out[static_cast<std::size_t>(yq) * n + wrapped][0] = src[yq][0];
        out[static_cast<std::size_t>(yq) * n + wrapped][1] = src[yq][1];
      }
    }
    fftw_execute(plan);
  }
};

TubeLens::TubeLens(const OpticalConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
TubeLens::~TubeLens() = default;
TubeLens::TubeLens(TubeLens&&) noexcept = default;
TubeLens& TubeLens::operator=(TubeLens&&) noexcept = default;

const PupilGrid& TubeLens::pupil_grid() const { return impl_->pupil; }
const ImageGrid& TubeLens::image_grid() const { return impl_->image; }

ComplexArray TubeLens::image_field(std::span<const Complex> pupil_values) {
  impl_->transform(pupil_values, impl_->field.data, impl_->row_plan);
  const std::size_t total = impl_->image.size();
  ComplexArray out(total);
  for (std::size_t i = 0; i < total; ++i)
    out[i] = {impl_->field.data[i][0], impl_->field.data[i][1]};
  return out;
}

void TubeLens::transform_pair(std::span<const Complex> field, std::span<const Complex> d_field) {
  impl_->transform(field, impl_->field.data, impl_->row_plan);
  impl_->transform(d_field, impl_->d_field.data, impl_->d_row_plan);
}

std::span<const Complex> TubeLens::image() const {
  return {reinterpret_cast<const Complex*>(impl_->field.data), impl_->image.size()};
}

std::span<const Complex> TubeLens::d_image() const {
  return {reinterpret_cast<const Complex*>(impl_->d_field.data), impl_->image.size()};
}

void TubeLens::accumulate(std::span<const Complex> field, std::span<const Complex> d_field,
                          double weight, std::span<double> intensity,
                          std::span<double> derivative) {
  const std::size_t total = impl_->image.size();
  if (intensity.size() != total || derivative.size() != total)
    throw std::invalid_argument("TubeLens::accumulate: image buffers have the wrong size");
  transform_pair(field, d_field);
  const auto e = image();
  const auto de = d_image();
  for (std::size_t i = 0; i < total; ++i) {
    intensity[i] += weight * std::norm(e[i]);
    derivative[i] += 2.0 * weight * (std::conj(e[i]) * de[i]).real();
  }
}

}  // namespace dipres
