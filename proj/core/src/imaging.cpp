#include "dipres/imaging.hpp"

#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "dipres/quantum_bounds.hpp"

namespace dipres {

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::direct: return "direct";
    case Channel::iii_out1: return "iii_out1";
    case Channel::iii_out2: return "iii_out2";
    case Channel::r_iii_out1: return "r_iii_out1";
    case Channel::r_iii_out2: return "r_iii_out2";
    case Channel::phi_iii_out1: return "phi_iii_out1";
    case Channel::phi_iii_out2: return "phi_iii_out2";
  }
  return "unknown";
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::direct: return "direct";
    case Modality::iii: return "iii";
    case Modality::r_iii: return "r_iii";
    case Modality::phi_iii: return "phi_iii";
    case Modality::rphi_iii: return "rphi_iii";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  for (auto m : kAllModalities)
    if (modality_name(m) == name) return m;
  throw std::invalid_argument(fmt::format(
      "unknown modality '{}' (expected direct|iii|r_iii|phi_iii|rphi_iii)", name));
}

ImageSet image_set_of(Modality m) {
  switch (m) {
    case Modality::direct: return ImageSet::direct;
    case Modality::iii: return ImageSet::iii;
    default: return ImageSet::polarized;
  }
}

std::vector<Channel> channels_of(ImageSet set) {
  switch (set) {
    case ImageSet::direct: return {Channel::direct};
    case ImageSet::iii: return {Channel::iii_out1, Channel::iii_out2};
    case ImageSet::polarized:
      return {Channel::r_iii_out1, Channel::r_iii_out2, Channel::phi_iii_out1,
              Channel::phi_iii_out2};
  }
  return {};
}

std::vector<Channel> channels_of(Modality m) {
  switch (m) {
    case Modality::r_iii: return {Channel::r_iii_out1, Channel::r_iii_out2};
    case Modality::phi_iii: return {Channel::phi_iii_out1, Channel::phi_iii_out2};
    default: return channels_of(image_set_of(m));
  }
}

double DetectorImage::integral() const {
  return std::accumulate(density.begin(), density.end(), 0.0) * grid.cell_area();
}

double ImagePair::derivative_integral() const {
  return std::accumulate(dimage_dl.begin(), dimage_dl.end(), 0.0) * image.grid.cell_area();
}

InterferometerOutputs iii_fields(std::span<const Complex> field, int side) {
  const ComplexArray f(field.begin(), field.end());
  const auto fxy = flip_xy(f, side);
  const auto fx = flip_x(f, side);
  const auto fy = flip_y(f, side);
  InterferometerOutputs out{ComplexArray(f.size()), ComplexArray(f.size())};
  const Complex half_i{0.0, 0.5};
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.out1[i] = 0.5 * (fxy[i] - f[i]);
    out.out2[i] = half_i * (fx[i] + fy[i]);
  }
  return out;
}

ImagingModel::ImagingModel(const OpticalConfig& cfg)
    : cfg_(cfg), lens_(cfg), zeta_(collection_efficiency_ratio(cfg)) {}

namespace {

// Adds the -l/2 emitter. Its pupil fields are the complex conjugates of the
// +l/2 fields (G and mu are real, the phase ramps are opposite) up to a sign
// for out2, so its image is the +l/2 image inverted through the origin.
void add_mirror_source(const ImageGrid& grid, std::vector<double>& values) {
  const std::size_t total = grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t j = grid.inverted(i);
    if (j < i) continue;
    const double sum = values[i] + values[j];
    values[i] = sum;
    values[j] = sum;  // also handles the self-inverse pixels (j == i): 2x
  }
}

// I += |E|^2 / 2 and dI += Re(conj(E) dE) for the +l/2 emitter.
void add_intensity(Complex e, Complex de, double& intensity, double& derivative) {
  intensity += 0.5 * std::norm(e);
  derivative += (std::conj(e) * de).real();
}

void add_direct(const TubeLens& lens, ImagePair& out) {
  const auto e = lens.image();
  const auto de = lens.d_image();
  for (std::size_t i = 0; i < e.size(); ++i)
    add_intensity(e[i], de[i], out.image.density[i], out.dimage_dl[i]);
}

// A pupil flip is an exact index flip of the periodic image, so both III
// outputs follow from the image of the un-flipped component.
void add_iii(const TubeLens& lens, ImagePair& out1, ImagePair& out2) {
  const ImageGrid& grid = lens.image_grid();
  const auto e = lens.image();
  const auto de = lens.d_image();
  const Complex half_i{0.0, 0.5};
  for (int row = 0; row < grid.side; ++row) {
    const int mrow = grid.wrap(-row);
    for (int col = 0; col < grid.side; ++col) {
      const int mcol = grid.wrap(-col);
      const std::size_t i = grid.index(row, col);
      const std::size_t inv = grid.index(mrow, mcol);
      const std::size_t fx = grid.index(row, mcol);
      const std::size_t fy = grid.index(mrow, col);
      add_intensity(0.5 * (e[inv] - e[i]), 0.5 * (de[inv] - de[i]), out1.image.density[i],
                    out1.dimage_dl[i]);
      add_intensity(half_i * (e[fx] + e[fy]), half_i * (de[fx] + de[fy]),
                    out2.image.density[i], out2.dimage_dl[i]);
    }
  }
}

}  // namespace

std::vector<ImagePair> ImagingModel::orientation_images(const DipoleOrientation& orientation,
                                                        double separation_nm, ImageSet set) {
  const auto fields =
      bfp_field_with_derivative(pupil_grid(), cfg_, orientation, Source::plus, separation_nm);
  const auto channels = channels_of(set);
  const ImageGrid& grid = image_grid();

  std::vector<ImagePair> out;
  out.reserve(channels.size());
  for (Channel c : channels)
    out.push_back({{grid, c, std::vector<double>(grid.size(), 0.0)},
                   std::vector<double>(grid.size(), 0.0)});

  switch (set) {
    case ImageSet::direct:
      lens_.transform_pair(fields.field.ex, fields.derivative.ex);
      add_direct(lens_, out[0]);
      lens_.transform_pair(fields.field.ey, fields.derivative.ey);
      add_direct(lens_, out[0]);
      break;
    case ImageSet::iii:
      lens_.transform_pair(fields.field.ex, fields.derivative.ex);
      add_iii(lens_, out[0], out[1]);
      lens_.transform_pair(fields.field.ey, fields.derivative.ey);
      add_iii(lens_, out[0], out[1]);
      break;
    case ImageSet::polarized: {
      auto split = radial_azimuthal_split(fields.field);
      auto dsplit = radial_azimuthal_split(fields.derivative);
      lens_.transform_pair(split.radial.values, dsplit.radial.values);
      add_iii(lens_, out[0], out[1]);
      lens_.transform_pair(split.azimuthal.values, dsplit.azimuthal.values);
      add_iii(lens_, out[2], out[3]);
      break;
    }
  }

  double total_power = 0.0;
  for (auto& pair : out) {
    add_mirror_source(grid, pair.image.density);
    add_mirror_source(grid, pair.dimage_dl);
    total_power += pair.image.integral();
  }
  if (!(total_power > 0.0))
    throw std::runtime_error("imaging: no collected power (empty pupil support?)");
  const double norm = 1.0 / total_power;
  for (auto& pair : out) {
    for (auto& v : pair.image.density) v *= norm;
    for (auto& v : pair.dimage_dl) v *= norm;
  }
  return out;
}

ImagePair ImagingModel::direct_image(const DipoleOrientation& orientation, double separation_nm) {
  return std::move(orientation_images(orientation, separation_nm, ImageSet::direct).front());
}

std::array<ImagePair, 2> ImagingModel::iii_images(const DipoleOrientation& orientation,
                                                  double separation_nm) {
  auto v = orientation_images(orientation, separation_nm, ImageSet::iii);
  return {std::move(v[0]), std::move(v[1])};
}

std::array<ImagePair, 4> ImagingModel::polarized_iii_images(const DipoleOrientation& orientation,
                                                            double separation_nm) {
  auto v = orientation_images(orientation, separation_nm, ImageSet::polarized);
  return {std::move(v[0]), std::move(v[1]), std::move(v[2]), std::move(v[3])};
}

std::vector<ImagePair> ImagingModel::isotropic_images(double separation_nm, ImageSet set) {
  const auto w = isotropic_weights(zeta_);
  const std::array<double, 3> weights{w.x, w.y, w.z};
  const auto orientations = isotropic_orientations();
  std::vector<ImagePair> sum;
  for (int i = 0; i < 3; ++i) {
    auto images = orientation_images(orientations[i], separation_nm, set);
    if (sum.empty()) {
      sum = std::move(images);
      for (auto& p : sum) {
        for (auto& v : p.image.density) v *= weights[0];
        for (auto& v : p.dimage_dl) v *= weights[0];
      }
      continue;
    }
    for (std::size_t c = 0; c < sum.size(); ++c) {
      auto& acc = sum[c];
      const auto& add = images[c];
      for (std::size_t k = 0; k < acc.image.density.size(); ++k) {
        acc.image.density[k] += weights[i] * add.image.density[k];
        acc.dimage_dl[k] += weights[i] * add.dimage_dl[k];
      }
    }
  }
  return sum;
}

std::vector<ImagePair> ImagingModel::channel_images(const Emitter& emitter, double separation_nm,
                                                    ImageSet set) {
  if (const auto* o = std::get_if<DipoleOrientation>(&emitter))
    return orientation_images(*o, separation_nm, set);
  return isotropic_images(separation_nm, set);
}

}  // namespace dipres
