#include "dipres/classical_bounds.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>

namespace dipres {

double fisher_information(std::span<const double> density, std::span<const double> derivative,
                          double cell_area, double relative_floor) {
  if (density.size() != derivative.size())
    throw std::invalid_argument("fisher_information: density/derivative size mismatch");
  double peak = 0.0;
  for (double v : density) {
    if (v < 0.0) throw std::invalid_argument("fisher_information: negative density");
    peak = std::max(peak, v);
  }
  if (peak == 0.0) return 0.0;
  const double floor = relative_floor * peak;
  double sum = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = density[i];
    if (v < floor || v == 0.0) continue;
    sum += derivative[i] * derivative[i] / v;
  }
  return sum * cell_area;
}

double fisher_information(const ImagePair& pair, double relative_floor) {
  return fisher_information(pair.image.density, pair.dimage_dl, pair.image.grid.cell_area(),
                            relative_floor);
}

namespace {

FisherBreakdown breakdown_from(Modality modality, const std::vector<ImagePair>& images,
                               double floor) {
  FisherBreakdown out;
  out.modality = modality;
  const auto wanted = channels_of(modality);
  for (const auto& pair : images) {
    if (std::find(wanted.begin(), wanted.end(), pair.image.channel) == wanted.end()) continue;
    const double fi = fisher_information(pair, floor);
    out.per_channel.emplace(std::string(channel_name(pair.image.channel)), fi);
    out.total += fi;
  }
  return out;
}

}  // namespace

FisherBreakdown modality_fisher(ImagingModel& model, const Emitter& emitter, double separation_nm,
                                Modality modality) {
  const auto images = model.channel_images(emitter, separation_nm, image_set_of(modality));
  return breakdown_from(modality, images, model.config().intensity_floor);
}

std::vector<FisherBreakdown> modalities_fisher(ImagingModel& model, const Emitter& emitter,
                                               double separation_nm,
                                               std::span<const Modality> modalities) {
  std::vector<FisherBreakdown> out(modalities.size());
  for (ImageSet set : {ImageSet::direct, ImageSet::iii, ImageSet::polarized}) {
    std::optional<std::vector<ImagePair>> images;
    for (std::size_t i = 0; i < modalities.size(); ++i) {
      if (image_set_of(modalities[i]) != set) continue;
      if (!images) images = model.channel_images(emitter, separation_nm, set);
      out[i] = breakdown_from(modalities[i], *images, model.config().intensity_floor);
    }
  }
  return out;
}

double crb(double fi) {
  return fi > 0.0 ? 1.0 / fi : std::numeric_limits<double>::infinity();
}

}  // namespace dipres
