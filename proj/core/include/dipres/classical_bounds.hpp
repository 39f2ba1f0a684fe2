#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dipres/imaging.hpp"

namespace dipres {

/// Relative intensity floor used when none is configured.
inline constexpr double kDefaultIntensityFloor = 1e-12;

/// Per-photon Fisher information of a sampled density about l:
///   J = sum_pixels (dI/dl)^2 / I * cell_area,
/// skipping pixels with I < floor * max(I). Throws std::invalid_argument for
/// negative densities or mismatched sizes.
double fisher_information(std::span<const double> density, std::span<const double> derivative,
                          double cell_area, double relative_floor = kDefaultIntensityFloor);
double fisher_information(const ImagePair& pair, double relative_floor = kDefaultIntensityFloor);

struct FisherBreakdown {
  Modality modality = Modality::direct;
  std::map<std::string, double> per_channel;  ///< nm^-2 per collected photon
  double total = 0.0;
};

/// FI of every channel of `modality` and their sum.
FisherBreakdown modality_fisher(ImagingModel& model, const Emitter& emitter, double separation_nm,
                                Modality modality);

/// Breakdowns for several modalities; each channel image set is generated once
/// and shared by every modality that reads it.
std::vector<FisherBreakdown> modalities_fisher(ImagingModel& model, const Emitter& emitter,
                                               double separation_nm,
                                               std::span<const Modality> modalities);

/// Variance bound 1 / fi, or +infinity when fi <= 0.
double crb(double fi);

}  // namespace dipres
