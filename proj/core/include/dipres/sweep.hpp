#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dipres/classical_bounds.hpp"
#include "dipres/imaging.hpp"
#include "dipres/optical_config.hpp"

namespace dipres {

/// Orientation grid theta, phi in {0, step, ..., pi/2} with step = pi / (2 divisions),
/// theta-major.
std::vector<DipoleOrientation> polar_grid(int divisions = 6);

/// Rounds l to the nearest multiple of the image pixel pitch. Positive inputs
/// never snap to zero.
double snap_separation(double separation_nm, double pitch_nm);

/// Worker count: DIPRES_WORKERS if set (>= 1), else the hardware concurrency.
int default_worker_count();

struct SweepSpec {
  OpticalConfig cfg = OpticalConfig::desk();
  std::vector<Modality> modalities{kAllModalities.begin(), kAllModalities.end()};
  std::vector<Emitter> emitters;
  std::vector<double> separations_nm;
  bool snap = true;
  /// Output directory; empty runs the computation without writing files.
  std::filesystem::path output_dir;
  std::string name = "dipres";
  bool png_previews = false;
  bool csv_images = false;
  int workers = 0;  ///< 0 selects default_worker_count()
  std::function<void(std::size_t done, std::size_t total)> progress;

  /// Throws std::invalid_argument for an empty or inconsistent spec.
  void validate() const;
  double effective_separation(double requested_nm) const;
};

struct BoundRow {
  double requested_l_nm = 0.0;
  double l_nm = 0.0;  ///< separation used by the computation
  double qfi = 0.0;   ///< nm^-2 per photon
  std::vector<FisherBreakdown> fisher;  ///< in SweepSpec::modalities order

  double qcrb_sigma_nm() const;
  double crb_sigma_nm(std::size_t modality_index) const;
  double ratio(std::size_t modality_index) const;  ///< sigma_crb / sigma_qcrb
};

struct BoundCurve {
  Emitter emitter;
  std::vector<Modality> modalities;
  std::vector<BoundRow> rows;

  std::vector<Channel> channels() const;
  /// Header l_nm, qcrb_sigma_sqrtN_nm, <modality>_crb_sigma_sqrtN_nm...,
  /// <channel>_fi_per_photon_nm2...; one row per separation in input order.
  std::string to_csv() const;
};

/// One bound row per (emitter, separation). Results are independent of the
/// worker count.
std::vector<BoundCurve> compute_bounds(const SweepSpec& spec);

/// compute_bounds plus "<name>_<emitter>.csv" and a matching SVG plot per
/// emitter. Files written before a failure are removed.
std::vector<BoundCurve> run_sweep(const SweepSpec& spec);

struct PolarMap {
  double requested_l_nm = 0.0;
  double l_nm = 0.0;
  std::vector<Modality> modalities;
  std::vector<DipoleOrientation> orientations;
  std::vector<BoundRow> rows;  ///< parallel to orientations

  /// theta, phi, qcrb_sigma_sqrtN_nm, then <modality>_ratio per modality.
  std::string to_csv() const;
};

/// Ratio table over the emitters of `spec` (polar_grid() when none are given)
/// at its single separation, plus one polar heat map per modality.
PolarMap run_polar_map(const SweepSpec& spec);

struct RenderedChannel {
  Modality modality;
  Channel channel;
  double power_fraction;  ///< of the modality's image set
  std::vector<std::filesystem::path> files;
};

/// Writes every channel image of the selected modalities for the single
/// emitter and separation of `spec` (PFM, plus optional PNG and CSV), and a
/// "<name>_power.csv" summary of channel power fractions.
std::vector<RenderedChannel> render_images(const SweepSpec& spec);

}  // namespace dipres
