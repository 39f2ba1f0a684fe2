#include "dipres/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "dipres/export.hpp"
#include "dipres/quantum_bounds.hpp"
#include "dipres/zernike.hpp"

namespace dipres {

namespace fs = std::filesystem;

std::vector<DipoleOrientation> polar_grid(int divisions) {
  if (divisions < 1) throw std::invalid_argument("polar_grid: divisions must be >= 1");
  const double step = std::numbers::pi / (2.0 * divisions);
  std::vector<DipoleOrientation> out;
  for (int t = 0; t <= divisions; ++t)
    for (int p = 0; p <= divisions; ++p) out.push_back({t * step, p * step});
  return out;
}

double snap_separation(double separation_nm, double pitch_nm) {
  if (!(pitch_nm > 0.0)) throw std::invalid_argument("snap_separation: pitch must be positive");
  if (separation_nm <= 0.0) return 0.0;
  return std::max(1.0, std::round(separation_nm / pitch_nm)) * pitch_nm;
}

int default_worker_count() {
  if (const char* env = std::getenv("DIPRES_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1)
      throw std::invalid_argument(fmt::format("DIPRES_WORKERS='{}' is not a positive integer", env));
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void SweepSpec::validate() const {
  cfg.validate();
  if (modalities.empty()) throw std::invalid_argument("sweep: no modalities selected");
  if (emitters.empty()) throw std::invalid_argument("sweep: no orientations selected");
  if (separations_nm.empty()) throw std::invalid_argument("sweep: empty separation list");
  for (double l : separations_nm)
    if (!std::isfinite(l) || l < 0.0)
      throw std::invalid_argument(fmt::format("sweep: invalid separation {} nm", l));
  for (const auto& e : emitters)
    if (const auto* o = std::get_if<DipoleOrientation>(&e))
      if (!std::isfinite(o->theta) || !std::isfinite(o->phi))
        throw std::invalid_argument("sweep: non-finite orientation angle");
  if (workers < 0) throw std::invalid_argument("sweep: negative worker count");
}

double SweepSpec::effective_separation(double requested_nm) const {
  return snap ? snap_separation(requested_nm, cfg.image_pixel_object_nm) : requested_nm;
}

double BoundRow::qcrb_sigma_nm() const {
  return qfi > 0.0 ? 1.0 / std::sqrt(qfi) : std::numeric_limits<double>::infinity();
}

double BoundRow::crb_sigma_nm(std::size_t m) const { return std::sqrt(crb(fisher.at(m).total)); }

double BoundRow::ratio(std::size_t m) const { return crb_sigma_nm(m) / qcrb_sigma_nm(); }

std::vector<Channel> BoundCurve::channels() const {
  std::vector<Channel> out;
  for (Modality m : modalities)
    for (Channel c : channels_of(m))
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

std::string BoundCurve::to_csv() const {
  const auto chans = channels();
  std::string out = "l_nm,qcrb_sigma_sqrtN_nm";
  for (Modality m : modalities) out += fmt::format(",{}_crb_sigma_sqrtN_nm", modality_name(m));
  for (Channel c : chans) out += fmt::format(",{}_fi_per_photon_nm2", channel_name(c));
  out += '\n';
  for (const auto& row : rows) {
    out += format_number(row.l_nm);
    out += ',' + format_number(row.qcrb_sigma_nm());
    for (std::size_t m = 0; m < modalities.size(); ++m) out += ',' + format_number(row.crb_sigma_nm(m));
    for (Channel c : chans) {
      const std::string key(channel_name(c));
      double fi = std::numeric_limits<double>::quiet_NaN();
      for (const auto& fb : row.fisher)
        if (auto it = fb.per_channel.find(key); it != fb.per_channel.end()) {
          fi = it->second;
          break;
        }
      out += ',' + format_number(fi);
    }
    out += '\n';
  }
  return out;
}

namespace {

// Runs body(item, worker) for every item on `workers` threads. The first
// exception stops the remaining work and is rethrown.
template <class Body>
void parallel_for(std::size_t count, int workers, const Body& body,
                  const std::function<void(std::size_t, std::size_t)>& progress) {
  workers = static_cast<int>(std::min<std::size_t>(std::max(workers, 1), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;
  std::size_t done = 0;
  auto run = [&](int worker) {
    for (;;) {
      const std::size_t item = next.fetch_add(1);
      if (item >= count || failed.load()) return;
      try {
        body(item, worker);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
      std::lock_guard lock(mutex);
      ++done;
      if (progress) progress(done, count);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
  }
  if (error) std::rethrow_exception(error);
}

// Shared read-only basis plus per-worker imaging state.
class Evaluator {
 public:
  Evaluator(const SweepSpec& spec, int workers)
      : spec_(spec),
        basis_(PupilGrid::from_config(spec.cfg), spec.cfg.zernike_order),
        models_(static_cast<std::size_t>(workers)) {}

  BoundRow evaluate(const Emitter& emitter, double requested_l, int worker) {
    auto& model = models_[static_cast<std::size_t>(worker)];
    if (!model) model.emplace(spec_.cfg);
    BoundRow row;
    row.requested_l_nm = requested_l;
    row.l_nm = spec_.effective_separation(requested_l);
    Emitter e = emitter;
    if (auto* o = std::get_if<DipoleOrientation>(&e)) {
      *o = o->canonical();
      row.qfi = compute_sld_qfi(assemble_density(modal_states(basis_, spec_.cfg, *o, row.l_nm))).qfi;
    } else {
      row.qfi = compute_sld_qfi(
                    assemble_isotropic_density(basis_, spec_.cfg, row.l_nm, model->zeta()))
                    .qfi;
    }
    row.fisher = modalities_fisher(*model, e, row.l_nm, spec_.modalities);
    return row;
  }

 private:
  const SweepSpec& spec_;
  ZernikeBasis basis_;
  std::vector<std::optional<ImagingModel>> models_;
};

int resolve_workers(const SweepSpec& spec) {
  return spec.workers > 0 ? spec.workers : default_worker_count();
}

std::string emitter_stem(const Emitter& e) {
  if (const auto* o = std::get_if<DipoleOrientation>(&e))
    return fmt::format("theta{:.4f}_phi{:.4f}", o->theta, o->phi);
  return "iso";
}

std::string emitter_title(const Emitter& e) {
  if (const auto* o = std::get_if<DipoleOrientation>(&e))
    return fmt::format("theta = {:.4f}, phi = {:.4f}", o->theta, o->phi);
  return "isotropic emitters";
}

// Removes every file written through it unless commit() was called.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  fs::path path(const std::string& file) const { return dir_ / file; }
  fs::path write(const std::string& file, std::string_view content) {
    const auto p = path(file);
    write_file_atomic(p, content);
    written_.push_back(p);
    return p;
  }
  void track(const fs::path& p) { written_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

}  // namespace

std::vector<BoundCurve> compute_bounds(const SweepSpec& spec) {
  spec.validate();
  const int workers = resolve_workers(spec);
  Evaluator evaluator(spec, workers);
  const std::size_t ns = spec.separations_nm.size();
  const std::size_t total = spec.emitters.size() * ns;
  std::vector<BoundRow> rows(total);
  parallel_for(
      total, workers,
      [&](std::size_t item, int worker) {
        rows[item] = evaluator.evaluate(spec.emitters[item / ns], spec.separations_nm[item % ns], worker);
      },
      spec.progress);
  std::vector<BoundCurve> curves;
  for (std::size_t e = 0; e < spec.emitters.size(); ++e) {
    BoundCurve curve{spec.emitters[e], spec.modalities, {}};
    curve.rows.assign(std::make_move_iterator(rows.begin() + e * ns),
                      std::make_move_iterator(rows.begin() + (e + 1) * ns));
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<BoundCurve> run_sweep(const SweepSpec& spec) {
  auto curves = compute_bounds(spec);
  if (spec.output_dir.empty()) return curves;
  OutputSet out(spec.output_dir);
  for (const auto& curve : curves) {
    const std::string stem = spec.name + "_" + emitter_stem(curve.emitter);
    out.write(stem + ".csv", curve.to_csv());
    std::vector<CurveSeries> series;
    CurveSeries q{"QCRB", {}, {}, true};
    for (const auto& row : curve.rows) {
      q.x.push_back(row.l_nm);
      q.y.push_back(row.qcrb_sigma_nm());
    }
    series.push_back(std::move(q));
    for (std::size_t m = 0; m < curve.modalities.size(); ++m) {
      CurveSeries s{std::string(modality_name(curve.modalities[m])), {}, {}, false};
      for (const auto& row : curve.rows) {
        s.x.push_back(row.l_nm);
        s.y.push_back(row.crb_sigma_nm(m));
      }
      series.push_back(std::move(s));
    }
    out.write(stem + ".svg", render_curve_svg("Separation bounds, " + emitter_title(curve.emitter),
                                              "separation l (nm)", "sigma sqrt(N) (nm)", series));
  }
  out.commit();
  return curves;
}

std::string PolarMap::to_csv() const {
  std::string out = "theta,phi,qcrb_sigma_sqrtN_nm";
  for (Modality m : modalities) out += fmt::format(",{}_ratio", modality_name(m));
  out += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += format_number(orientations[i].theta) + ',' + format_number(orientations[i].phi) + ',' +
           format_number(rows[i].qcrb_sigma_nm());
    for (std::size_t m = 0; m < modalities.size(); ++m) out += ',' + format_number(rows[i].ratio(m));
    out += '\n';
  }
  return out;
}

PolarMap run_polar_map(const SweepSpec& input) {
  SweepSpec spec = input;
  if (spec.emitters.empty())
    for (const auto& o : polar_grid()) spec.emitters.emplace_back(o);
  if (spec.separations_nm.size() != 1)
    throw std::invalid_argument("polar map: exactly one separation is required");
  std::vector<DipoleOrientation> orientations;
  for (const auto& e : spec.emitters) {
    const auto* o = std::get_if<DipoleOrientation>(&e);
    if (!o) throw std::invalid_argument("polar map: isotropic emitters have no orientation");
    orientations.push_back(*o);
  }

  // theta = 0 rows collapse to one orientation
  std::vector<DipoleOrientation> unique;
  std::vector<std::size_t> slot;
  for (const auto& o : orientations) {
    const auto c = o.canonical();
    auto it = std::find_if(unique.begin(), unique.end(),
                           [&](const DipoleOrientation& u) { return u.theta == c.theta && u.phi == c.phi; });
    slot.push_back(static_cast<std::size_t>(it - unique.begin()));
    if (it == unique.end()) unique.push_back(c);
  }
  SweepSpec unique_spec = spec;
  unique_spec.emitters.assign(unique.begin(), unique.end());
  const auto curves = compute_bounds(unique_spec);

  PolarMap map;
  map.requested_l_nm = spec.separations_nm.front();
  map.l_nm = spec.effective_separation(map.requested_l_nm);
  map.modalities = spec.modalities;
  map.orientations = orientations;
  for (std::size_t s : slot) map.rows.push_back(curves[s].rows.front());

  if (spec.output_dir.empty()) return map;
  OutputSet out(spec.output_dir);
  out.write(spec.name + "_polar.csv", map.to_csv());
  const double step = orientations.size() > 1 ? std::numbers::pi / 12 : std::numbers::pi / 2;
  double grid_step = step;
  for (std::size_t i = 1; i < orientations.size(); ++i) {
    const double d = std::abs(orientations[i].phi - orientations[i - 1].phi);
    if (d > 1e-12) grid_step = std::min(grid_step, d);
  }
  for (std::size_t m = 0; m < map.modalities.size(); ++m) {
    std::vector<PolarCell> cells;
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < map.rows.size(); ++i) {
      const double r = map.rows[i].ratio(m);
      cells.push_back({orientations[i].theta, orientations[i].phi, r});
      if (std::isfinite(r)) lo = std::min(lo, r), hi = std::max(hi, r);
    }
    if (!(lo <= hi)) lo = 0, hi = 1;
    const auto name = modality_name(map.modalities[m]);
    out.write(fmt::format("{}_polar_{}.svg", spec.name, name),
              render_polar_svg(fmt::format("{}: sigma_CRB / sigma_QCRB at l = {:.3f} nm", name, map.l_nm),
                               cells, grid_step, lo, hi));
  }
  out.commit();
  return map;
}

std::vector<RenderedChannel> render_images(const SweepSpec& spec) {
  spec.validate();
  if (spec.emitters.size() != 1 || spec.separations_nm.size() != 1)
    throw std::invalid_argument("images: exactly one orientation and one separation are required");
  if (spec.output_dir.empty()) throw std::invalid_argument("images: an output directory is required");
  if (spec.png_previews && !png_supported())
    throw std::invalid_argument("images: this build has no PNG support");
  Emitter emitter = spec.emitters.front();
  if (auto* o = std::get_if<DipoleOrientation>(&emitter)) *o = o->canonical();
  const double l = spec.effective_separation(spec.separations_nm.front());

  ImagingModel model(spec.cfg);
  OutputSet out(spec.output_dir);
  std::vector<RenderedChannel> rendered;
  std::vector<Channel> written;
  for (ImageSet set : {ImageSet::direct, ImageSet::iii, ImageSet::polarized}) {
    std::vector<std::pair<Modality, Channel>> wanted;
    for (Modality m : spec.modalities) {
      if (image_set_of(m) != set) continue;
      for (Channel c : channels_of(m))
        if (std::find(written.begin(), written.end(), c) == written.end()) {
          wanted.emplace_back(m, c);
          written.push_back(c);
        }
    }
    if (wanted.empty()) continue;
    const auto images = model.channel_images(emitter, l, set);
    for (const auto& [m, c] : wanted) {
      const auto& pair = *std::find_if(images.begin(), images.end(),
                                       [&](const ImagePair& p) { return p.image.channel == c; });
      RenderedChannel r{m, c, pair.image.integral(), {}};
      const auto crop = crop_centered(pair.image.grid, pair.image.density, spec.cfg.image_fov_nm);
      const std::string stem = spec.name + "_" + image_stem(c, emitter, l);
      r.files.push_back(out.write(stem + ".pfm", encode_pfm(crop)));
      if (spec.png_previews) {
        const auto p = out.path(stem + ".png");
        write_png_preview(p, crop);
        out.track(p);
        r.files.push_back(p);
      }
      if (spec.csv_images) {
        const auto p = out.path(stem + ".csv");
        write_csv_matrix(p, crop);
        out.track(p);
        r.files.push_back(p);
      }
      rendered.push_back(std::move(r));
    }
  }
  std::string summary = "modality,channel,power_fraction\n";
  for (const auto& r : rendered)
    summary += fmt::format("{},{},{}\n", modality_name(r.modality), channel_name(r.channel),
                           format_number(r.power_fraction));
  out.write(spec.name + "_power.csv", summary);
  out.commit();
  return rendered;
}

}  // namespace dipres
