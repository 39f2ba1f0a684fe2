#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "dipres/export.hpp"
#include "dipres/sweep.hpp"
#include "dipres/validation.hpp"

namespace {

using namespace dipres;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ' && ch != '\t') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(fmt::format("'{}' is not a number", s));
  return v;
}

/// Angles in radians; "pi", "pi/3", "2pi/3" and "2*pi/3" are also accepted.
double parse_angle(const std::string& text) {
  const auto pos = text.find("pi");
  if (pos == std::string::npos) return parse_number(text);
  std::string pre = text.substr(0, pos), post = text.substr(pos + 2);
  if (!pre.empty() && pre.back() == '*') pre.pop_back();
  double v = std::numbers::pi * (pre.empty() ? 1.0 : parse_number(pre));
  if (!post.empty()) {
    if (post.front() != '/') throw std::invalid_argument(fmt::format("bad angle '{}'", text));
    v /= parse_number(post.substr(1));
  }
  return v;
}

/// "a,b,c" or "start:stop:step" (inclusive of stop within rounding).
std::vector<double> parse_separations(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    if (part.find(':') == std::string::npos) {
      out.push_back(parse_number(part));
      continue;
    }
    const auto r = split(part, ':');
    if (r.size() != 3) throw std::invalid_argument(fmt::format("bad range '{}'", part));
    const double a = parse_number(r[0]), b = parse_number(r[1]), step = parse_number(r[2]);
    if (!(step > 0.0) || b < a) throw std::invalid_argument(fmt::format("bad range '{}'", part));
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + i * step);
  }
  return out;
}

std::vector<Modality> parse_modalities(const std::string& text) {
  std::vector<Modality> out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    if (part == "all") return {kAllModalities.begin(), kAllModalities.end()};
    out.push_back(parse_modality(part));
  }
  return out;
}

/// "theta,phi;theta,phi;..."
std::vector<DipoleOrientation> parse_orientations(const std::string& text) {
  std::vector<DipoleOrientation> out;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto tp = split(item, ',');
    if (tp.size() != 2) throw std::invalid_argument(fmt::format("bad orientation '{}'", item));
    out.push_back({parse_angle(tp[0]), parse_angle(tp[1])});
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

struct Options {
  std::string config_file;
  std::string profile;
  std::optional<double> na, n1, wavelength, magnification, support_fill, pixel, fov, floor;
  std::optional<int> pupil_grid, zernike_order, fft_side, workers;
  std::string modalities;
  std::vector<std::string> orientations;
  std::optional<int> polar_divisions;
  bool isotropic = false;
  std::string separations;
  bool no_snap = false;
  std::string out_dir;
  std::string name;
  bool png = false;
  bool csv_images = false;
  bool quiet = false;
};

void add_common(CLI::App& app, Options& o, bool want_emitters) {
  app.add_option("--config", o.config_file, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--profile", o.profile, "Base configuration: desk (pupil grid 513) or paper (2049)");
  app.add_option("--na", o.na, "Numerical aperture");
  app.add_option("--n1", o.n1, "Immersion refractive index");
  app.add_option("--wavelength", o.wavelength, "Vacuum wavelength (nm)");
  app.add_option("--magnification", o.magnification, "Objective magnification");
  app.add_option("--pupil-grid", o.pupil_grid, "Pupil grid side for the modal basis (odd)");
  app.add_option("--support-fill", o.support_fill, "Fraction of the pupil grid covered by the support");
  app.add_option("--zernike-order", o.zernike_order, "Highest Zernike radial order");
  app.add_option("--pixel", o.pixel, "Image pixel pitch in object space (nm)");
  app.add_option("--fft-side", o.fft_side, "Side of the image-plane DFT");
  app.add_option("--fov", o.fov, "Exported image field of view (nm)");
  app.add_option("--floor", o.floor, "Relative intensity floor of the FI sum");
  if (!want_emitters) return;
  app.add_option("--modalities", o.modalities, "Comma list of direct,iii,r_iii,phi_iii,rphi_iii or all");
  app.add_option("--orientation", o.orientations, "Dipole orientation 'theta,phi' in radians (pi/3 etc. allowed); repeatable");
  app.add_option("--polar-grid", o.polar_divisions, "Use the theta, phi grid with pi/(2 N) spacing");
  app.add_flag("--isotropic", o.isotropic, "Isotropic emitters instead of fixed dipoles");
  app.add_option("-l,--separations", o.separations, "Separations in nm: 'a,b,c' and/or 'start:stop:step'");
  app.add_flag("--no-snap", o.no_snap, "Use separations as given instead of snapping to the pixel lattice");
  app.add_option("-o,--out", o.out_dir, "Output directory");
  app.add_option("--name", o.name, "Output file prefix");
  app.add_option("--workers", o.workers, "Worker threads (default: DIPRES_WORKERS or hardware threads)");
  app.add_flag("-q,--quiet", o.quiet, "No progress output");
}

OpticalConfig build_config(const Options& o, std::map<std::string, std::string>& file_keys) {
  OpticalConfig cfg = OpticalConfig::desk();
  if (!o.config_file.empty()) file_keys = load_key_values(o.config_file);
  if (!o.profile.empty()) file_keys.erase("profile");
  if (!o.profile.empty()) cfg = profile_config(o.profile);
  cfg = apply_optical_keys(cfg, file_keys);
  if (o.na) cfg.numerical_aperture = *o.na;
  if (o.n1) cfg.immersion_index = *o.n1;
  if (o.wavelength) cfg.vacuum_wavelength_nm = *o.wavelength;
  if (o.magnification) cfg.magnification = *o.magnification;
  if (o.pupil_grid) cfg.pupil_grid_side = *o.pupil_grid;
  if (o.support_fill) cfg.support_fill = *o.support_fill;
  if (o.zernike_order) cfg.zernike_order = *o.zernike_order;
  if (o.pixel) cfg.image_pixel_object_nm = *o.pixel;
  if (o.fft_side) cfg.image_fft_side = *o.fft_side;
  if (o.fov) cfg.image_fov_nm = *o.fov;
  if (o.floor) cfg.intensity_floor = *o.floor;
  cfg.validate();
  return cfg;
}

SweepSpec build_spec(const Options& o) {
  std::map<std::string, std::string> keys;
  SweepSpec spec;
  spec.cfg = build_config(o, keys);

  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = keys.find(key);
    if (it == keys.end()) return std::nullopt;
    std::string v = it->second;
    keys.erase(it);
    return v;
  };
  std::string modalities = take("modalities").value_or("all");
  std::string separations = take("separations").value_or("");
  std::string orientations = take("orientations").value_or("");
  bool isotropic = false;
  if (auto v = take("isotropic")) isotropic = parse_bool("isotropic", *v);
  if (auto v = take("snap")) spec.snap = parse_bool("snap", *v);
  if (auto v = take("output_dir")) spec.output_dir = *v;
  if (auto v = take("name")) spec.name = *v;
  if (auto v = take("png")) spec.png_previews = parse_bool("png", *v);
  if (auto v = take("csv_images")) spec.csv_images = parse_bool("csv_images", *v);
  if (auto v = take("workers")) spec.workers = static_cast<int>(parse_number(*v));
  std::optional<int> divisions;
  if (auto v = take("polar_grid")) divisions = static_cast<int>(parse_number(*v));
  if (!keys.empty()) throw std::invalid_argument(fmt::format("unknown config key '{}'", keys.begin()->first));

  if (!o.modalities.empty()) modalities = o.modalities;
  if (!o.separations.empty()) separations = o.separations;
  if (!o.orientations.empty()) {
    orientations.clear();
    for (const auto& s : o.orientations) orientations += s + ";";
  }
  if (o.polar_divisions) divisions = o.polar_divisions;
  isotropic = isotropic || o.isotropic;
  if (o.no_snap) spec.snap = false;
  if (!o.out_dir.empty()) spec.output_dir = o.out_dir;
  if (!o.name.empty()) spec.name = o.name;
  if (o.png) spec.png_previews = true;
  if (o.csv_images) spec.csv_images = true;
  if (o.workers) spec.workers = *o.workers;

  spec.modalities = parse_modalities(modalities);
  spec.separations_nm = parse_separations(separations);
  if (isotropic) spec.emitters.emplace_back(Isotropic{});
  if (divisions)
    for (const auto& d : polar_grid(*divisions)) spec.emitters.emplace_back(d);
  for (const auto& d : parse_orientations(orientations)) spec.emitters.emplace_back(d);
  for (double l : spec.separations_nm)
    if (const double used = spec.effective_separation(l); used != l)
      std::fprintf(stderr, "note: l = %g nm snapped to %g nm (pixel lattice; --no-snap to disable)\n", l, used);
  if (!o.quiet)
    spec.progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r  %zu / %zu points", done, total);
      if (done == total) std::fputc('\n', stderr);
      std::fflush(stderr);
    };
  return spec;
}

int cmd_sweep(const Options& o) {
  auto spec = build_spec(o);
  if (spec.emitters.empty()) spec.emitters.emplace_back(DipoleOrientation{std::numbers::pi / 2, 0.0});
  if (spec.output_dir.empty()) spec.output_dir = ".";
  const auto curves = run_sweep(spec);
  for (const auto& c : curves) std::fputs(c.to_csv().c_str(), stdout);
  return 0;
}

int cmd_polar(const Options& o) {
  auto spec = build_spec(o);
  if (spec.separations_nm.empty()) spec.separations_nm = {10.0};
  if (spec.output_dir.empty()) spec.output_dir = ".";
  const auto map = run_polar_map(spec);
  std::fprintf(stderr, "separation used: %.6g nm (requested %.6g nm)\n", map.l_nm, map.requested_l_nm);
  std::fputs(map.to_csv().c_str(), stdout);
  return 0;
}

int cmd_images(const Options& o) {
  auto spec = build_spec(o);
  if (spec.separations_nm.empty()) spec.separations_nm = {10.0};
  if (spec.emitters.empty()) spec.emitters.emplace_back(DipoleOrientation{std::numbers::pi / 2, 0.0});
  if (spec.output_dir.empty()) spec.output_dir = ".";
  const auto rendered = render_images(spec);
  for (const auto& r : rendered) {
    fmt::print("{:<10} {:<14} power fraction {:.6e}\n", modality_name(r.modality), channel_name(r.channel),
               r.power_fraction);
    for (const auto& f : r.files) fmt::print("    {}\n", f.string());
  }
  return 0;
}

int cmd_validate(const Options& o, double separation, bool no_imaging) {
  std::map<std::string, std::string> keys;
  ValidationOptions v;
  v.cfg = build_config(o, keys);
  v.separation_nm = separation;
  v.include_imaging = !no_imaging;
  int failures = 0;
  for (const auto& r : run_validation(v)) {
    fmt::print("{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    failures += r.passed ? 0 : 1;
  }
  fmt::print("{} check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separation bounds for two dipole emitters under direct imaging and image inversion "
               "interferometry"};
  app.require_subcommand(1);

  Options sweep_opts, polar_opts, image_opts, validate_opts;
  auto* sweep = app.add_subcommand("sweep", "Bounds versus separation (CSV + SVG per orientation)");
  add_common(*sweep, sweep_opts, true);
  auto* polar = app.add_subcommand("polar-map", "sigma_CRB / sigma_QCRB over orientations at one separation");
  add_common(*polar, polar_opts, true);
  auto* images = app.add_subcommand("images", "Channel images for one orientation and separation");
  add_common(*images, image_opts, true);
  images->add_flag("--png", image_opts.png, "Also write 8-bit PNG previews");
  images->add_flag("--csv-images", image_opts.csv_images, "Also write CSV matrices");
  auto* validate = app.add_subcommand("validate", "Run the oracle and invariant checks");
  add_common(*validate, validate_opts, false);
  double validate_l = 10.0;
  bool no_imaging = false;
  validate->add_option("-l,--separation", validate_l, "Separation (nm) used by the checks");
  validate->add_flag("--no-imaging", no_imaging, "Skip the image-plane checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*polar) return cmd_polar(polar_opts);
    if (*images) return cmd_images(image_opts);
    if (*validate) return cmd_validate(validate_opts, validate_l, no_imaging);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dipres: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
