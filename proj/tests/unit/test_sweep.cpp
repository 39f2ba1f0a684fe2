#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dipres/sweep.hpp"
#include "test_support.hpp"

using namespace dipres;
using testing::kPi;
namespace fs = std::filesystem;

namespace {

SweepSpec small_spec() {
  SweepSpec spec;
  spec.cfg = testing::small_config();
  spec.cfg.pupil_grid_side = 129;
  spec.emitters = {DipoleOrientation{kPi / 2, 0.0}, DipoleOrientation{0.0, 0.0}};
  spec.separations_nm = {30.0, 10.0, 20.0};
  spec.workers = 1;
  return spec;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dipres_sweep_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("separation snapping") {
  CHECK(snap_separation(10.0, 5.0) == 10.0);
  CHECK(snap_separation(8.99, 5.0) == 10.0);
  CHECK(snap_separation(12.4, 5.0) == 10.0);
  CHECK(snap_separation(1.0, 5.0) == 5.0);
  CHECK(snap_separation(0.0, 5.0) == 0.0);
  CHECK_THROWS_AS(snap_separation(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("orientation grid") {
  const auto g = polar_grid();
  REQUIRE(g.size() == 49);
  CHECK(g[8].theta == doctest::Approx(kPi / 12));
  CHECK(g[8].phi == doctest::Approx(kPi / 12));
  CHECK(g.back().theta == doctest::Approx(kPi / 2));
}

TEST_CASE("spec validation") {
  auto spec = small_spec();
  spec.separations_nm.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.modalities.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.separations_nm = {-1.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.emitters.clear();
  CHECK_THROWS_AS(compute_bounds(spec), std::invalid_argument);
}

TEST_CASE("worker count from the environment") {
  setenv("DIPRES_WORKERS", "3", 1);
  CHECK(default_worker_count() == 3);
  setenv("DIPRES_WORKERS", "zero", 1);
  CHECK_THROWS_AS(default_worker_count(), std::invalid_argument);
  unsetenv("DIPRES_WORKERS");
  CHECK(default_worker_count() >= 1);
}

TEST_CASE("sweep output: schema, ordering, determinism, bounds") {
  auto spec = small_spec();
  const auto dir = scratch_dir("run");
  spec.output_dir = dir;
  spec.name = "t";
  const auto curves = run_sweep(spec);
  REQUIRE(curves.size() == 2);
  const auto& rows = curves[0].rows;
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].l_nm == 30.0);
  CHECK(rows[1].l_nm == 10.0);
  CHECK(rows[2].l_nm == 20.0);
  for (const auto& c : curves)
    for (const auto& r : c.rows)
      for (std::size_t m = 0; m < c.modalities.size(); ++m) CHECK(r.ratio(m) >= 0.995);

  const auto csv_path = dir / "t_theta1.5708_phi0.0000.csv";
  REQUIRE(fs::exists(csv_path));
  CHECK(fs::exists(dir / "t_theta1.5708_phi0.0000.svg"));
  const auto csv = slurp(csv_path);
  const std::string header =
      "l_nm,qcrb_sigma_sqrtN_nm,direct_crb_sigma_sqrtN_nm,iii_crb_sigma_sqrtN_nm,r_iii_crb_sigma_sqrtN_nm,"
      "phi_iii_crb_sigma_sqrtN_nm,rphi_iii_crb_sigma_sqrtN_nm,direct_fi_per_photon_nm2,iii_out1_fi_per_photon_nm2,"
      "iii_out2_fi_per_photon_nm2,r_iii_out1_fi_per_photon_nm2,r_iii_out2_fi_per_photon_nm2,"
      "phi_iii_out1_fi_per_photon_nm2,phi_iii_out2_fi_per_photon_nm2\n";
  CHECK(csv.rfind(header, 0) == 0);
  CHECK(csv.find("\n3.00000000000e+01,") != std::string::npos);

  // rerun and a parallel run produce identical bytes
  const auto again = scratch_dir("run2");
  spec.output_dir = again;
  spec.workers = 3;
  run_sweep(spec);
  CHECK(slurp(again / "t_theta1.5708_phi0.0000.csv") == csv);
  CHECK(slurp(again / "t_theta0.0000_phi0.0000.csv") == slurp(dir / "t_theta0.0000_phi0.0000.csv"));
}

TEST_CASE("without snapping the requested separation is used") {
  auto spec = small_spec();
  spec.snap = false;
  spec.separations_nm = {8.99};
  spec.emitters = {DipoleOrientation{kPi / 2, 0.0}};
  spec.modalities = {Modality::direct};
  CHECK(compute_bounds(spec)[0].rows[0].l_nm == 8.99);
  spec.snap = true;
  CHECK(compute_bounds(spec)[0].rows[0].l_nm == 10.0);
}

TEST_CASE("failed runs leave no partial outputs") {
  auto spec = small_spec();
  const auto dir = scratch_dir("fail");
  fs::create_directories(dir);
  // the second curve's CSV path is an existing directory
  fs::create_directories(dir / "t_theta0.0000_phi0.0000.csv.partial");
  spec.output_dir = dir;
  spec.name = "t";
  spec.modalities = {Modality::direct};
  CHECK_THROWS(run_sweep(spec));
  CHECK_FALSE(fs::exists(dir / "t_theta1.5708_phi0.0000.csv"));
  CHECK_FALSE(fs::exists(dir / "t_theta1.5708_phi0.0000.svg"));
}

TEST_CASE("polar map") {
  auto spec = small_spec();
  spec.emitters.clear();
  for (const auto& o : polar_grid(2)) spec.emitters.emplace_back(o);
  spec.separations_nm = {9.0};
  spec.modalities = {Modality::direct, Modality::rphi_iii};
  const auto dir = scratch_dir("polar");
  spec.output_dir = dir;
  spec.name = "p";
  const auto map = run_polar_map(spec);
  CHECK(map.l_nm == 10.0);
  REQUIRE(map.rows.size() == 9);
  // theta = 0 rows are one orientation
  CHECK(map.rows[0].qfi == map.rows[2].qfi);
  CHECK(fs::exists(dir / "p_polar.csv"));
  CHECK(fs::exists(dir / "p_polar_direct.svg"));
  CHECK(fs::exists(dir / "p_polar_rphi_iii.svg"));
  spec.separations_nm = {5.0, 10.0};
  CHECK_THROWS_AS(run_polar_map(spec), std::invalid_argument);
}

TEST_CASE("image rendering") {
  auto spec = small_spec();
  spec.emitters = {DipoleOrientation{kPi / 2, 0.0}};
  spec.separations_nm = {10.0};
  spec.modalities = {Modality::iii, Modality::phi_iii};
  spec.csv_images = true;
  const auto dir = scratch_dir("images");
  spec.output_dir = dir;
  spec.name = "img";
  const auto rendered = render_images(spec);
  REQUIRE(rendered.size() == 4);
  CHECK(rendered[0].power_fraction < 0.05 * rendered[1].power_fraction);
  for (const auto& r : rendered)
    for (const auto& f : r.files) CHECK(fs::exists(f));
  CHECK(fs::exists(dir / "img_power.csv"));
  CHECK(fs::exists(dir / "img_iii_out2_theta1.5708_phi0.0000_l10.000nm.pfm"));
  spec.separations_nm = {10.0, 20.0};
  CHECK_THROWS_AS(render_images(spec), std::invalid_argument);
}
