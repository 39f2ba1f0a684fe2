#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dipres/export.hpp"
#include "test_support.hpp"

using namespace dipres;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dipres_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cropping keeps the origin at the center") {
  const ImageGrid g{16, 5.0};
  std::vector<double> v(g.size());
  for (int r = 0; r < g.side; ++r)
    for (int c = 0; c < g.side; ++c) v[g.index(r, c)] = 100.0 * g.signed_index(r) + g.signed_index(c);
  const auto crop = crop_centered(g, v, 20.0);
  REQUIRE(crop.side == 5);
  CHECK(crop.at(2, 2) == 0.0);
  CHECK(crop.at(0, 0) == -202.0);
  CHECK(crop.at(4, 3) == 201.0);
  CHECK(crop_centered(g, v, 1e6).side == 15);
  CHECK_THROWS_AS(crop_centered(g, std::vector<double>(3), 20.0), std::invalid_argument);
}

TEST_CASE("PFM round trip") {
  const auto dir = scratch_dir("pfm");
  CroppedImage img{3, 5.0, {0.0, 1.5, 2.0, 3.0, 4.25, 5.0, 6.0, 7.0, 1e-9}};
  write_pfm(dir / "a.pfm", img);
  const auto back = read_pfm(dir / "a.pfm");
  REQUIRE(back.side == 3);
  for (std::size_t i = 0; i < img.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(img.values[i]));
  const auto bytes = encode_pfm(img);
  CHECK(bytes.rfind("Pf\n3 3\n-1.0\n", 0) == 0);
  CHECK(bytes.size() == std::string("Pf\n3 3\n-1.0\n").size() + 9 * 4);
  CHECK_FALSE(fs::exists(dir / "a.pfm.partial"));
}

TEST_CASE("CSV matrix and PNG preview") {
  const auto dir = scratch_dir("csv");
  CroppedImage img{3, 5.0, {0, 0, 0, 0, 1, 0, 0, 0, 2}};
  write_csv_matrix(dir / "m.csv", img);
  std::ifstream in(dir / "m.csv");
  std::string first;
  std::getline(in, first);
  CHECK(first == "0.00000000000e+00,0.00000000000e+00,2.00000000000e+00");
  if (png_supported()) {
    write_png_preview(dir / "m.png", img);
    CHECK(fs::file_size(dir / "m.png") > 0);
  } else {
    CHECK_THROWS_AS(write_png_preview(dir / "m.png", img), std::runtime_error);
  }
}

TEST_CASE("number formatting and file stems") {
  CHECK(format_number(1.0) == "1.00000000000e+00");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(image_stem(Channel::iii_out1, DipoleOrientation{1.5707963, 0.0}, 8.99) ==
        "iii_out1_theta1.5708_phi0.0000_l8.990nm");
  CHECK(image_stem(Channel::direct, Isotropic{}, 10.0) == "direct_iso_l10.000nm");
}

TEST_CASE("SVG rendering") {
  const auto svg = render_curve_svg("t", "x", "y",
                                    {{"a", {1, 2, 3}, {1, 10, 100}, false},
                                     {"b", {1, 2}, {5, std::numeric_limits<double>::infinity()}, true}});
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  const auto polar = render_polar_svg("p", {{0.0, 0.0, 1.0}, {0.5, 0.5, 2.0}}, 0.26, 1.0, 2.0);
  CHECK(polar.find("<path") != std::string::npos);
}

TEST_CASE("key = value configuration") {
  const auto kv = parse_key_values("# comment\nprofile = paper\n pixel_nm=2.5 # trailing\n\nname = run1\n");
  CHECK(kv.at("pixel_nm") == "2.5");
  CHECK(kv.at("name") == "run1");
  CHECK_THROWS_AS(parse_key_values("novalue\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_key_values("a=1\na=2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_key_values("=1\n"), std::invalid_argument);

  auto keys = kv;
  const auto cfg = apply_optical_keys(OpticalConfig::desk(), keys);
  CHECK(cfg.pupil_grid_side == 2049);
  CHECK(cfg.image_pixel_object_nm == 2.5);
  CHECK(keys.size() == 1);
  CHECK(keys.count("name") == 1);
  std::map<std::string, std::string> bad{{"pupil_grid_side", "big"}};
  CHECK_THROWS_AS(apply_optical_keys(OpticalConfig::desk(), bad), std::invalid_argument);
}

TEST_CASE("atomic write replaces files") {
  const auto dir = scratch_dir("atomic");
  write_file_atomic(dir / "sub" / "f.txt", "one");
  write_file_atomic(dir / "sub" / "f.txt", "two");
  std::ifstream in(dir / "sub" / "f.txt");
  std::string s;
  in >> s;
  CHECK(s == "two");
  CHECK_FALSE(fs::exists(dir / "sub" / "f.txt.partial"));
}
