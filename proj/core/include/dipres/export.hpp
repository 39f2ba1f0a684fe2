#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dipres/imaging.hpp"
#include "dipres/optical_config.hpp"

namespace dipres {

/// A centered, odd-sided window of an image in display order: row 0 is the
/// most negative y', column 0 the most negative x'.
struct CroppedImage {
  int side = 0;
  double pitch_nm = 0.0;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * side + col]; }
};

/// Crops a periodic image to the largest odd window not exceeding fov_nm.
CroppedImage crop_centered(const ImageGrid& grid, std::span<const double> values, double fov_nm);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Grayscale little-endian PFM ("Pf", scale -1); rows run bottom to top.
std::string encode_pfm(const CroppedImage& image);
void write_pfm(const std::filesystem::path& path, const CroppedImage& image);
CroppedImage read_pfm(const std::filesystem::path& path);

/// Comma-separated matrix, one image row per line, top row (largest y') first.
void write_csv_matrix(const std::filesystem::path& path, const CroppedImage& image);

/// Whether PNG previews are available in this build.
bool png_supported();
/// 8-bit preview with gray = round(255 * value / max(value)); top row is the
/// largest y'. Throws std::runtime_error when PNG support is unavailable.
void write_png_preview(const std::filesystem::path& path, const CroppedImage& image);

/// File stem encoding channel, orientation and separation, e.g.
/// "iii_out1_theta1.5708_phi0.0000_l10.000nm"; isotropic emitters use "iso".
std::string image_stem(Channel channel, const Emitter& emitter, double separation_nm);

/// Number formatting used by every CSV: 12 significant digits, "inf" for
/// unbounded values and "nan" for undefined ones.
std::string format_number(double value);

struct CurveSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Static SVG line plot with a logarithmic y axis. Non-finite points are skipped.
std::string render_curve_svg(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<CurveSeries>& series);

struct PolarCell {
  double theta;  ///< radial coordinate of the cell center
  double phi;    ///< angular coordinate of the cell center
  double value;
};

/// Quarter-disk heat map over theta, phi in [0, pi/2]: theta is the radius and
/// phi the polar angle. Cells are annular sectors centered on the samples.
std::string render_polar_svg(const std::string& title, const std::vector<PolarCell>& cells,
                             double step, double min_value, double max_value);

/// Flat key = value configuration text. '#' starts a comment; blank lines are
/// ignored. Throws std::invalid_argument on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

/// Applies optical keys (numerical_aperture, immersion_index, wavelength_nm,
/// magnification, pupil_grid_side, support_fill, zernike_order, pixel_nm,
/// image_fft_side, image_fov_nm, intensity_floor) and removes them from
/// `values`; a "profile" key selects the base configuration first.
OpticalConfig apply_optical_keys(OpticalConfig base, std::map<std::string, std::string>& values);

}  // namespace dipres
