#include "dipres/export.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#ifndef DIPRES_HAVE_PNG
#define DIPRES_HAVE_PNG 0
#endif
#if DIPRES_HAVE_PNG
#include <png.h>
#endif

namespace dipres {

namespace fs = std::filesystem;

CroppedImage crop_centered(const ImageGrid& grid, std::span<const double> values, double fov_nm) {
  if (values.size() != grid.size())
    throw std::invalid_argument("crop_centered: value count does not match the grid");
  if (!(fov_nm > 0.0)) throw std::invalid_argument("crop_centered: field of view must be positive");
  int half = static_cast<int>(std::floor(0.5 * fov_nm / grid.pitch_nm + 1e-9));
  half = std::min(half, (grid.side - 1) / 2);
  CroppedImage out;
  out.side = 2 * half + 1;
  out.pitch_nm = grid.pitch_nm;
  out.values.resize(static_cast<std::size_t>(out.side) * out.side);
  for (int r = 0; r < out.side; ++r)
    for (int c = 0; c < out.side; ++c)
      out.values[static_cast<std::size_t>(r) * out.side + c] =
          values[grid.index(grid.wrap(r - half), grid.wrap(c - half))];
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error(fmt::format("cannot rename '{}': {}", tmp.string(), ec.message()));
  }
}

namespace {

void append_float_le(std::string& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

float read_float_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::string encode_pfm(const CroppedImage& image) {
  std::string out = fmt::format("Pf\n{} {}\n-1.0\n", image.side, image.side);
  out.reserve(out.size() + image.values.size() * 4);
  for (double v : image.values) append_float_le(out, static_cast<float>(v));
  return out;
}

void write_pfm(const fs::path& path, const CroppedImage& image) {
  write_file_atomic(path, encode_pfm(image));
}

CroppedImage read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  in.get();
  if (magic != "Pf" || width <= 0 || width != height || scale >= 0.0)
    throw std::runtime_error(fmt::format("'{}' is not a square little-endian grayscale PFM",
                                         path.string()));
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw std::runtime_error(fmt::format("'{}' is truncated", path.string()));
  CroppedImage out;
  out.side = width;
  out.values.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = read_float_le(&raw[4 * i]);
  return out;
}

void write_csv_matrix(const fs::path& path, const CroppedImage& image) {
  std::string out;
  for (int r = image.side - 1; r >= 0; --r) {
    for (int c = 0; c < image.side; ++c) {
      if (c) out.push_back(',');
      out += fmt::format("{:.11e}", image.at(r, c));
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

bool png_supported() { return DIPRES_HAVE_PNG != 0; }

void write_png_preview(const fs::path& path, const CroppedImage& image) {
#if DIPRES_HAVE_PNG
  double peak = 0.0;
  for (double v : image.values) peak = std::max(peak, v);
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;
  std::vector<png_byte> pixels(image.values.size());
  for (int r = 0; r < image.side; ++r)
    for (int c = 0; c < image.side; ++c) {
      const double v = std::clamp(image.at(image.side - 1 - r, c) * scale, 0.0, 255.0);
      pixels[static_cast<std::size_t>(r) * image.side + c] = static_cast<png_byte>(std::lround(v));
    }

  fs::path tmp = path;
  tmp += ".partial";
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  FILE* fp = std::fopen(tmp.string().c_str(), "wb");
  if (!fp) throw std::runtime_error(fmt::format("cannot open '{}' for writing", tmp.string()));
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fs::remove(tmp);
    throw std::runtime_error(fmt::format("PNG encoding of '{}' failed", path.string()));
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, image.side, image.side, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.side; ++r)
    png_write_row(png, &pixels[static_cast<std::size_t>(r) * image.side]);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  fs::rename(tmp, path);
#else
  (void)path;
  (void)image;
  throw std::runtime_error("this build has no PNG support");
#endif
}

std::string image_stem(Channel channel, const Emitter& emitter, double separation_nm) {
  std::string where = "iso";
  if (const auto* o = std::get_if<DipoleOrientation>(&emitter))
    where = fmt::format("theta{:.4f}_phi{:.4f}", o->theta, o->phi);
  return fmt::format("{}_{}_l{:.3f}nm", channel_name(channel), where, separation_nm);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.11e}", value);
}

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

// Piecewise-linear approximation of the viridis colormap.
std::string colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                              {59, 82, 139},
                                                              {33, 145, 140},
                                                              {94, 201, 98},
                                                              {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - k;
  std::array<int, 3> c{};
  for (int i = 0; i < 3; ++i)
    c[i] = static_cast<int>(std::lround(stops[k][i] + f * (stops[k + 1][i] - stops[k][i])));
  return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
}

}  // namespace

std::string render_curve_svg(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<CurveSeries>& series) {
  constexpr double width = 720, height = 480, left = 80, right = 190, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || s.y[i] <= 0) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = 1, ymax = 10;
  if (xmax == xmin) xmax = xmin + 1;
  const double d0 = std::floor(std::log10(ymin)), d1 = std::max(std::ceil(std::log10(ymax)), d0 + 1);
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + ph - (std::log10(y) - d0) / (d1 - d0) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n"
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      width, height, left + pw / 2, xml_escape(title), left, top, pw, ph);
  for (double d = d0; d <= d1 + 1e-9; d += 1) {
    const double y = py(std::pow(10.0, d));
    svg += fmt::format(
        "<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n",
        left, y, left + pw, y, left - 6, y + 4, static_cast<int>(d));
  }
  for (int i = 0; i <= 5; ++i) {
    const double x = xmin + (xmax - xmin) * i / 5.0;
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", px(x),
                       top + ph + 18, x);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n"
      "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
      left + pw / 2, height - 15, xml_escape(x_label), top + ph / 2, top + ph / 2,
      xml_escape(y_label));
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || s.y[i] <= 0) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n",
                       color, s.dashed ? " stroke-dasharray=\"6 4\"" : "", points);
    const double ly = top + 10 + 20.0 * k;
    svg += fmt::format(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n"
        "<text x=\"{}\" y=\"{}\">{}</text>\n",
        left + pw + 12, ly, left + pw + 40, ly, color, s.dashed ? " stroke-dasharray=\"6 4\"" : "",
        left + pw + 46, ly + 4, xml_escape(s.label));
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_polar_svg(const std::string& title, const std::vector<PolarCell>& cells,
                             double step, double min_value, double max_value) {
  constexpr double size = 520, cx = 60, cy = 470, radius = 400;
  const double quarter = std::numbers::pi / 2;
  auto pt = [&](double t, double p) {
    const double r = t / quarter * radius;
    return std::pair{cx + r * std::cos(p), cy - r * std::sin(p)};
  };
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      size + 120, size, (size + 120) / 2, xml_escape(title));
  const double span = max_value > min_value ? max_value - min_value : 1.0;
  for (const auto& cell : cells) {
    const double t0 = std::max(0.0, cell.theta - step / 2), t1 = std::min(quarter, cell.theta + step / 2);
    const double p0 = std::max(0.0, cell.phi - step / 2), p1 = std::min(quarter, cell.phi + step / 2);
    const auto [ax, ay] = pt(t1, p0);
    const auto [bx, by] = pt(t1, p1);
    const auto [c2x, c2y] = pt(t0, p1);
    const auto [dx, dy] = pt(t0, p0);
    const double r1 = t1 / quarter * radius, r0 = t0 / quarter * radius;
    const std::string fill =
        std::isfinite(cell.value) ? colormap((cell.value - min_value) / span) : "#888888";
    svg += fmt::format(
        "<path d=\"M {:.2f} {:.2f} A {:.2f} {:.2f} 0 0 0 {:.2f} {:.2f} L {:.2f} {:.2f} A {:.2f} "
        "{:.2f} 0 0 1 {:.2f} {:.2f} Z\" fill=\"{}\" stroke=\"{}\" stroke-width=\"0.5\">"
        "<title>theta={:.4f} phi={:.4f} value={:.4g}</title></path>\n",
        ax, ay, r1, r1, bx, by, c2x, c2y, r0, r0, dx, dy, fill, fill, cell.theta, cell.phi,
        cell.value);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">theta (radius), phi (angle)</text>\n",
      cx + radius / 2, cy + 25);
  constexpr double bar_x = size + 40, bar_top = 60, bar_h = 360;
  for (int i = 0; i < 64; ++i) {
    const double t = (63 - i) / 63.0;
    svg += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"20\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                       bar_x, bar_top + bar_h * i / 64.0, bar_h / 64.0 + 0.5, colormap(t));
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\">{:.3g}</text>\n<text x=\"{}\" y=\"{}\">{:.3g}</text>\n",
      bar_x + 24, bar_top + 10, max_value, bar_x + 24, bar_top + bar_h, min_value);
  svg += "</svg>\n";
  return svg;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument(fmt::format("config key '{}': '{}' is not a number", key, value));
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument(fmt::format("config key '{}': '{}' is not an integer", key, value));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(fmt::format("config line {}: expected key = value", line_no));
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::invalid_argument(fmt::format("config line {}: empty key", line_no));
    if (!out.emplace(key, value).second)
      throw std::invalid_argument(fmt::format("config line {}: duplicate key '{}'", line_no, key));
  }
  return out;
}

std::map<std::string, std::string> load_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

OpticalConfig apply_optical_keys(OpticalConfig base, std::map<std::string, std::string>& values) {
  if (auto it = values.find("profile"); it != values.end()) {
    base = profile_config(it->second);
    values.erase(it);
  }
  auto take = [&](const char* key, auto apply) {
    if (auto it = values.find(key); it != values.end()) {
      apply(it->second);
      values.erase(it);
    }
  };
  take("numerical_aperture", [&](const std::string& v) { base.numerical_aperture = to_double("numerical_aperture", v); });
  take("immersion_index", [&](const std::string& v) { base.immersion_index = to_double("immersion_index", v); });
  take("wavelength_nm", [&](const std::string& v) { base.vacuum_wavelength_nm = to_double("wavelength_nm", v); });
  take("magnification", [&](const std::string& v) { base.magnification = to_double("magnification", v); });
  take("pupil_grid_side", [&](const std::string& v) { base.pupil_grid_side = to_int("pupil_grid_side", v); });
  take("support_fill", [&](const std::string& v) { base.support_fill = to_double("support_fill", v); });
  take("zernike_order", [&](const std::string& v) { base.zernike_order = to_int("zernike_order", v); });
  take("pixel_nm", [&](const std::string& v) { base.image_pixel_object_nm = to_double("pixel_nm", v); });
  take("image_fft_side", [&](const std::string& v) { base.image_fft_side = to_int("image_fft_side", v); });
  take("image_fov_nm", [&](const std::string& v) { base.image_fov_nm = to_double("image_fov_nm", v); });
  take("intensity_floor", [&](const std::string& v) { base.intensity_floor = to_double("intensity_floor", v); });
  return base;
}

}  // namespace dipres
