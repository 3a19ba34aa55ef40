#pragma once

// Windowed SSIM statistics, the per-pixel SSIM map and its complement, the
// MRI image (1 - SSIM). Windows are uniform N x N squares centred on each
// pixel; samples outside the image count as 0 for both inputs.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mriforge/error.hpp"
#include "mriforge/image.hpp"
#include "mriforge/image_io.hpp"

namespace mriforge {

struct SsimConfig {
  int window = 11;      // side length N, odd
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 255.0;  // dynamic range L
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  double c1() const { return (k1 * range) * (k1 * range); }
  double c2() const { return (k2 * range) * (k2 * range); }
  double c3() const { return c2() / 2.0; }

  void validate() const {
    if (window < 3 || window % 2 == 0) {
      throw InvalidArgument("SSIM window must be odd and >= 3, got " + std::to_string(window));
    }
    if (!(k1 > 0.0 && k1 < 1.0) || !(k2 > 0.0 && k2 < 1.0)) {
      throw InvalidArgument("SSIM constants K1, K2 must lie in (0, 1)");
    }
    if (!(range > 0.0)) throw InvalidArgument("SSIM dynamic range must be positive");
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0)) {
      throw InvalidArgument("SSIM exponents must be positive");
    }
  }

  bool default_exponents() const { return alpha == 1.0 && beta == 1.0 && gamma == 1.0; }
};

struct WindowStats {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double sigma_xy = 0.0;
};

struct SsimComponents {
  double luminance = 1.0;
  double contrast = 1.0;
  double structure = 1.0;
};

/// Per-pixel, per-channel scalar map with the shape of the images it came
/// from. Tag distinguishes SSIM maps from MRI images at compile time.
template <class Tag>
class ScoreMap {
 public:
  ScoreMap() = default;
  ScoreMap(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels),
        values_(static_cast<std::size_t>(width) * height * channels, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }

  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  double at(int x, int y, int c) const noexcept { return values_[index(x, y, c)]; }
  double& at(int x, int y, int c) noexcept { return values_[index(x, y, c)]; }

  const std::vector<double>& values() const& noexcept { return values_; }
  std::vector<double>& values() & noexcept { return values_; }
  std::vector<double> values() && noexcept { return std::move(values_); }

  std::string dims() const {
    return std::to_string(width_) + "x" + std::to_string(height_) + "x" +
           std::to_string(channels_);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

using SsimMap = ScoreMap<struct SsimTag>;
using MriImage = ScoreMap<struct MriTag>;

namespace detail {

template <PixelGrid A, PixelGrid B>
void require_same_shape(const A& x, const B& y) {
  if (x.width() != y.width() || x.height() != y.height() || x.channels() != y.channels()) {
    throw InvalidArgument("image dimension mismatch: " + std::to_string(x.width()) + "x" +
                          std::to_string(x.height()) + "x" + std::to_string(x.channels()) +
                          " vs " + std::to_string(y.width()) + "x" + std::to_string(y.height()) +
                          "x" + std::to_string(y.channels()));
  }
}

inline double checked_pow(double base, double exponent, const char* name) {
  if (exponent == 1.0) return base;
  if (base < 0.0 && exponent != std::floor(exponent)) {
    throw DomainError(std::string("SSIM ") + name + " component " + std::to_string(base) +
                      " is negative; fractional exponent " + std::to_string(exponent) +
                      " is undefined");
  }
  return std::pow(base, exponent);
}

// Zero-padded box sum of `plane` (h rows of w) with odd side n: separable,
// each output accumulated in a fixed left-to-right order.
inline std::vector<double> box_sum(const std::vector<double>& plane, int w, int h, int n) {
  const int r = n / 2;
  std::vector<double> rows(plane.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* src = plane.data() + static_cast<std::size_t>(y) * w;
    double* dst = rows.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      const int lo = std::max(0, x - r), hi = std::min(w - 1, x + r);
      for (int i = lo; i <= hi; ++i) s += src[i];
      dst[x] = s;
    }
  }
  std::vector<double> out(plane.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(0, y - r), hi = std::min(h - 1, y + r);
    double* dst = out.data() + static_cast<std::size_t>(y) * w;
    for (int j = lo; j <= hi; ++j) {
      const double* src = rows.data() + static_cast<std::size_t>(j) * w;
      for (int x = 0; x < w; ++x) dst[x] += src[x];
    }
  }
  return out;
}

inline WindowStats stats_from_sums(double sx, double sy, double sxx, double syy, double sxy,
                                   double samples) {
  WindowStats st;
  st.mu_x = sx / samples;
  st.mu_y = sy / samples;
  const double var_x = std::max(0.0, (sxx - sx * sx / samples) / (samples - 1.0));
  const double var_y = std::max(0.0, (syy - sy * sy / samples) / (samples - 1.0));
  st.sigma_x = std::sqrt(var_x);
  st.sigma_y = std::sqrt(var_y);
  st.sigma_xy = (sxy - sx * sy / samples) / (samples - 1.0);
  return st;
}

}  // namespace detail

/// Means over the N*N window samples; deviations and covariance use the
/// sample divisor N*N - 1. Padding samples are zeros and are counted.
template <PixelGrid Img>
WindowStats window_stats(const Img& x, const Img& y, int px, int py, int ch, const SsimConfig& cfg) {
  cfg.validate();
  detail::require_same_shape(x, y);
  if (px < 0 || py < 0 || px >= x.width() || py >= x.height() || ch < 0 || ch >= x.channels()) {
    throw InvalidArgument("window centre (" + std::to_string(px) + "," + std::to_string(py) + "," +
                          std::to_string(ch) + ") out of bounds");
  }
  const int r = cfg.window / 2;
  const double samples = static_cast<double>(cfg.window) * cfg.window;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int j = py - r; j <= py + r; ++j) {
    if (j < 0 || j >= x.height()) continue;
    for (int i = px - r; i <= px + r; ++i) {
      if (i < 0 || i >= x.width()) continue;
      const double a = x.at(i, j, ch);
      const double b = y.at(i, j, ch);
      sx += a;
      sy += b;
      sxx += a * a;
      syy += b * b;
      sxy += a * b;
    }
  }
  return detail::stats_from_sums(sx, sy, sxx, syy, sxy, samples);
}

inline SsimComponents ssim_components(const WindowStats& st, const SsimConfig& cfg) {
  const double c1 = cfg.c1(), c2 = cfg.c2(), c3 = cfg.c3();
  SsimComponents out;
  out.luminance = (2.0 * st.mu_x * st.mu_y + c1) / (st.mu_x * st.mu_x + st.mu_y * st.mu_y + c1);
  out.contrast = (2.0 * st.sigma_x * st.sigma_y + c2) /
                 (st.sigma_x * st.sigma_x + st.sigma_y * st.sigma_y + c2);
  out.structure = (st.sigma_xy + c3) / (st.sigma_x * st.sigma_y + c3);
  return out;
}

// Weighted product l^alpha * c^beta * s^gamma.
inline double ssim_pixel(const WindowStats& st, const SsimConfig& cfg) {
  const SsimComponents k = ssim_components(st, cfg);
  return detail::checked_pow(k.luminance, cfg.alpha, "luminance") *
         detail::checked_pow(k.contrast, cfg.beta, "contrast") *
         detail::checked_pow(k.structure, cfg.gamma, "structure");
}

// Closed form valid for unit exponents with C3 = C2 / 2.
inline double ssim_pixel_closed_form(const WindowStats& st, const SsimConfig& cfg) {
  const double c1 = cfg.c1(), c2 = cfg.c2();
  return ((2.0 * st.mu_x * st.mu_y + c1) * (2.0 * st.sigma_xy + c2)) /
         ((st.mu_x * st.mu_x + st.mu_y * st.mu_y + c1) *
          (st.sigma_x * st.sigma_x + st.sigma_y * st.sigma_y + c2));
}

/// SSIM evaluated at every pixel centre of every channel. Output has the
/// input's dims.
template <PixelGrid Img>
SsimMap ssim_image(const Img& x, const Img& y, const SsimConfig& cfg) {
  cfg.validate();
  detail::require_same_shape(x, y);
  const int w = x.width(), h = x.height(), channels = x.channels();
  const double samples = static_cast<double>(cfg.window) * cfg.window;
  SsimMap map(w, h, channels);
  const auto plane_size = static_cast<std::size_t>(w) * h;
  std::vector<double> a(plane_size), b(plane_size), aa(plane_size), bb(plane_size), ab(plane_size);
  for (int c = 0; c < channels; ++c) {
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * w + i;
        const double xv = x.at(i, j, c), yv = y.at(i, j, c);
        a[k] = xv;
        b[k] = yv;
        aa[k] = xv * xv;
        bb[k] = yv * yv;
        ab[k] = xv * yv;
      }
    }
    const auto sx = detail::box_sum(a, w, h, cfg.window);
    const auto sy = detail::box_sum(b, w, h, cfg.window);
    const auto sxx = detail::box_sum(aa, w, h, cfg.window);
    const auto syy = detail::box_sum(bb, w, h, cfg.window);
    const auto sxy = detail::box_sum(ab, w, h, cfg.window);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * w + i;
        const WindowStats st = detail::stats_from_sums(sx[k], sy[k], sxx[k], syy[k], sxy[k], samples);
        map.at(i, j, c) = ssim_pixel(st, cfg);
      }
    }
  }
  return map;
}

// Arithmetic mean over all pixels and channels, summed in storage order.
template <class Tag>
double mean_value(const ScoreMap<Tag>& map) {
  double sum = 0.0;
  for (double v : map.values()) sum += v;
  return sum / static_cast<double>(map.values().size());
}

template <PixelGrid Img>
double ssim_index(const Img& x, const Img& y, const SsimConfig& cfg) {
  return mean_value(ssim_image(x, y, cfg));
}

inline MriImage mri_from_ssim(const SsimMap& ssim) {
  MriImage mri(ssim.width(), ssim.height(), ssim.channels());
  for (std::size_t i = 0; i < ssim.values().size(); ++i) mri.values()[i] = 1.0 - ssim.values()[i];
  return mri;
}

/// 1 - SSIM per pixel and channel; raw values (may exceed 1 where SSIM < 0).
template <PixelGrid Img>
MriImage mri_image(const Img& x, const Img& y, const SsimConfig& cfg) {
  return mri_from_ssim(ssim_image(x, y, cfg));
}

// Clamp to [0, 1] and scale to the 8-bit range.
template <class Tag>
ImageBuf unit_map_to_image(const ScoreMap<Tag>& map) {
  ImageBuf img(map.width(), map.height(), map.channels());
  for (std::size_t i = 0; i < map.values().size(); ++i) {
    img.pixels()[i] = static_cast<float>(std::clamp(map.values()[i], 0.0, 1.0) * 255.0);
  }
  return img;
}

// Raw MRI sidecar: "MRI0", then width, height, channels as little-endian
// uint32, then row-major little-endian float32 values.
inline constexpr char kMriMagic[4] = {'M', 'R', 'I', '0'};

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline void write_mri_raw(const MriImage& m, const std::string& path) {
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + m.values().size() * 4);
  bytes.insert(bytes.end(), kMriMagic, kMriMagic + 4);
  detail::put_u32(bytes, static_cast<std::uint32_t>(m.width()));
  detail::put_u32(bytes, static_cast<std::uint32_t>(m.height()));
  detail::put_u32(bytes, static_cast<std::uint32_t>(m.channels()));
  for (double v : m.values()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    detail::put_u32(bytes, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline MriImage read_mri_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open MRI sidecar '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMriMagic, 4) != 0) {
    throw IoError("'" + path + "' is not an MRI0 sidecar");
  }
  const auto w = detail::get_u32(bytes.data() + 4);
  const auto h = detail::get_u32(bytes.data() + 8);
  const auto c = detail::get_u32(bytes.data() + 12);
  const std::size_t count = static_cast<std::size_t>(w) * h * c;
  if (w == 0 || h == 0 || c == 0 || bytes.size() != 16 + count * 4) {
    throw IoError("MRI sidecar '" + path + "' is truncated or has an inconsistent header");
  }
  MriImage m(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = detail::get_u32(bytes.data() + 16 + 4 * i);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    m.values()[i] = f;
  }
  return m;
}

/// Writes the MRI as an 8-bit PNG (clamped to [0, 1], scaled by 255) and,
/// when raw_path is non-empty, the unclamped float sidecar.
inline void export_mri(const MriImage& m, const std::string& png_path, const std::string& raw_path = {}) {
  save_image(unit_map_to_image(m), png_path);
  if (!raw_path.empty()) write_mri_raw(m, raw_path);
}

}  // namespace mriforge
