#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mriforge/error.hpp"

namespace mriforge {

// Anything SSIM can be computed over: a width x height x channels grid of
// scalars addressed by (x, y, channel).
template <class G>
concept PixelGrid = requires(const G& g, int x, int y, int c) {
  { g.width() } -> std::convertible_to<int>;
  { g.height() } -> std::convertible_to<int>;
  { g.channels() } -> std::convertible_to<int>;
  { g.at(x, y, c) } -> std::convertible_to<double>;
};

/// Row-major, channel-interleaved float image. Pixel values live in
/// [0, 255] unless a caller deliberately works in another range.
class ImageBuf {
 public:
  ImageBuf() = default;

  ImageBuf(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0) {
      throw InvalidArgument("image dims must be positive, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
      throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  ImageBuf(int width, int height, int channels, std::vector<float> pixels)
      : ImageBuf(width, height, channels) {
    if (pixels.size() != pixels_.size()) {
      throw InvalidArgument("pixel buffer has " + std::to_string(pixels.size()) +
                            " values, expected " + std::to_string(pixels_.size()));
    }
    pixels_ = std::move(pixels);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  float at(int x, int y, int c) const noexcept { return pixels_[index(x, y, c)]; }
  float& at(int x, int y, int c) noexcept { return pixels_[index(x, y, c)]; }

  // Temporaries hand over their storage so range-for over a returned image is safe.
  const std::vector<float>& pixels() const& noexcept { return pixels_; }
  std::vector<float>& pixels() & noexcept { return pixels_; }
  std::vector<float> pixels() && noexcept { return std::move(pixels_); }

  bool same_shape(const ImageBuf& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  std::string dims() const {
    return std::to_string(width_) + "x" + std::to_string(height_) + "x" +
           std::to_string(channels_);
  }

  friend bool operator==(const ImageBuf&, const ImageBuf&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> pixels_;
};

struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Intersection of a box with [0, width) x [0, height); w or h is 0 when empty.
inline BBox clip_box(const BBox& box, int width, int height) {
  const int x0 = std::max(box.x, 0);
  const int y0 = std::max(box.y, 0);
  const int x1 = std::min(box.x + box.w, width);
  const int y1 = std::min(box.y + box.h, height);
  if (x1 <= x0 || y1 <= y0) return BBox{x0, y0, 0, 0};
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

inline ImageBuf crop(const ImageBuf& img, const BBox& box) {
  if (box.w <= 0 || box.h <= 0) {
    throw InvalidArgument("crop box must have positive extents");
  }
  const BBox b = clip_box(box, img.width(), img.height());
  if (b.w == 0 || b.h == 0) {
    throw InvalidArgument("crop box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                          std::to_string(box.w) + "," + std::to_string(box.h) +
                          ") does not intersect image " + img.dims());
  }
  ImageBuf out(b.w, b.h, img.channels());
  const auto row = static_cast<std::size_t>(b.w) * img.channels();
  for (int y = 0; y < b.h; ++y) {
    const float* src = img.pixels().data() + img.index(b.x, b.y + y, 0);
    std::copy(src, src + row, out.pixels().data() + out.index(0, y, 0));
  }
  return out;
}

// Bilinear resampling with pixel centers at (i + 0.5); samples beyond the
// border clamp to the edge pixel.
inline ImageBuf resize(const ImageBuf& img, int w, int h) {
  if (w <= 0 || h <= 0) {
    throw InvalidArgument("resize target must be positive, got " + std::to_string(w) + "x" +
                          std::to_string(h));
  }
  ImageBuf out(w, h, img.channels());
  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;

  auto source_coord = [](int i, double scale, int limit, int& i0, int& i1, double& t) {
    const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(limit - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, limit - 1);
    t = s - i0;
  };

  for (int y = 0; y < h; ++y) {
    int y0, y1;
    double ty;
    source_coord(y, sy, img.height(), y0, y1, ty);
    for (int x = 0; x < w; ++x) {
      int x0, x1;
      double tx;
      source_coord(x, sx, img.width(), x0, x1, tx);
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - tx) + img.at(x1, y0, c) * tx;
        const double bottom = img.at(x0, y1, c) * (1.0 - tx) + img.at(x1, y1, c) * tx;
        out.at(x, y, c) = static_cast<float>(top * (1.0 - ty) + bottom * ty);
      }
    }
  }
  return out;
}

// Round half away from zero, the rule used for every 8-bit export.
inline double round_half_away(double v) { return std::round(v); }

inline void clamp_pixels(ImageBuf& img, float lo = 0.0f, float hi = 255.0f) {
  for (auto& p : img.pixels()) p = std::clamp(p, lo, hi);
}

// Snap to the 8-bit grid exactly as save_image would store it.
inline ImageBuf quantize(ImageBuf img) {
  for (auto& p : img.pixels()) {
    p = static_cast<float>(round_half_away(std::clamp(static_cast<double>(p), 0.0, 255.0)));
  }
  return img;
}

}  // namespace mriforge
