#pragma once

// Text and shape overlays drawn over frame sequences in three modes: at one
// fixed location, rolling along an axis, or popping up on random frames.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mriforge/error.hpp"
#include "mriforge/font.hpp"
#include "mriforge/image.hpp"
#include "mriforge/seed.hpp"

namespace mriforge {

enum class OverlayObject { Text, Circle, Rectangle };
enum class OverlayMode { Static, Rolling, Spontaneous };
enum class OverlayColor { Red, Blue, Green, White, Black };
enum class RollDirection { RightToLeft, LeftToRight, UpToDown, DownToUp };

inline constexpr std::string_view kOverlayObjectNames[] = {"text", "circle", "rectangle"};
inline constexpr std::string_view kOverlayModeNames[] = {"static", "rolling", "spontaneous"};
inline constexpr std::string_view kOverlayColorNames[] = {"red", "blue", "green", "white", "black"};
inline constexpr std::string_view kRollDirectionNames[] = {"right-to-left", "left-to-right", "up-to-down",
                                                           "down-to-up"};

template <class Enum, std::size_t N>
Enum enum_from_name(std::string_view name, const std::string_view (&names)[N], const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  throw InvalidArgument(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <class Enum, std::size_t N>
std::string_view enum_name(Enum e, const std::string_view (&names)[N]) {
  return names[static_cast<std::size_t>(e)];
}

inline constexpr std::size_t kDistractionTextLength = 8;

struct DistractionSpec {
  OverlayObject object = OverlayObject::Text;
  OverlayMode mode = OverlayMode::Static;
  std::string text;    // Text only
  int font_scale = 1;  // 1..6
  int thickness = 1;   // 1..3
  OverlayColor color = OverlayColor::White;
  RollDirection direction = RollDirection::LeftToRight;
  int radius = 0;  // Circle only
  int rect_w = 0;  // Rectangle only
  int rect_h = 0;
  double appear_probability = 0.2;  // Spontaneous only
};

struct FrameSequence {
  std::vector<ImageBuf> frames;
  std::vector<int> indices;  // source frame indices, parallel to frames

  void validate() const {
    if (frames.empty()) throw InvalidArgument("frame sequence is empty");
    if (!indices.empty() && indices.size() != frames.size()) {
      throw InvalidArgument("frame index list does not match frame count");
    }
    for (const auto& f : frames) {
      if (!f.same_shape(frames.front())) {
        throw InvalidArgument("frame sequence mixes dims " + frames.front().dims() + " and " + f.dims());
      }
    }
  }
};

struct OverlayMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> ink;  // row-major, 1 = draw

  bool at(int x, int y) const { return ink[static_cast<std::size_t>(y) * width + x] != 0; }
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr std::string_view kAlphanumeric =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

inline std::string gen_random_text(const SeedSpec& seed) {
  Rng rng(seed);
  std::string s(kDistractionTextLength, ' ');
  for (auto& ch : s) ch = kAlphanumeric[rng.below(kAlphanumeric.size())];
  return s;
}

inline void validate(const DistractionSpec& spec) {
  if (spec.font_scale < 1 || spec.font_scale > 6) throw InvalidArgument("font scale must be in 1..6");
  if (spec.thickness < 1 || spec.thickness > 3) throw InvalidArgument("thickness must be in 1..3");
  if (!(spec.appear_probability >= 0.0 && spec.appear_probability <= 1.0)) {
    throw InvalidArgument("appearance probability must be in [0, 1]");
  }
  switch (spec.object) {
    case OverlayObject::Text:
      if (spec.text.size() != kDistractionTextLength ||
          !std::all_of(spec.text.begin(), spec.text.end(),
                       [](char c) { return kAlphanumeric.find(c) != std::string_view::npos; })) {
        throw InvalidArgument("distraction text must be 8 alphanumeric characters, got '" + spec.text + "'");
      }
      break;
    case OverlayObject::Circle:
      if (spec.radius < 1) throw InvalidArgument("circle radius must be >= 1");
      break;
    case OverlayObject::Rectangle:
      if (spec.rect_w < 1 || spec.rect_h < 1) throw InvalidArgument("rectangle extents must be >= 1");
      break;
  }
}

namespace detail {

inline OverlayMask dilate(const OverlayMask& m, int r) {
  if (r <= 0) return m;
  OverlayMask out{m.width + 2 * r, m.height + 2 * r, {}};
  out.ink.assign(static_cast<std::size_t>(out.width) * out.height, 0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      for (int dy = 0; dy <= 2 * r; ++dy)
        for (int dx = 0; dx <= 2 * r; ++dx) out.ink[static_cast<std::size_t>(y + dy) * out.width + x + dx] = 1;
    }
  }
  return out;
}

inline OverlayMask render_text(const std::string& text, int scale, int thickness) {
  OverlayMask m;
  m.width = (static_cast<int>(text.size()) * font::kGlyphAdvance - 1) * scale;
  m.height = font::kGlyphHeight * scale;
  m.ink.assign(static_cast<std::size_t>(m.width) * m.height, 0);
  for (std::size_t k = 0; k < text.size(); ++k) {
    const auto& g = font::glyph(text[k]);
    const int ox = static_cast<int>(k) * font::kGlyphAdvance * scale;
    for (int gy = 0; gy < font::kGlyphHeight; ++gy) {
      for (int gx = 0; gx < font::kGlyphWidth; ++gx) {
        if (g[gy][gx] != '#') continue;
        for (int sy = 0; sy < scale; ++sy)
          for (int sx = 0; sx < scale; ++sx)
            m.ink[static_cast<std::size_t>(gy * scale + sy) * m.width + ox + gx * scale + sx] = 1;
      }
    }
  }
  return dilate(m, thickness - 1);
}

// Ring of the given stroke width around the circle of radius r.
inline OverlayMask render_circle(int radius, int thickness) {
  OverlayMask m{2 * radius + 1, 2 * radius + 1, {}};
  m.ink.assign(static_cast<std::size_t>(m.width) * m.height, 0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const double d = std::hypot(x - radius, y - radius);
      if (d <= radius + 0.5 && d > radius + 0.5 - thickness) m.ink[static_cast<std::size_t>(y) * m.width + x] = 1;
    }
  }
  return m;
}

inline OverlayMask render_rectangle(int w, int h, int thickness) {
  OverlayMask m{w, h, {}};
  m.ink.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool border = x < thickness || y < thickness || x >= w - thickness || y >= h - thickness;
      if (border) m.ink[static_cast<std::size_t>(y) * w + x] = 1;
    }
  }
  return m;
}

inline std::array<float, 3> color_rgb(OverlayColor c) {
  switch (c) {
    case OverlayColor::Red: return {255.f, 0.f, 0.f};
    case OverlayColor::Blue: return {0.f, 0.f, 255.f};
    case OverlayColor::Green: return {0.f, 255.f, 0.f};
    case OverlayColor::White: return {255.f, 255.f, 255.f};
    case OverlayColor::Black: return {0.f, 0.f, 0.f};
  }
  return {0.f, 0.f, 0.f};
}

inline void require_fits(const OverlayMask& m, const ImageBuf& frame) {
  if (m.width > frame.width() || m.height > frame.height()) {
    throw InvalidArgument("overlay " + std::to_string(m.width) + "x" + std::to_string(m.height) +
                          " is larger than frame " + frame.dims());
  }
}

inline Point random_location(const OverlayMask& m, const ImageBuf& frame, Rng& rng) {
  const int x = rng.uniform_int(0, frame.width() - m.width);
  const int y = rng.uniform_int(0, frame.height() - m.height);
  return {x, y};
}

}  // namespace detail

inline OverlayMask render_overlay(const DistractionSpec& spec) {
  validate(spec);
  switch (spec.object) {
    case OverlayObject::Text: return detail::render_text(spec.text, spec.font_scale, spec.thickness);
    case OverlayObject::Circle: return detail::render_circle(spec.radius, spec.thickness);
    case OverlayObject::Rectangle: return detail::render_rectangle(spec.rect_w, spec.rect_h, spec.thickness);
  }
  throw InvalidArgument("unknown overlay object");
}

/// Draws the mask with its top-left corner at `at`, clipped to the frame.
/// Gray frames receive the color's luma.
inline void stamp(ImageBuf& frame, const OverlayMask& mask, Point at, OverlayColor color) {
  const auto rgb = detail::color_rgb(color);
  const float gray = std::round(0.299f * rgb[0] + 0.587f * rgb[1] + 0.114f * rgb[2]);
  for (int my = 0; my < mask.height; ++my) {
    const int y = at.y + my;
    if (y < 0 || y >= frame.height()) continue;
    for (int mx = 0; mx < mask.width; ++mx) {
      const int x = at.x + mx;
      if (x < 0 || x >= frame.width() || !mask.at(mx, my)) continue;
      if (frame.channels() == 1) {
        frame.at(x, y, 0) = gray;
      } else {
        for (int c = 0; c < 3; ++c) frame.at(x, y, c) = rgb[c];
      }
    }
  }
}

/// Top-left overlay positions for an n-frame rolling trajectory. The
/// overlay travels from `start` towards the far edge, covering
/// max(edge distance, n - 1) pixels so consecutive frames always move.
inline std::vector<Point> rolling_trajectory(std::size_t n, int frame_w, int frame_h, int mask_w, int mask_h,
                                             RollDirection dir, Point start) {
  std::vector<Point> out(n, start);
  if (n == 0) return out;
  const bool horizontal = dir == RollDirection::LeftToRight || dir == RollDirection::RightToLeft;
  const bool reversed = dir == RollDirection::RightToLeft || dir == RollDirection::DownToUp;
  const int extent = horizontal ? frame_w : frame_h;
  const int size = horizontal ? mask_w : mask_h;
  int s0 = horizontal ? start.x : start.y;
  // Reversed directions are the mirror image of the forward ones.
  if (reversed) s0 = extent - size - s0;
  const std::int64_t distance = std::max<std::int64_t>(extent - s0, static_cast<std::int64_t>(n) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t offset = n == 1 ? 0 : static_cast<std::int64_t>(i) * distance / static_cast<std::int64_t>(n - 1);
    int pos = s0 + static_cast<int>(offset);
    if (reversed) pos = extent - size - pos;
    (horizontal ? out[i].x : out[i].y) = pos;
  }
  return out;
}

/// Placement of the overlay on every frame (nullopt = not drawn), as
/// dictated by spec.mode and the seed.
inline std::vector<std::optional<Point>> plan_placements(const FrameSequence& seq, const OverlayMask& mask,
                                                         const DistractionSpec& spec, const SeedSpec& seed) {
  seq.validate();
  const ImageBuf& frame = seq.frames.front();
  detail::require_fits(mask, frame);
  Rng rng(seed.child("placement"));
  std::vector<std::optional<Point>> out(seq.frames.size());
  switch (spec.mode) {
    case OverlayMode::Static: {
      const Point p = detail::random_location(mask, frame, rng);
      for (auto& o : out) o = p;
      break;
    }
    case OverlayMode::Rolling: {
      if (seq.frames.size() < 2) throw InvalidArgument("rolling overlays need at least 2 frames");
      const Point start = detail::random_location(mask, frame, rng);
      const auto path = rolling_trajectory(seq.frames.size(), frame.width(), frame.height(), mask.width,
                                           mask.height, spec.direction, start);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = path[i];
      break;
    }
    case OverlayMode::Spontaneous: {
      for (auto& o : out) {
        const bool appears = rng.bernoulli(spec.appear_probability);
        const Point p = detail::random_location(mask, frame, rng);
        if (appears) o = p;
      }
      break;
    }
  }
  return out;
}

inline FrameSequence apply_distraction(const FrameSequence& seq, const DistractionSpec& spec,
                                       const SeedSpec& seed) {
  const OverlayMask mask = render_overlay(spec);
  const auto placements = plan_placements(seq, mask, spec, seed);
  FrameSequence out = seq;
  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    if (placements[i]) stamp(out.frames[i], mask, *placements[i], spec.color);
  }
  return out;
}

namespace detail {

inline void require_mode(const DistractionSpec& spec, OverlayMode mode) {
  if (spec.mode != mode) {
    throw InvalidArgument("distraction spec has mode '" + std::string(enum_name(spec.mode, kOverlayModeNames)) +
                          "', expected '" + std::string(enum_name(mode, kOverlayModeNames)) + "'");
  }
}

}  // namespace detail

inline FrameSequence overlay_static(const FrameSequence& seq, const DistractionSpec& spec, const SeedSpec& seed) {
  detail::require_mode(spec, OverlayMode::Static);
  return apply_distraction(seq, spec, seed);
}

inline FrameSequence overlay_rolling(const FrameSequence& seq, const DistractionSpec& spec, const SeedSpec& seed) {
  detail::require_mode(spec, OverlayMode::Rolling);
  return apply_distraction(seq, spec, seed);
}

inline FrameSequence overlay_spontaneous(const FrameSequence& seq, const DistractionSpec& spec,
                                         const SeedSpec& seed) {
  detail::require_mode(spec, OverlayMode::Spontaneous);
  return apply_distraction(seq, spec, seed);
}

struct DistractPolicy {
  std::vector<OverlayObject> objects{OverlayObject::Text, OverlayObject::Circle, OverlayObject::Rectangle};
  std::vector<OverlayMode> modes{OverlayMode::Static, OverlayMode::Rolling, OverlayMode::Spontaneous};
  double appear_probability = 0.2;
  double shape_min_fraction = 0.05;  // of the frame's smaller dimension
  double shape_max_fraction = 0.25;
};

/// Draws a complete DistractionSpec whose overlay fits a frame_w x frame_h
/// frame. Text scales that would not fit are excluded from the draw.
inline DistractionSpec random_distraction(const SeedSpec& seed, const DistractPolicy& policy, int frame_w,
                                          int frame_h) {
  if (policy.objects.empty() || policy.modes.empty()) {
    throw InvalidArgument("distraction policy needs at least one object and one mode");
  }
  Rng rng(seed);
  DistractionSpec spec;
  spec.object = policy.objects[rng.below(policy.objects.size())];
  spec.mode = policy.modes[rng.below(policy.modes.size())];
  spec.color = static_cast<OverlayColor>(rng.below(std::size(kOverlayColorNames)));
  spec.direction = static_cast<RollDirection>(rng.below(std::size(kRollDirectionNames)));
  spec.thickness = rng.uniform_int(1, 3);
  spec.appear_probability = policy.appear_probability;
  const int min_dim = std::min(frame_w, frame_h);
  const int lo = std::max(1, static_cast<int>(std::ceil(policy.shape_min_fraction * min_dim)));
  const int hi = std::max(lo, static_cast<int>(std::floor(policy.shape_max_fraction * min_dim)));
  switch (spec.object) {
    case OverlayObject::Text: {
      spec.text = gen_random_text(seed.child("text"));
      std::vector<int> fitting;
      for (int scale = 1; scale <= 6; ++scale) {
        const auto m = detail::render_text(spec.text, scale, spec.thickness);
        if (m.width <= frame_w && m.height <= frame_h) fitting.push_back(scale);
      }
      if (fitting.empty()) {
        throw InvalidArgument("frame " + std::to_string(frame_w) + "x" + std::to_string(frame_h) +
                              " is too small for an 8-character text overlay");
      }
      spec.font_scale = fitting[rng.below(fitting.size())];
      break;
    }
    case OverlayObject::Circle:
      spec.radius = rng.uniform_int(lo, hi);
      break;
    case OverlayObject::Rectangle:
      spec.rect_w = rng.uniform_int(lo, hi);
      spec.rect_h = rng.uniform_int(lo, hi);
      break;
  }
  return spec;
}

}  // namespace mriforge
