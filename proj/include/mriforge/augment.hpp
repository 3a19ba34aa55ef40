#pragma once

// Noise models and photometric/geometric transforms used to harden the
// training data. All randomness comes from a SeedSpec-derived stream, so an
// augmentation is a pure function of (image, spec, seed).

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "mriforge/error.hpp"
#include "mriforge/image.hpp"
#include "mriforge/seed.hpp"

namespace mriforge {

namespace aug {

// Additive N(0, variance) per sample, variance in squared pixel units.
struct Gaussian {
  double variance = 0.0;
};
// Multiplicative img * (1 + N(0, variance)); variance is dimensionless.
struct Speckle {
  double variance = 0.0;
};
// A fraction `amount` of pixel locations is forced to 255 (with probability
// salt_ratio) or 0.
struct SaltPepper {
  double amount = 0.0;
  double salt_ratio = 0.5;
};
struct Salt {
  double amount = 0.0;
};
struct Pepper {
  double amount = 0.0;
};
// Each sample replaced by a Poisson draw with the sample value as mean.
struct Poisson {};
// Additive Gaussian with a per-pixel variance. If variance_map is empty the
// variance ramps linearly with pixel intensity from var_black to var_white.
struct LocalVar {
  std::vector<float> variance_map;  // width * height entries
  double var_black = 0.0;
  double var_white = 0.0;
};
// Box blur with a (2 * radius + 1)^2 kernel, edges replicated.
struct Blur {
  int radius = 1;
};
// Rotation about the image centre; exposed corners become black.
struct Rotate {
  double degrees = 0.0;
};
struct HFlip {};
struct Rescale {
  double factor = 1.0;
};
// Additive offset in pixel units.
struct Brightness {
  double delta = 0.0;
};
// Scales deviations from mid-gray (128).
struct Contrast {
  double factor = 1.0;
};

}  // namespace aug

using AugmentSpec = std::variant<aug::Gaussian, aug::Speckle, aug::SaltPepper, aug::Pepper, aug::Salt,
                                 aug::Poisson, aug::LocalVar, aug::Blur, aug::Rotate, aug::HFlip,
                                 aug::Rescale, aug::Brightness, aug::Contrast>;

inline constexpr std::string_view kAugmentKinds[] = {
    "gaussian", "speckle", "salt_pepper", "pepper", "salt",       "poisson",  "localvar",
    "blur",     "rotate",  "hflip",       "rescale", "brightness", "contrast"};

inline std::string_view augment_kind(const AugmentSpec& spec) { return kAugmentKinds[spec.index()]; }

struct AugmentPlan {
  std::vector<AugmentSpec> specs;
  SeedSpec seed;
};

namespace detail {

inline void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidArgument(std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

inline void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite and >= 0, got " + std::to_string(v));
  }
}

inline ImageBuf impulse(const ImageBuf& img, double amount, double salt_ratio, Rng& rng) {
  ImageBuf out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const bool hit = rng.uniform() < amount;
      const bool salt = rng.uniform() < salt_ratio;
      if (!hit) continue;
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = salt ? 255.0f : 0.0f;
    }
  }
  return out;
}

inline float luma(const ImageBuf& img, int x, int y) {
  if (img.channels() == 1) return img.at(x, y, 0);
  return 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
}

inline ImageBuf box_blur(const ImageBuf& img, int radius) {
  ImageBuf tmp(img.width(), img.height(), img.channels());
  ImageBuf out(img.width(), img.height(), img.channels());
  const double norm = 1.0 / (2 * radius + 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i) s += img.at(std::clamp(x + i, 0, img.width() - 1), y, c);
        tmp.at(x, y, c) = static_cast<float>(s * norm);
      }
    }
  }
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double s = 0.0;
        for (int j = -radius; j <= radius; ++j) s += tmp.at(x, std::clamp(y + j, 0, img.height() - 1), c);
        out.at(x, y, c) = static_cast<float>(s * norm);
      }
    }
  }
  return out;
}

// Inverse-mapped bilinear rotation; samples landing outside the source are 0.
inline ImageBuf rotate(const ImageBuf& img, double degrees) {
  ImageBuf out(img.width(), img.height(), img.channels());
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double cx = 0.5 * img.width(), cy = 0.5 * img.height();
  auto sample = [&](int x, int y, int c) -> double {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return 0.0;
    return img.at(x, y, c);
  };
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      // Output pixel rotated back by -theta into source coordinates.
      const double sx = cs * dx + sn * dy + cx - 0.5;
      const double sy = -sn * dx + cs * dy + cy - 0.5;
      if (sx <= -1.0 || sy <= -1.0 || sx >= img.width() || sy >= img.height()) continue;
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      const double tx = sx - x0, ty = sy - y0;
      for (int c = 0; c < img.channels(); ++c) {
        const double top = sample(x0, y0, c) * (1 - tx) + sample(x0 + 1, y0, c) * tx;
        const double bottom = sample(x0, y0 + 1, c) * (1 - tx) + sample(x0 + 1, y0 + 1, c) * tx;
        out.at(x, y, c) = static_cast<float>(top * (1 - ty) + bottom * ty);
      }
    }
  }
  return out;
}

inline ImageBuf hflip(const ImageBuf& img) {
  ImageBuf out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
    }
  }
  return out;
}

template <class F>
ImageBuf per_sample(const ImageBuf& img, F&& f) {
  ImageBuf out = img;
  for (auto& p : out.pixels()) p = static_cast<float>(f(static_cast<double>(p)));
  return out;
}

}  // namespace detail

inline void validate(const AugmentSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, aug::Gaussian> || std::is_same_v<T, aug::Speckle>) {
          detail::require_non_negative(s.variance, "noise variance");
        } else if constexpr (std::is_same_v<T, aug::SaltPepper>) {
          detail::require_unit(s.amount, "impulse amount");
          detail::require_unit(s.salt_ratio, "salt ratio");
        } else if constexpr (std::is_same_v<T, aug::Salt> || std::is_same_v<T, aug::Pepper>) {
          detail::require_unit(s.amount, "impulse amount");
        } else if constexpr (std::is_same_v<T, aug::LocalVar>) {
          detail::require_non_negative(s.var_black, "localvar variance");
          detail::require_non_negative(s.var_white, "localvar variance");
          for (float v : s.variance_map) detail::require_non_negative(v, "localvar variance");
        } else if constexpr (std::is_same_v<T, aug::Blur>) {
          if (s.radius < 1) throw InvalidArgument("blur radius must be >= 1");
        } else if constexpr (std::is_same_v<T, aug::Rotate>) {
          if (!std::isfinite(s.degrees)) throw InvalidArgument("rotation angle must be finite");
        } else if constexpr (std::is_same_v<T, aug::Rescale>) {
          if (!(s.factor > 0.0) || !std::isfinite(s.factor)) {
            throw InvalidArgument("rescale factor must be positive");
          }
        } else if constexpr (std::is_same_v<T, aug::Brightness>) {
          if (!std::isfinite(s.delta)) throw InvalidArgument("brightness delta must be finite");
        } else if constexpr (std::is_same_v<T, aug::Contrast>) {
          detail::require_non_negative(s.factor, "contrast factor");
        }
      },
      spec);
}

/// Applies one augmentation, drawing from `rng`. Output is clamped to
/// [0, 255].
inline ImageBuf apply_augment(const ImageBuf& img, const AugmentSpec& spec, Rng& rng) {
  validate(spec);
  ImageBuf out = std::visit(
      [&](const auto& s) -> ImageBuf {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, aug::Gaussian>) {
          const double sd = std::sqrt(s.variance);
          return detail::per_sample(img, [&](double v) { return v + sd * rng.normal(); });
        } else if constexpr (std::is_same_v<T, aug::Speckle>) {
          const double sd = std::sqrt(s.variance);
          return detail::per_sample(img, [&](double v) { return v * (1.0 + sd * rng.normal()); });
        } else if constexpr (std::is_same_v<T, aug::SaltPepper>) {
          return detail::impulse(img, s.amount, s.salt_ratio, rng);
        } else if constexpr (std::is_same_v<T, aug::Salt>) {
          return detail::impulse(img, s.amount, 1.0, rng);
        } else if constexpr (std::is_same_v<T, aug::Pepper>) {
          return detail::impulse(img, s.amount, 0.0, rng);
        } else if constexpr (std::is_same_v<T, aug::Poisson>) {
          return detail::per_sample(img, [&](double v) {
            return static_cast<double>(rng.poisson(std::max(0.0, v)));
          });
        } else if constexpr (std::is_same_v<T, aug::LocalVar>) {
          const auto plane = static_cast<std::size_t>(img.width()) * img.height();
          if (!s.variance_map.empty() && s.variance_map.size() != plane) {
            throw InvalidArgument("localvar variance map has " + std::to_string(s.variance_map.size()) +
                                  " entries, image has " + std::to_string(plane) + " pixels");
          }
          ImageBuf res = img;
          for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
              const double var =
                  s.variance_map.empty()
                      ? s.var_black + (s.var_white - s.var_black) * (detail::luma(img, x, y) / 255.0)
                      : s.variance_map[static_cast<std::size_t>(y) * img.width() + x];
              const double sd = std::sqrt(std::max(0.0, var));
              for (int c = 0; c < img.channels(); ++c) {
                res.at(x, y, c) = static_cast<float>(img.at(x, y, c) + sd * rng.normal());
              }
            }
          }
          return res;
        } else if constexpr (std::is_same_v<T, aug::Blur>) {
          return detail::box_blur(img, s.radius);
        } else if constexpr (std::is_same_v<T, aug::Rotate>) {
          return detail::rotate(img, s.degrees);
        } else if constexpr (std::is_same_v<T, aug::HFlip>) {
          return detail::hflip(img);
        } else if constexpr (std::is_same_v<T, aug::Rescale>) {
          const int w = std::max(1, static_cast<int>(round_half_away(img.width() * s.factor)));
          const int h = std::max(1, static_cast<int>(round_half_away(img.height() * s.factor)));
          return resize(img, w, h);
        } else if constexpr (std::is_same_v<T, aug::Brightness>) {
          return detail::per_sample(img, [&](double v) { return v + s.delta; });
        } else {
          static_assert(std::is_same_v<T, aug::Contrast>);
          return detail::per_sample(img, [&](double v) { return 128.0 + (v - 128.0) * s.factor; });
        }
      },
      spec);
  clamp_pixels(out);
  return out;
}

inline ImageBuf apply_augment(const ImageBuf& img, const AugmentSpec& spec, const SeedSpec& seed) {
  Rng rng(seed);
  return apply_augment(img, spec, rng);
}

/// Applies the plan left to right; all specs share one stream derived from
/// the plan's seed, consumed in order.
inline ImageBuf compose(const ImageBuf& img, const AugmentPlan& plan) {
  Rng rng(plan.seed);
  ImageBuf out = img;
  for (const auto& spec : plan.specs) out = apply_augment(out, spec, rng);
  return out;
}

// Same specs, different stream: used to vary noise per frame while the
// chosen plan stays fixed for a whole video.
inline ImageBuf compose(const ImageBuf& img, const std::vector<AugmentSpec>& specs, const SeedSpec& seed) {
  return compose(img, AugmentPlan{specs, seed});
}

/// One entry of a plan policy: a kind, how likely it is to be picked, and
/// the parameter range its value is drawn from.
struct AugmentCandidate {
  std::string kind;
  double probability = 0.0;
  double lo = 0.0;  // primary parameter range
  double hi = 0.0;
  double lo2 = 0.0;  // secondary range (salt ratio, localvar white variance)
  double hi2 = 0.0;
};

struct PlanPolicy {
  std::vector<AugmentCandidate> candidates;
  std::size_t min_count = 0;
  std::size_t max_count = 3;
};

namespace detail {

inline AugmentSpec draw_spec(const AugmentCandidate& cand, Rng& rng) {
  const double v = rng.uniform(cand.lo, cand.hi);
  const std::string& k = cand.kind;
  if (k == "gaussian") return aug::Gaussian{v};
  if (k == "speckle") return aug::Speckle{v};
  if (k == "salt_pepper") return aug::SaltPepper{v, rng.uniform(cand.lo2, cand.hi2)};
  if (k == "salt") return aug::Salt{v};
  if (k == "pepper") return aug::Pepper{v};
  if (k == "poisson") return aug::Poisson{};
  if (k == "localvar") return aug::LocalVar{{}, v, rng.uniform(cand.lo2, cand.hi2)};
  if (k == "blur") {
    // Integer radius, inclusive range.
    const int lo = static_cast<int>(std::ceil(cand.lo)), hi = static_cast<int>(std::floor(cand.hi));
    return aug::Blur{rng.uniform_int(lo, hi)};
  }
  if (k == "rotate") return aug::Rotate{v};
  if (k == "hflip") return aug::HFlip{};
  if (k == "rescale") return aug::Rescale{v};
  if (k == "brightness") return aug::Brightness{v};
  if (k == "contrast") return aug::Contrast{v};
  throw InvalidArgument("unknown augmentation kind '" + k + "'");
}

}  // namespace detail

inline void validate(const PlanPolicy& policy) {
  if (policy.min_count > policy.max_count) {
    throw InvalidArgument("plan policy min_count exceeds max_count");
  }
  if (policy.min_count > policy.candidates.size()) {
    throw InvalidArgument("plan policy requires " + std::to_string(policy.min_count) +
                          " specs but has only " + std::to_string(policy.candidates.size()) +
                          " candidates");
  }
  for (const auto& c : policy.candidates) {
    detail::require_unit(c.probability, "candidate probability");
    if (c.hi < c.lo || c.hi2 < c.lo2) {
      throw InvalidArgument("candidate '" + c.kind + "' has an inverted parameter range");
    }
    if (std::find(std::begin(kAugmentKinds), std::end(kAugmentKinds), c.kind) == std::end(kAugmentKinds)) {
      throw InvalidArgument("unknown augmentation kind '" + c.kind + "'");
    }
  }
}

/// Each candidate is kept independently with its probability; the result is
/// then topped up (uniformly among unpicked candidates) or trimmed (uniformly
/// among picked ones) into [min_count, max_count]. Picked specs keep policy
/// order.
inline AugmentPlan random_plan(const SeedSpec& seed, const PlanPolicy& policy) {
  validate(policy);
  Rng rng(seed);
  const std::size_t n = policy.candidates.size();
  std::vector<bool> picked(n, false);
  for (std::size_t i = 0; i < n; ++i) picked[i] = rng.bernoulli(policy.candidates[i].probability);

  auto indices_where = [&](bool value) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
      if (picked[i] == value) out.push_back(i);
    return out;
  };
  for (auto chosen = indices_where(true); chosen.size() < policy.min_count; chosen = indices_where(true)) {
    const auto pool = indices_where(false);
    picked[pool[rng.below(pool.size())]] = true;
  }
  for (auto chosen = indices_where(true); chosen.size() > policy.max_count; chosen = indices_where(true)) {
    picked[chosen[rng.below(chosen.size())]] = false;
  }

  AugmentPlan plan;
  plan.seed = seed.child("apply");
  for (std::size_t i = 0; i < n; ++i) {
    if (picked[i]) plan.specs.push_back(detail::draw_spec(policy.candidates[i], rng));
  }
  return plan;
}

/// Parses "kind" or "kind:name=value,name=value", e.g. "gaussian:variance=100"
/// or "salt_pepper:amount=0.1,salt_ratio=0.3".
inline AugmentSpec parse_augment_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string kind(text.substr(0, colon));
  std::map<std::string, double> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw InvalidArgument("augmentation parameter '" + std::string(item) + "' must be name=value");
      }
      const std::string name(item.substr(0, eq));
      const std::string value(item.substr(eq + 1));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || value.empty()) {
        throw InvalidArgument("augmentation parameter '" + name + "' has non-numeric value '" + value + "'");
      }
      params[name] = v;
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  auto take = [&](const char* name, double def) {
    auto it = params.find(name);
    if (it == params.end()) return def;
    const double v = it->second;
    params.erase(it);
    return v;
  };
  AugmentSpec spec;
  if (kind == "gaussian") spec = aug::Gaussian{take("variance", 0.0)};
  else if (kind == "speckle") spec = aug::Speckle{take("variance", 0.0)};
  else if (kind == "salt_pepper") spec = aug::SaltPepper{take("amount", 0.0), take("salt_ratio", 0.5)};
  else if (kind == "salt") spec = aug::Salt{take("amount", 0.0)};
  else if (kind == "pepper") spec = aug::Pepper{take("amount", 0.0)};
  else if (kind == "poisson") spec = aug::Poisson{};
  else if (kind == "localvar") spec = aug::LocalVar{{}, take("var_black", 0.0), take("var_white", 0.0)};
  else if (kind == "blur") {
    const double r = take("radius", 1.0);
    if (r != std::floor(r)) throw InvalidArgument("blur radius must be an integer");
    spec = aug::Blur{static_cast<int>(r)};
  } else if (kind == "rotate") spec = aug::Rotate{take("degrees", 0.0)};
  else if (kind == "hflip") spec = aug::HFlip{};
  else if (kind == "rescale") spec = aug::Rescale{take("factor", 1.0)};
  else if (kind == "brightness") spec = aug::Brightness{take("delta", 0.0)};
  else if (kind == "contrast") spec = aug::Contrast{take("factor", 1.0)};
  else throw InvalidArgument("unknown augmentation kind '" + kind + "'");
  if (!params.empty()) {
    throw InvalidArgument("augmentation '" + kind + "' has no parameter '" + params.begin()->first + "'");
  }
  validate(spec);
  return spec;
}

}  // namespace mriforge
