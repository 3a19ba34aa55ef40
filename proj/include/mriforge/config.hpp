#pragma once

// TOML run configuration: seed, paths, SSIM/loss overrides, the
// augmentation/distraction build policy and aggregation grids. Unknown keys
// are rejected so typos cannot silently fall back to defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <toml.hpp>

#include "mriforge/dataset.hpp"
#include "mriforge/detect.hpp"
#include "mriforge/error.hpp"
#include "mriforge/losses.hpp"
#include "mriforge/ssim.hpp"

namespace mriforge {

struct RunConfig {
  std::optional<std::uint64_t> master_seed;
  std::string sources;
  std::string boxes;
  std::string out_dir;
  std::string policy;  // optional separate policy file
  SsimConfig ssim;
  LossConfig losses;
  BuildPolicy build;
  std::vector<double> thresholds = default_grid();
  std::vector<double> fractions = default_grid();
};

namespace detail {

inline void require_keys(const toml::table& t, std::initializer_list<std::string_view> allowed, const std::string& where) {
  const std::set<std::string_view> ok(allowed);
  for (const auto& [key, node] : t) {
    if (!ok.contains(key.str())) throw InvalidArgument("unknown key '" + std::string(key.str()) + "' in " + where);
  }
}

template <class T>
void read(const toml::table& t, std::string_view key, T& out, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return;
  if constexpr (std::is_same_v<T, std::string>) {
    auto v = node->value<std::string>();
    if (!v) throw InvalidArgument(where + "." + std::string(key) + " must be a string");
    out = *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    auto v = node->value<bool>();
    if (!v) throw InvalidArgument(where + "." + std::string(key) + " must be a boolean");
    out = *v;
  } else if constexpr (std::is_floating_point_v<T>) {
    auto v = node->value<double>();
    if (!v) throw InvalidArgument(where + "." + std::string(key) + " must be a number");
    out = static_cast<T>(*v);
  } else {
    auto v = node->value<std::int64_t>();
    if (!v) throw InvalidArgument(where + "." + std::string(key) + " must be an integer");
    if (*v < 0 && std::is_unsigned_v<T>) throw InvalidArgument(where + "." + std::string(key) + " must be >= 0");
    out = static_cast<T>(*v);
  }
}

inline const toml::table* sub(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw InvalidArgument(where + "." + std::string(key) + " must be a table");
  return node->as_table();
}

inline std::vector<double> read_numbers(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr) throw InvalidArgument(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw InvalidArgument(where + " must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<std::string> read_strings(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr) throw InvalidArgument(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *arr) {
    auto v = e.value<std::string>();
    if (!v) throw InvalidArgument(where + " must be an array of strings");
    out.push_back(*v);
  }
  return out;
}

inline std::pair<double, double> read_range(const toml::table& t, std::string_view key, std::pair<double, double> def,
                                            const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return def;
  const auto v = read_numbers(*node, where + "." + std::string(key));
  if (v.size() != 2) throw InvalidArgument(where + "." + std::string(key) + " must be [lo, hi]");
  return {v[0], v[1]};
}

inline void read_ssim(const toml::table& t, SsimConfig& cfg) {
  require_keys(t, {"window", "k1", "k2", "range", "alpha", "beta", "gamma"}, "[ssim]");
  read(t, "window", cfg.window, "ssim");
  read(t, "k1", cfg.k1, "ssim");
  read(t, "k2", cfg.k2, "ssim");
  read(t, "range", cfg.range, "ssim");
  read(t, "alpha", cfg.alpha, "ssim");
  read(t, "beta", cfg.beta, "ssim");
  read(t, "gamma", cfg.gamma, "ssim");
  cfg.validate();
}

inline void read_losses(const toml::table& t, LossConfig& cfg) {
  require_keys(t, {"lambda", "tau", "eta", "l2_mode", "real_label", "fake_label"}, "[losses]");
  read(t, "lambda", cfg.lambda, "losses");
  read(t, "tau", cfg.tau, "losses");
  read(t, "eta", cfg.eta, "losses");
  read(t, "real_label", cfg.real_label, "losses");
  read(t, "fake_label", cfg.fake_label, "losses");
  std::string mode;
  read(t, "l2_mode", mode, "losses");
  if (mode == "mse") cfg.l2_mode = L2Mode::Mse;
  else if (mode == "norm") cfg.l2_mode = L2Mode::Norm;
  else if (!mode.empty()) throw InvalidArgument("losses.l2_mode must be \"mse\" or \"norm\"");
  cfg.validate();
}

inline void read_augment(const toml::table& t, PlanPolicy& p) {
  require_keys(t, {"min_count", "max_count", "candidates"}, "[augment]");
  read(t, "min_count", p.min_count, "augment");
  read(t, "max_count", p.max_count, "augment");
  if (const toml::node* node = t.get("candidates")) {
    const auto* arr = node->as_array();
    if (!arr) throw InvalidArgument("augment.candidates must be an array of tables");
    p.candidates.clear();
    for (const auto& e : *arr) {
      const auto* c = e.as_table();
      if (!c) throw InvalidArgument("augment.candidates must be an array of tables");
      require_keys(*c, {"kind", "probability", "range", "range2"}, "[[augment.candidates]]");
      AugmentCandidate cand;
      read(*c, "kind", cand.kind, "augment.candidates");
      read(*c, "probability", cand.probability, "augment.candidates");
      std::tie(cand.lo, cand.hi) = read_range(*c, "range", {0.0, 0.0}, "augment.candidates");
      std::tie(cand.lo2, cand.hi2) = read_range(*c, "range2", {0.0, 0.0}, "augment.candidates");
      p.candidates.push_back(cand);
    }
  }
  validate(p);
}

inline void read_distract(const toml::table& t, DistractPolicy& p) {
  require_keys(t, {"objects", "modes", "appear_probability", "shape_min_fraction", "shape_max_fraction"},
               "[distract]");
  if (const toml::node* n = t.get("objects")) {
    p.objects.clear();
    for (const auto& s : read_strings(*n, "distract.objects"))
      p.objects.push_back(enum_from_name<OverlayObject>(s, kOverlayObjectNames, "overlay object"));
  }
  if (const toml::node* n = t.get("modes")) {
    p.modes.clear();
    for (const auto& s : read_strings(*n, "distract.modes"))
      p.modes.push_back(enum_from_name<OverlayMode>(s, kOverlayModeNames, "overlay mode"));
  }
  read(t, "appear_probability", p.appear_probability, "distract");
  read(t, "shape_min_fraction", p.shape_min_fraction, "distract");
  read(t, "shape_max_fraction", p.shape_max_fraction, "distract");
  if (!(p.appear_probability >= 0.0 && p.appear_probability <= 1.0)) {
    throw InvalidArgument("distract.appear_probability must lie in [0, 1]");
  }
  if (!(p.shape_min_fraction > 0.0 && p.shape_min_fraction <= p.shape_max_fraction && p.shape_max_fraction <= 1.0)) {
    throw InvalidArgument("distract shape fractions must satisfy 0 < min <= max <= 1");
  }
}

inline void read_dataset(const toml::table& t, BuildPolicy& p) {
  require_keys(t, {"stride", "test_fraction", "augment_fraction", "distract_fraction", "include_fraction"},
               "[dataset]");
  read(t, "stride", p.stride, "dataset");
  read(t, "test_fraction", p.test_fraction, "dataset");
  read(t, "augment_fraction", p.augment_fraction, "dataset");
  read(t, "distract_fraction", p.distract_fraction, "dataset");
  if (const auto* inc = sub(t, "include_fraction", "dataset")) {
    for (const auto& [key, node] : *inc) {
      const auto corpus = enum_from_name<Corpus>(key.str(), kCorpusNames, "corpus");
      auto v = node.value<double>();
      if (!v) throw InvalidArgument("dataset.include_fraction." + std::string(key.str()) + " must be a number");
      p.include_fraction[corpus] = *v;
    }
  }
}

// Policy sections may live in the run config itself or in a separate file.
inline void read_policy_sections(const toml::table& t, BuildPolicy& p) {
  if (const auto* s = sub(t, "dataset", "config")) read_dataset(*s, p);
  if (const auto* s = sub(t, "augment", "config")) read_augment(*s, p.augment);
  if (const auto* s = sub(t, "distract", "config")) read_distract(*s, p.distract);
}

inline toml::table parse_toml(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InvalidArgument("config file not found: '" + path.string() + "'");
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw InvalidArgument("cannot parse '" + path.string() + "': " + std::string(e.description()));
  }
}

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

}  // namespace detail

/// Reads only the [dataset], [augment] and [distract] sections.
inline BuildPolicy load_policy(const std::filesystem::path& path) {
  const toml::table t = detail::parse_toml(path);
  detail::require_keys(t, {"dataset", "augment", "distract"}, "policy file '" + path.string() + "'");
  BuildPolicy p;
  detail::read_policy_sections(t, p);
  p.validate();
  return p;
}

/// Relative paths resolve against the config file's directory.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  const toml::table t = detail::parse_toml(path);
  detail::require_keys(t, {"seed", "paths", "ssim", "losses", "dataset", "augment", "distract", "grid"},
                       "config file '" + path.string() + "'");
  RunConfig cfg;
  if (t.get("seed")) {
    std::int64_t seed = 0;
    detail::read(t, "seed", seed, "config");
    if (seed < 0) throw InvalidArgument("seed must be >= 0");
    cfg.master_seed = static_cast<std::uint64_t>(seed);
  }
  const auto base = path.parent_path();
  if (const auto* p = detail::sub(t, "paths", "config")) {
    detail::require_keys(*p, {"sources", "boxes", "out_dir", "policy"}, "[paths]");
    detail::read(*p, "sources", cfg.sources, "paths");
    detail::read(*p, "boxes", cfg.boxes, "paths");
    detail::read(*p, "out_dir", cfg.out_dir, "paths");
    detail::read(*p, "policy", cfg.policy, "paths");
    cfg.sources = detail::resolve_path(cfg.sources, base);
    cfg.boxes = detail::resolve_path(cfg.boxes, base);
    cfg.out_dir = detail::resolve_path(cfg.out_dir, base);
    cfg.policy = detail::resolve_path(cfg.policy, base);
  }
  if (!cfg.policy.empty()) cfg.build = load_policy(cfg.policy);
  detail::read_policy_sections(t, cfg.build);
  if (const auto* s = detail::sub(t, "ssim", "config")) detail::read_ssim(*s, cfg.ssim);
  cfg.build.ssim = cfg.ssim;
  if (const auto* s = detail::sub(t, "losses", "config")) detail::read_losses(*s, cfg.losses);
  if (const auto* g = detail::sub(t, "grid", "config")) {
    detail::require_keys(*g, {"thresholds", "fractions"}, "[grid]");
    if (const auto* n = g->get("thresholds")) cfg.thresholds = detail::read_numbers(*n, "grid.thresholds");
    if (const auto* n = g->get("fractions")) cfg.fractions = detail::read_numbers(*n, "grid.fractions");
  }
  cfg.build.validate();
  return cfg;
}

}  // namespace mriforge
