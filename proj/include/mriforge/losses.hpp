#pragma once

// Evaluative forms of the MRI-GAN objectives: the generator's adversarial,
// pixel and perceptual terms, their weighted total, and the least-squares
// PatchGAN discriminator loss. Batch reductions run in a fixed order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mriforge/error.hpp"
#include "mriforge/ssim.hpp"

namespace mriforge {

enum class L2Mode {
  Mse,   // mean squared pixel difference per sample
  Norm,  // unsquared Euclidean norm of the difference per sample
};

struct LossConfig {
  double lambda = 100.0;
  double tau = 0.3;
  double eta = 0.5;
  L2Mode l2_mode = L2Mode::Mse;
  // Discriminator targets: 0 marks a true (face, MRI) pair, 1 a generated one.
  double real_label = 0.0;
  double fake_label = 1.0;

  void validate() const {
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0, 1]");
    if (!(eta > 0.0)) throw InvalidArgument("eta must be > 0");
  }
};

inline constexpr double kLogClamp = 1e-12;

namespace detail {

// Mean summed in ascending order, so any permutation of the terms gives a
// bit-identical result.
inline double canonical_mean(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / static_cast<double>(terms.size());
}

}  // namespace detail

/// Batch of 2-D score grids (discriminator outputs or target labels).
struct PatchGrid {
  std::size_t batch = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // batch-major, then row-major

  static PatchGrid filled(std::size_t batch, std::size_t rows, std::size_t cols, double v) {
    return PatchGrid{batch, rows, cols, std::vector<double>(batch * rows * cols, v)};
  }

  bool same_shape(const PatchGrid& o) const { return batch == o.batch && rows == o.rows && cols == o.cols; }

  void validate() const {
    if (values.size() != batch * rows * cols) {
      throw InvalidArgument("patch grid holds " + std::to_string(values.size()) + " values, shape needs " +
                            std::to_string(batch * rows * cols));
    }
    if (values.empty()) throw InvalidArgument("patch grid is empty");
  }

  std::string shape() const {
    return std::to_string(batch) + "x" + std::to_string(rows) + "x" + std::to_string(cols);
  }
};

struct MriBatch {
  std::vector<MriImage> generated;
  std::vector<MriImage> truth;

  void validate() const {
    if (generated.size() != truth.size()) {
      throw InvalidArgument("MRI batch has " + std::to_string(generated.size()) + " generated and " +
                            std::to_string(truth.size()) + " ground-truth images");
    }
    if (generated.empty()) throw InvalidArgument("MRI batch is empty");
    for (std::size_t i = 0; i < generated.size(); ++i) detail::require_same_shape(generated[i], truth[i]);
  }
};

/// Mean of log(1 - D(G(x))) over batch and grid; log argument floored at
/// 1e-12.
inline double cgan_generator_term(const PatchGrid& d_on_generated) {
  d_on_generated.validate();
  std::vector<double> terms;
  terms.reserve(d_on_generated.values.size());
  for (double d : d_on_generated.values) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw InvalidArgument("discriminator score " + std::to_string(d) + " outside [0, 1]");
    }
    terms.push_back(std::log(std::max(1.0 - d, kLogClamp)));
  }
  return detail::canonical_mean(std::move(terms));
}

inline double l2_term(const MriBatch& b, L2Mode mode = L2Mode::Mse) {
  b.validate();
  std::vector<double> per_sample;
  for (std::size_t i = 0; i < b.generated.size(); ++i) {
    const auto& g = b.generated[i].values();
    const auto& t = b.truth[i].values();
    double sq = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) sq += (g[k] - t[k]) * (g[k] - t[k]);
    per_sample.push_back(mode == L2Mode::Mse ? sq / static_cast<double>(g.size()) : std::sqrt(sq));
  }
  return detail::canonical_mean(std::move(per_sample));
}

// sqrt(1 - SSIM) given an SSIM index, floored at zero.
inline double ssim_distance(double ssim) { return std::sqrt(std::max(0.0, 1.0 - ssim)); }

inline double perceptual_term(const MriBatch& b, const SsimConfig& cfg) {
  b.validate();
  std::vector<double> per_sample;
  for (std::size_t i = 0; i < b.generated.size(); ++i) {
    per_sample.push_back(ssim_distance(ssim_index(b.generated[i], b.truth[i], cfg)));
  }
  return detail::canonical_mean(std::move(per_sample));
}

inline double generator_loss(double cgan, double l2, double per, const LossConfig& cfg) {
  cfg.validate();
  // Expanded so each term carries its own slope: lambda*tau and lambda*(1 - tau).
  return cgan + (cfg.lambda * cfg.tau) * l2 + (cfg.lambda * (1.0 - cfg.tau)) * per;
}

namespace detail {

inline double mean_squared_error(const PatchGrid& target, const PatchGrid& pred, const char* side) {
  target.validate();
  pred.validate();
  if (!target.same_shape(pred)) {
    throw InvalidArgument(std::string(side) + " target grid " + target.shape() + " does not match prediction " +
                          pred.shape());
  }
  std::vector<double> terms(target.values.size());
  for (std::size_t i = 0; i < target.values.size(); ++i) {
    const double d = target.values[i] - pred.values[i];
    terms[i] = d * d;
  }
  return canonical_mean(std::move(terms));
}

}  // namespace detail

/// eta * (MSE(fake targets, fake predictions) + MSE(real targets, real
/// predictions)).
inline double discriminator_loss(const PatchGrid& fake_target, const PatchGrid& fake_pred,
                                 const PatchGrid& real_target, const PatchGrid& real_pred, const LossConfig& cfg) {
  cfg.validate();
  return cfg.eta * (detail::mean_squared_error(fake_target, fake_pred, "fake") +
                    detail::mean_squared_error(real_target, real_pred, "real"));
}

// Target grid shaped like `like`, filled with the configured label.
inline PatchGrid fake_targets(const PatchGrid& like, const LossConfig& cfg) {
  return PatchGrid::filled(like.batch, like.rows, like.cols, cfg.fake_label);
}

inline PatchGrid real_targets(const PatchGrid& like, const LossConfig& cfg) {
  return PatchGrid::filled(like.batch, like.rows, like.cols, cfg.real_label);
}

/// Mean SSIM index over (generated, truth) pairs, the training-progress
/// score.
inline double mean_ssim_score(std::span<const MriImage> generated, std::span<const MriImage> truth,
                              const SsimConfig& cfg) {
  if (generated.size() != truth.size()) {
    throw InvalidArgument("mean SSIM needs equal-length sets, got " + std::to_string(generated.size()) + " and " +
                          std::to_string(truth.size()));
  }
  if (generated.empty()) throw InvalidArgument("mean SSIM over an empty set");
  std::vector<double> scores;
  for (std::size_t i = 0; i < generated.size(); ++i) scores.push_back(ssim_index(generated[i], truth[i], cfg));
  return detail::canonical_mean(std::move(scores));
}

}  // namespace mriforge
