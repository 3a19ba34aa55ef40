#pragma once

// Face-to-video aggregation, confusion counts, the metrics battery and the
// grid search over the two aggregation parameters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mriforge/error.hpp"

namespace mriforge {

enum class Label { Real, Fake };

inline std::string_view label_name(Label l) { return l == Label::Fake ? "fake" : "real"; }

inline Label parse_label(std::string_view s) {
  if (s == "fake" || s == "FAKE" || s == "1") return Label::Fake;
  if (s == "real" || s == "REAL" || s == "0") return Label::Real;
  throw InvalidArgument("unknown label '" + std::string(s) + "' (expected real or fake)");
}

struct FaceScore {
  std::string video_id;
  int frame_idx = 0;
  int face_idx = 0;
  double p_fake = 0.0;
};

struct AggregationParams {
  double fake_frame_threshold = 0.5;
  double fake_fraction = 0.5;

  void validate() const {
    if (!(fake_frame_threshold >= 0.0 && fake_frame_threshold <= 1.0) ||
        !(fake_fraction >= 0.0 && fake_fraction <= 1.0)) {
      throw InvalidArgument("aggregation threshold and fraction must lie in [0, 1]");
    }
  }

  friend bool operator==(const AggregationParams&, const AggregationParams&) = default;
};

// Operating points reported for the two detection pipelines.
inline constexpr AggregationParams kPlainFramesPreset{0.80, 0.30};
inline constexpr AggregationParams kMriPreset{0.70, 0.30};

inline AggregationParams preset(std::string_view name) {
  if (name == "plain" || name == "plain-frames") return kPlainFramesPreset;
  if (name == "mri" || name == "mri-based") return kMriPreset;
  throw InvalidArgument("unknown aggregation preset '" + std::string(name) + "' (plain or mri)");
}

struct VideoVerdict {
  Label verdict = Label::Real;
  double score = 0.0;  // fraction of faces above the threshold
  std::size_t above = 0;
  std::size_t total = 0;
};

/// A video is fake iff more than fake_fraction of its faces have p_fake
/// strictly above fake_frame_threshold. Both comparisons are strict.
inline VideoVerdict aggregate_video(std::span<const double> p_fake, const AggregationParams& p) {
  p.validate();
  if (p_fake.empty()) throw InvalidArgument("video has no face scores; verdict undetermined");
  VideoVerdict v;
  v.total = p_fake.size();
  v.above = static_cast<std::size_t>(
      std::count_if(p_fake.begin(), p_fake.end(), [&](double q) { return q > p.fake_frame_threshold; }));
  v.score = static_cast<double>(v.above) / static_cast<double>(v.total);
  v.verdict = v.score > p.fake_fraction ? Label::Fake : Label::Real;
  return v;
}

inline VideoVerdict aggregate_video(std::span<const FaceScore> faces, const AggregationParams& p) {
  std::vector<double> probs;
  probs.reserve(faces.size());
  for (const auto& f : faces) probs.push_back(f.p_fake);
  return aggregate_video(std::span<const double>(probs), p);
}

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Label> verdicts, std::span<const Label> truth) {
  if (verdicts.size() != truth.size()) {
    throw InvalidArgument("confusion needs aligned lists, got " + std::to_string(verdicts.size()) + " verdicts and " +
                          std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const bool pred_fake = verdicts[i] == Label::Fake;
    const bool is_fake = truth[i] == Label::Fake;
    if (pred_fake && is_fake) ++cm.tp;
    else if (pred_fake) ++cm.fp;
    else if (is_fake) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

/// P(score_pos > score_neg) + 0.5 * P(tie), from average ranks
/// (Mann-Whitney U).
inline double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_auc needs one label per score");
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Fake));
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidArgument("roc_auc needs at least one positive and one negative");
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == Label::Fake) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

struct MetricsReport {
  std::optional<double> tpr, fnr, fpr, tnr, accuracy, balanced_accuracy, f1, precision, specificity, auc_roc;
};

namespace detail {

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

/// Rates from the confusion matrix; AUC from the video scores. Ratios with a
/// zero denominator are absent rather than 0.
inline MetricsReport metrics(const ConfusionMatrix& cm, std::span<const double> video_scores,
                             std::span<const Label> labels) {
  if (video_scores.size() != labels.size()) throw InvalidArgument("metrics needs one label per video score");
  if (!video_scores.empty() && video_scores.size() != cm.total()) {
    throw InvalidArgument("confusion matrix covers " + std::to_string(cm.total()) + " videos but " +
                          std::to_string(video_scores.size()) + " scores were given");
  }
  MetricsReport r;
  r.tpr = detail::ratio(cm.tp, cm.tp + cm.fn);
  r.fnr = detail::ratio(cm.fn, cm.tp + cm.fn);
  r.tnr = detail::ratio(cm.tn, cm.tn + cm.fp);
  r.fpr = detail::ratio(cm.fp, cm.tn + cm.fp);
  r.specificity = r.tnr;
  r.accuracy = detail::ratio(cm.tp + cm.tn, cm.total());
  if (r.tpr && r.tnr) r.balanced_accuracy = (*r.tpr + *r.tnr) / 2.0;
  r.precision = detail::ratio(cm.tp, cm.tp + cm.fp);
  if (r.precision && r.tpr && (*r.precision + *r.tpr) > 0.0) {
    r.f1 = 2.0 * *r.precision * *r.tpr / (*r.precision + *r.tpr);
  }
  const bool both_classes = std::count(labels.begin(), labels.end(), Label::Fake) > 0 &&
                            std::count(labels.begin(), labels.end(), Label::Real) > 0;
  if (both_classes) r.auc_roc = roc_auc(video_scores, labels);
  return r;
}

/// Face scores for one video plus its ground truth.
struct LabelledVideo {
  std::string video_id;
  Label label = Label::Real;
  std::vector<double> p_fake;
};

struct VideoEvaluation {
  std::vector<Label> verdicts;
  std::vector<Label> labels;
  std::vector<double> scores;
  ConfusionMatrix cm;
};

inline VideoEvaluation evaluate_videos(std::span<const LabelledVideo> videos, const AggregationParams& p) {
  VideoEvaluation ev;
  for (const auto& v : videos) {
    const auto verdict = aggregate_video(std::span<const double>(v.p_fake), p);
    ev.verdicts.push_back(verdict.verdict);
    ev.labels.push_back(v.label);
    ev.scores.push_back(verdict.score);
  }
  ev.cm = confusion(ev.verdicts, ev.labels);
  return ev;
}

struct GridCell {
  AggregationParams params;
  ConfusionMatrix cm;
  double balanced_accuracy = 0.0;
  double accuracy = 0.0;
};

struct GridSearchResult {
  AggregationParams best;
  double best_balanced_accuracy = 0.0;
  std::vector<GridCell> table;  // threshold-major, both axes ascending
};

// lo, lo + step, ..., <= hi; values computed as lo + i * step.
inline std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw InvalidArgument("grid needs step > 0 and hi >= lo");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

// 0.05, 0.10, ..., 0.95; each value the correctly rounded k / 20.
inline std::vector<double> default_grid() {
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(k / 20.0);
  return out;
}

/// Exhaustive search maximising balanced accuracy. Ties go to the lower
/// threshold, then the lower fraction.
inline GridSearchResult grid_search(std::span<const LabelledVideo> videos, std::vector<double> thresholds,
                                    std::vector<double> fractions) {
  if (thresholds.empty() || fractions.empty()) throw InvalidArgument("grid search needs non-empty grids");
  if (videos.empty()) throw InvalidArgument("grid search needs at least one video");
  const bool has_fake = std::any_of(videos.begin(), videos.end(), [](const auto& v) { return v.label == Label::Fake; });
  const bool has_real = std::any_of(videos.begin(), videos.end(), [](const auto& v) { return v.label == Label::Real; });
  if (!has_fake || !has_real) throw InvalidArgument("grid search needs both real and fake videos");
  std::sort(thresholds.begin(), thresholds.end());
  std::sort(fractions.begin(), fractions.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());

  GridSearchResult result;
  bool have_best = false;
  for (double t : thresholds) {
    for (double f : fractions) {
      const AggregationParams p{t, f};
      const auto ev = evaluate_videos(videos, p);
      const auto m = metrics(ev.cm, {}, {});
      GridCell cell{p, ev.cm, *m.balanced_accuracy, *m.accuracy};
      if (!have_best || cell.balanced_accuracy > result.best_balanced_accuracy) {
        result.best = p;
        result.best_balanced_accuracy = cell.balanced_accuracy;
        have_best = true;
      }
      result.table.push_back(cell);
    }
  }
  return result;
}

/// Groups face scores by video and attaches labels. Videos without scores
/// are reported in `dropped`; scores for unlabelled videos are an error.
struct GroupedScores {
  std::vector<LabelledVideo> videos;  // sorted by video_id
  std::vector<std::string> dropped;
};

inline GroupedScores group_scores(std::span<const FaceScore> scores, const std::map<std::string, Label>& labels) {
  std::map<std::string, std::vector<const FaceScore*>> by_video;
  for (const auto& s : scores) {
    if (!(s.p_fake >= 0.0 && s.p_fake <= 1.0)) {
      throw InvalidArgument("p_fake " + std::to_string(s.p_fake) + " outside [0, 1] for video '" + s.video_id + "'");
    }
    if (!labels.contains(s.video_id)) throw InvalidArgument("no label for video '" + s.video_id + "'");
    by_video[s.video_id].push_back(&s);
  }
  GroupedScores out;
  for (const auto& [id, label] : labels) {
    auto it = by_video.find(id);
    if (it == by_video.end()) {
      out.dropped.push_back(id);
      continue;
    }
    auto faces = it->second;
    std::sort(faces.begin(), faces.end(), [](const FaceScore* a, const FaceScore* b) {
      return std::tie(a->frame_idx, a->face_idx) < std::tie(b->frame_idx, b->face_idx);
    });
    for (std::size_t i = 1; i < faces.size(); ++i) {
      if (faces[i]->frame_idx == faces[i - 1]->frame_idx && faces[i]->face_idx == faces[i - 1]->face_idx) {
        throw InvalidArgument("duplicate score for video '" + id + "' frame " + std::to_string(faces[i]->frame_idx) +
                              " face " + std::to_string(faces[i]->face_idx));
      }
    }
    LabelledVideo v{id, label, {}};
    for (const auto* f : faces) v.p_fake.push_back(f->p_fake);
    out.videos.push_back(std::move(v));
  }
  return out;
}

}  // namespace mriforge
