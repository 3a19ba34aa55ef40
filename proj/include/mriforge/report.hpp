#pragma once

// Machine-readable reports: the per-batch loss-evaluation report shared with
// the trainer, prediction index parsing for eval-losses, and the detection
// metrics/grid artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mriforge/dataset.hpp"
#include "mriforge/detect.hpp"
#include "mriforge/image_io.hpp"
#include "mriforge/losses.hpp"
#include "mriforge/ssim.hpp"

namespace mriforge {

struct LossRow {
  long batch = 0;
  double cgan = 0.0;
  double l2 = 0.0;
  double per = 0.0;
  double total_G = 0.0;
  double total_D = 0.0;
  double mean_ssim = 0.0;

  friend bool operator==(const LossRow&, const LossRow&) = default;
};

struct LossReport {
  LossConfig losses;
  SsimConfig ssim;
  std::vector<LossRow> rows;  // ascending batch id
};

inline void to_json(json& j, const LossRow& r) {
  j = json{{"batch", r.batch}, {"cgan", r.cgan},       {"l2", r.l2},           {"per", r.per},
           {"total_G", r.total_G}, {"total_D", r.total_D}, {"mean_ssim", r.mean_ssim}};
}

inline void from_json(const json& j, LossRow& r) {
  r.batch = j.at("batch").get<long>();
  r.cgan = j.at("cgan").get<double>();
  r.l2 = j.at("l2").get<double>();
  r.per = j.at("per").get<double>();
  r.total_G = j.at("total_G").get<double>();
  r.total_D = j.at("total_D").get<double>();
  r.mean_ssim = j.value("mean_ssim", 0.0);
}

inline void to_json(json& j, const LossReport& r) {
  j = json{{"config",
            {{"lambda", r.losses.lambda},
             {"tau", r.losses.tau},
             {"eta", r.losses.eta},
             {"l2_mode", r.losses.l2_mode == L2Mode::Mse ? "mse" : "norm"},
             {"real_label", r.losses.real_label},
             {"fake_label", r.losses.fake_label},
             {"ssim",
              {{"window", r.ssim.window},
               {"k1", r.ssim.k1},
               {"k2", r.ssim.k2},
               {"range", r.ssim.range},
               {"alpha", r.ssim.alpha},
               {"beta", r.ssim.beta},
               {"gamma", r.ssim.gamma}}}}},
           {"rows", r.rows}};
}

inline void from_json(const json& j, LossReport& r) {
  const auto& c = j.at("config");
  r.losses.lambda = c.at("lambda").get<double>();
  r.losses.tau = c.at("tau").get<double>();
  r.losses.eta = c.at("eta").get<double>();
  const auto mode = c.value("l2_mode", std::string("mse"));
  if (mode != "mse" && mode != "norm") throw InvalidArgument("l2_mode must be mse or norm");
  r.losses.l2_mode = mode == "mse" ? L2Mode::Mse : L2Mode::Norm;
  r.losses.real_label = c.value("real_label", 0.0);
  r.losses.fake_label = c.value("fake_label", 1.0);
  if (c.contains("ssim")) {
    const auto& s = c.at("ssim");
    r.ssim.window = s.value("window", r.ssim.window);
    r.ssim.k1 = s.value("k1", r.ssim.k1);
    r.ssim.k2 = s.value("k2", r.ssim.k2);
    r.ssim.range = s.value("range", r.ssim.range);
    r.ssim.alpha = s.value("alpha", r.ssim.alpha);
    r.ssim.beta = s.value("beta", r.ssim.beta);
    r.ssim.gamma = s.value("gamma", r.ssim.gamma);
  }
  r.rows = j.at("rows").get<std::vector<LossRow>>();
}

/// One evaluated sample: a generated MRI, its ground truth, and the
/// discriminator's score grids on the generated and true pairs.
struct LossSample {
  long batch = 0;
  MriImage generated;
  MriImage truth;
  std::vector<std::vector<double>> d_fake;
  std::vector<std::vector<double>> d_real;
};

namespace detail {

inline PatchGrid stack_grids(const std::vector<const std::vector<std::vector<double>>*>& grids, const char* what) {
  PatchGrid g;
  g.batch = grids.size();
  g.rows = grids.front()->size();
  g.cols = g.rows ? grids.front()->front().size() : 0;
  for (const auto* grid : grids) {
    if (grid->size() != g.rows) throw InvalidArgument(std::string(what) + " grids differ in row count within a batch");
    for (const auto& row : *grid) {
      if (row.size() != g.cols) throw InvalidArgument(std::string(what) + " grids are not rectangular");
      g.values.insert(g.values.end(), row.begin(), row.end());
    }
  }
  return g;
}

}  // namespace detail

/// Groups samples by batch id and evaluates every loss term per batch.
inline LossReport evaluate_losses(const std::vector<LossSample>& samples, const LossConfig& cfg,
                                  const SsimConfig& ssim) {
  cfg.validate();
  ssim.validate();
  if (samples.empty()) throw InvalidArgument("no samples to evaluate");
  std::map<long, std::vector<const LossSample*>> batches;
  for (const auto& s : samples) batches[s.batch].push_back(&s);
  LossReport report{cfg, ssim, {}};
  for (const auto& [id, members] : batches) {
    MriBatch b;
    std::vector<const std::vector<std::vector<double>>*> fake_grids, real_grids;
    for (const auto* s : members) {
      b.generated.push_back(s->generated);
      b.truth.push_back(s->truth);
      fake_grids.push_back(&s->d_fake);
      real_grids.push_back(&s->d_real);
    }
    const PatchGrid d_fake = detail::stack_grids(fake_grids, "d_fake");
    const PatchGrid d_real = detail::stack_grids(real_grids, "d_real");
    LossRow row;
    row.batch = id;
    row.cgan = cgan_generator_term(d_fake);
    row.l2 = l2_term(b, cfg.l2_mode);
    row.per = perceptual_term(b, ssim);
    row.total_G = generator_loss(row.cgan, row.l2, row.per, cfg);
    row.total_D = discriminator_loss(fake_targets(d_fake, cfg), d_fake, real_targets(d_real, cfg), d_real, cfg);
    row.mean_ssim = mean_ssim_score(b.generated, b.truth, ssim);
    report.rows.push_back(row);
  }
  return report;
}

/// Ground-truth MRI for a manifest entry: the raw sidecar for fakes, zeros
/// shaped like the face crop for reals.
inline MriImage load_truth_mri(const ManifestEntry& e, const fs::path& manifest_dir) {
  if (e.label == Label::Fake) {
    if (e.mri_raw_path.empty()) throw InvalidArgument("fake entry '" + e.item_key + "' has no raw MRI sidecar");
    return read_mri_raw((manifest_dir / e.mri_raw_path).string());
  }
  const ImageBuf face = load_image((manifest_dir / e.face_path).string());
  return MriImage(face.width(), face.height(), face.channels(), 0.0);
}

/// A predicted MRI from a raw sidecar or an 8-bit PNG (scaled to [0, 1]).
inline MriImage load_predicted_mri(const fs::path& path) {
  if (detail::has_suffix_ci(path.string(), ".mri")) return read_mri_raw(path.string());
  const ImageBuf img = load_image(path.string());
  MriImage m(img.width(), img.height(), img.channels());
  for (std::size_t i = 0; i < m.values().size(); ++i) m.values()[i] = img.pixels()[i] / 255.0;
  return m;
}

inline constexpr const char* kPredictionIndex = "index.jsonl";

/// Reads predictions_dir/index.jsonl, one line per sample:
/// {"item_key", "batch", "pred", "d_fake": [[..]], "d_real": [[..]]}.
/// `pred` is relative to predictions_dir; truth comes from the manifest.
inline std::vector<LossSample> load_loss_samples(const fs::path& manifest_path, const fs::path& predictions_dir) {
  const auto manifest = read_manifest(manifest_path);
  std::map<std::string, const ManifestEntry*> by_key;
  for (const auto& e : manifest) by_key[e.item_key] = &e;
  const fs::path index = predictions_dir / kPredictionIndex;
  if (!fs::exists(index)) throw InvalidArgument("prediction index not found: '" + index.string() + "'");
  std::ifstream in(index);
  std::vector<LossSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = index.string() + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      const auto key = j.at("item_key").get<std::string>();
      auto it = by_key.find(key);
      if (it == by_key.end()) throw InvalidArgument(where + ": item_key '" + key + "' not in manifest");
      LossSample s;
      s.batch = j.value("batch", 0L);
      s.generated = load_predicted_mri(predictions_dir / j.at("pred").get<std::string>());
      s.truth = load_truth_mri(*it->second, manifest_path.parent_path());
      s.d_fake = j.at("d_fake").get<std::vector<std::vector<double>>>();
      s.d_real = j.at("d_real").get<std::vector<std::vector<double>>>();
      if (s.d_fake.empty() || s.d_real.empty()) throw InvalidArgument(where + ": empty discriminator grid");
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw InvalidArgument(where + ": " + e.what());
    }
  }
  if (out.empty()) throw InvalidArgument("prediction index '" + index.string() + "' is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Detection reports

inline void to_json(json& j, const FaceScore& s) {
  j = json{{"video_id", s.video_id}, {"frame_idx", s.frame_idx}, {"face_idx", s.face_idx}, {"p_fake", s.p_fake}};
}

inline void from_json(const json& j, FaceScore& s) {
  s.video_id = j.at("video_id").get<std::string>();
  s.frame_idx = j.at("frame_idx").get<int>();
  s.face_idx = j.at("face_idx").get<int>();
  s.p_fake = j.at("p_fake").get<double>();
}

inline constexpr const char* kVideoScoreNote =
    "video score = fraction of faces with p_fake above the operating threshold";

namespace detail {

inline std::string fmt(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::optional<double>>> metric_rows(const MetricsReport& m) {
  return {{"tpr", m.tpr},           {"fnr", m.fnr},
          {"fpr", m.fpr},           {"tnr", m.tnr},
          {"accuracy", m.accuracy}, {"balanced_accuracy", m.balanced_accuracy},
          {"f1", m.f1},             {"precision", m.precision},
          {"specificity", m.specificity}, {"auc_roc", m.auc_roc}};
}

/// metric,value rows; absent metrics leave the value empty.
inline std::string metrics_csv(const MetricsReport& m) {
  std::string out = "# " + std::string(kVideoScoreNote) + "\nmetric,value\n";
  for (const auto& [name, v] : metric_rows(m)) out += name + "," + detail::fmt(v) + "\n";
  return out;
}

inline json grid_json(const GridSearchResult& g) {
  json table = json::array();
  for (const auto& c : g.table) {
    table.push_back({{"threshold", c.params.fake_frame_threshold},
                     {"fraction", c.params.fake_fraction},
                     {"tp", c.cm.tp},
                     {"fp", c.cm.fp},
                     {"tn", c.cm.tn},
                     {"fn", c.cm.fn},
                     {"balanced_accuracy", c.balanced_accuracy},
                     {"accuracy", c.accuracy}});
  }
  return json{{"objective", "balanced_accuracy"},
              {"tie_break", "lower threshold, then lower fraction"},
              {"best", {{"threshold", g.best.fake_frame_threshold}, {"fraction", g.best.fake_fraction}}},
              {"best_balanced_accuracy", g.best_balanced_accuracy},
              {"table", table}};
}

inline std::string summary_markdown(const AggregationParams& p, const ConfusionMatrix& cm, const MetricsReport& m,
                                    const std::vector<std::string>& dropped) {
  std::ostringstream md;
  char buf[128];
  md << "# Detection summary\n\n";
  std::snprintf(buf, sizeof buf, "threshold %.4f, fraction %.4f\n\n", p.fake_frame_threshold, p.fake_fraction);
  md << buf << "Note: " << kVideoScoreNote << ".\n\n";
  md << "| | predicted fake | predicted real |\n|---|---|---|\n";
  md << "| actual fake | " << cm.tp << " | " << cm.fn << " |\n";
  md << "| actual real | " << cm.fp << " | " << cm.tn << " |\n\n";
  md << "| metric | value |\n|---|---|\n";
  for (const auto& [name, v] : metric_rows(m)) md << "| " << name << " | " << (v ? detail::fmt(v) : "n/a") << " |\n";
  if (!dropped.empty()) {
    md << "\nDropped (no face scores):";
    for (const auto& d : dropped) md << " " << d;
    md << "\n";
  }
  return md.str();
}

}  // namespace mriforge
