#pragma once

// Construction of the (face, MRI target) training corpus from fake/real video
// pairs: frame striding, face pairing, MRI targets, blank targets for reals,
// splits, the JSONL manifest and balanced per-epoch samples.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mriforge/augment.hpp"
#include "mriforge/detect.hpp"
#include "mriforge/distract.hpp"
#include "mriforge/error.hpp"
#include "mriforge/image.hpp"
#include "mriforge/image_io.hpp"
#include "mriforge/parallel.hpp"
#include "mriforge/seed.hpp"
#include "mriforge/ssim.hpp"

namespace mriforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum class Corpus { Dfdc, Celeb, Fdf, Ffhq, Synthetic };
inline constexpr std::string_view kCorpusNames[] = {"dfdc", "celeb", "fdf", "ffhq", "synthetic"};

enum class Split { Train, Test };
inline constexpr std::string_view kSplitNames[] = {"train", "test"};

struct SourceVideoMeta {
  std::string video_id;
  Label label = Label::Real;
  std::string original_id;  // source real video, fakes only
  std::string frame_dir;    // frames named frame_<index>.png|jpg
  Corpus corpus = Corpus::Synthetic;
};

struct FaceBox {
  std::string video_id;
  int frame_idx = 0;
  int face_idx = 0;
  BBox box;
};

struct ManifestEntry {
  std::string item_key;
  std::string video_id;
  int frame_idx = 0;
  int face_idx = 0;
  std::string face_path;     // relative to the manifest directory
  std::string mri_path;      // 8-bit target PNG
  std::string mri_raw_path;  // float sidecar, fakes only
  std::string pair_path;     // resized real crop the MRI was computed against, fakes only
  Label label = Label::Real;
  Split split = Split::Train;
  Corpus origin = Corpus::Synthetic;
  bool augmented = false;
  bool distracted = false;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct EpochSample {
  std::size_t epoch = 0;
  std::vector<std::size_t> indices;  // into the manifest entry list
  bool with_replacement = false;
};

struct BuildPolicy {
  int stride = 10;
  double test_fraction = 0.2;
  std::map<Corpus, double> include_fraction;  // missing corpus = 1.0
  double augment_fraction = 0.5;              // of included dfdc videos
  double distract_fraction = 0.5;
  PlanPolicy augment;
  DistractPolicy distract;
  SsimConfig ssim;

  double inclusion(Corpus c) const {
    auto it = include_fraction.find(c);
    return it == include_fraction.end() ? 1.0 : it->second;
  }

  void validate() const {
    if (stride < 1) throw InvalidArgument("frame stride must be >= 1");
    auto unit = [](double v, const char* what) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
    };
    unit(test_fraction, "test_fraction");
    unit(augment_fraction, "augment_fraction");
    unit(distract_fraction, "distract_fraction");
    for (const auto& [c, f] : include_fraction) unit(f, "include_fraction");
    mriforge::validate(augment);
    ssim.validate();
  }
};

inline std::vector<int> select_frames(int frame_count, int stride = 10) {
  if (frame_count < 0) throw InvalidArgument("frame count must be >= 0");
  if (stride < 1) throw InvalidArgument("frame stride must be >= 1");
  std::vector<int> out;
  for (int i = 0; i < frame_count; i += stride) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Face pairing

/// Face boxes keyed by video, then frame, then face index.
using BoxIndex = std::map<std::string, std::map<int, std::map<int, BBox>>>;

inline BoxIndex index_boxes(const std::vector<FaceBox>& boxes) {
  BoxIndex idx;
  for (const auto& b : boxes) {
    auto& slot = idx[b.video_id][b.frame_idx];
    if (slot.contains(b.face_idx)) {
      throw InvalidArgument("duplicate box for video '" + b.video_id + "' frame " + std::to_string(b.frame_idx) +
                            " face " + std::to_string(b.face_idx));
    }
    if (b.box.w <= 0 || b.box.h <= 0) {
      throw InvalidArgument("box for video '" + b.video_id + "' frame " + std::to_string(b.frame_idx) +
                            " has non-positive extents");
    }
    slot[b.face_idx] = b.box;
  }
  return idx;
}

struct FacePair {
  int frame_idx = 0;
  int face_idx = 0;
  ImageBuf fake;
  ImageBuf real;  // resized to the fake crop's dims
};

struct PairingResult {
  std::vector<FacePair> pairs;
  std::vector<std::string> skipped;  // one message per dropped face
};

/// Aligns faces by (frame index, face index). A face present on only one
/// side, or a frame missing on either side, is skipped and reported.
inline PairingResult pair_faces(const std::map<int, ImageBuf>& fake_frames, const std::map<int, ImageBuf>& real_frames,
                                const std::map<int, std::map<int, BBox>>& fake_boxes,
                                const std::map<int, std::map<int, BBox>>& real_boxes) {
  PairingResult out;
  for (const auto& [frame_idx, fake_frame] : fake_frames) {
    const auto fb = fake_boxes.find(frame_idx);
    if (fb == fake_boxes.end()) continue;
    const auto rb = real_boxes.find(frame_idx);
    const auto rf = real_frames.find(frame_idx);
    for (const auto& [face_idx, box] : fb->second) {
      if (rb == real_boxes.end() || rf == real_frames.end() || !rb->second.contains(face_idx)) {
        out.skipped.push_back("frame " + std::to_string(frame_idx) + " face " + std::to_string(face_idx) +
                              ": no matching face on the real side");
        continue;
      }
      FacePair p;
      p.frame_idx = frame_idx;
      p.face_idx = face_idx;
      p.fake = crop(fake_frame, box);
      p.real = resize(crop(rf->second, rb->second.at(face_idx)), p.fake.width(), p.fake.height());
      out.pairs.push_back(std::move(p));
    }
    if (rb != real_boxes.end()) {
      for (const auto& [face_idx, box] : rb->second) {
        if (!fb->second.contains(face_idx)) {
          out.skipped.push_back("frame " + std::to_string(frame_idx) + " face " + std::to_string(face_idx) +
                                ": no matching face on the fake side");
        }
      }
    }
  }
  return out;
}

inline const SourceVideoMeta& resolve_original(const std::vector<SourceVideoMeta>& sources,
                                               const SourceVideoMeta& fake) {
  for (const auto& s : sources) {
    if (s.video_id == fake.original_id && s.label == Label::Real) return s;
  }
  throw InvalidArgument("fake video '" + fake.video_id + "' references unknown real video '" + fake.original_id + "'");
}

// ---------------------------------------------------------------------------
// Frame directories

/// Frame index -> file path for every frame_<n>.png/.jpg/.jpeg in dir.
inline std::map<int, std::string> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("frame directory not found: '" + dir.string() + "'");
  static const std::regex pattern(R"(frame_(\d+)\.(png|jpg|jpeg|PNG|JPG|JPEG))");
  std::map<int, std::string> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const int idx = std::stoi(m[1].str());
    if (frames.contains(idx)) throw InvalidArgument("frame " + std::to_string(idx) + " appears twice in '" + dir.string() + "'");
    frames[idx] = entry.path().string();
  }
  return frames;
}

inline std::string frame_file_name(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05d.png", idx);
  return buf;
}

// ---------------------------------------------------------------------------
// Seeded selection

/// Deterministic subset of exactly round(fraction * n) ids, chosen by ranking
/// each id on a hash of (seed, tag, id). Independent of input order.
inline std::set<std::string> seeded_subset(std::vector<std::string> ids, double fraction, const SeedSpec& seed,
                                           std::string_view tag) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const auto take = static_cast<std::size_t>(round_half_away(fraction * static_cast<double>(ids.size())));
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  for (const auto& id : ids) ranked.emplace_back(seed.child(tag).child(id).stream_seed(), id);
  std::sort(ranked.begin(), ranked.end());
  std::set<std::string> out;
  for (std::size_t i = 0; i < take && i < ranked.size(); ++i) out.insert(ranked[i].second);
  return out;
}

inline std::string make_item_key(const std::string& video_id, int frame_idx, int face_idx) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "/frame%05d/face%02d", frame_idx, face_idx);
  return video_id + buf;
}

// ---------------------------------------------------------------------------
// JSONL records

template <class T>
void write_jsonl(const fs::path& path, const std::vector<T>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) out << json(r).dump() << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

template <class T>
std::vector<T> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<T>());
    } catch (const json::exception& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace detail {

inline void require_safe_id(const std::string& id) {
  static const std::regex ok(R"([A-Za-z0-9][A-Za-z0-9_.\-]*)");
  if (!std::regex_match(id, ok) || id.find("..") != std::string::npos) {
    throw InvalidArgument("video id '" + id + "' must match [A-Za-z0-9][A-Za-z0-9_.-]*");
  }
}

}  // namespace detail

inline void to_json(json& j, const SourceVideoMeta& m) {
  j = json{{"video_id", m.video_id},
           {"label", label_name(m.label)},
           {"frame_dir", m.frame_dir},
           {"corpus", kCorpusNames[static_cast<std::size_t>(m.corpus)]}};
  if (m.label == Label::Fake) j["original_id"] = m.original_id;
}

inline void from_json(const json& j, SourceVideoMeta& m) {
  m.video_id = j.at("video_id").get<std::string>();
  detail::require_safe_id(m.video_id);
  m.label = parse_label(j.at("label").get<std::string>());
  m.frame_dir = j.at("frame_dir").get<std::string>();
  m.corpus = enum_from_name<Corpus>(j.value("corpus", std::string("synthetic")), kCorpusNames, "corpus");
  m.original_id = j.contains("original_id") && !j.at("original_id").is_null() ? j.at("original_id").get<std::string>() : "";
  if (m.label == Label::Fake && m.original_id.empty()) {
    throw InvalidArgument("fake video '" + m.video_id + "' has no original_id");
  }
  if (m.label == Label::Real && !m.original_id.empty()) {
    throw InvalidArgument("real video '" + m.video_id + "' must not carry an original_id");
  }
}

inline void to_json(json& j, const FaceBox& b) {
  j = json{{"video_id", b.video_id}, {"frame_idx", b.frame_idx}, {"face_idx", b.face_idx},
           {"x", b.box.x},           {"y", b.box.y},                {"w", b.box.w},
           {"h", b.box.h}};
}

inline void from_json(const json& j, FaceBox& b) {
  b.video_id = j.at("video_id").get<std::string>();
  b.frame_idx = j.at("frame_idx").get<int>();
  b.face_idx = j.at("face_idx").get<int>();
  b.box = BBox{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
}

inline void to_json(json& j, const ManifestEntry& e) {
  j = json{{"item_key", e.item_key},
           {"video_id", e.video_id},
           {"frame_idx", e.frame_idx},
           {"face_idx", e.face_idx},
           {"face_path", e.face_path},
           {"mri_path", e.mri_path},
           {"label", label_name(e.label)},
           {"split", kSplitNames[static_cast<std::size_t>(e.split)]},
           {"origin", kCorpusNames[static_cast<std::size_t>(e.origin)]},
           {"augmented", e.augmented},
           {"distracted", e.distracted}};
  if (!e.mri_raw_path.empty()) j["mri_raw_path"] = e.mri_raw_path;
  if (!e.pair_path.empty()) j["pair_path"] = e.pair_path;
}

inline void from_json(const json& j, ManifestEntry& e) {
  e.item_key = j.at("item_key").get<std::string>();
  e.video_id = j.at("video_id").get<std::string>();
  e.frame_idx = j.at("frame_idx").get<int>();
  e.face_idx = j.at("face_idx").get<int>();
  e.face_path = j.at("face_path").get<std::string>();
  e.mri_path = j.at("mri_path").get<std::string>();
  e.mri_raw_path = j.value("mri_raw_path", std::string());
  e.pair_path = j.value("pair_path", std::string());
  e.label = parse_label(j.at("label").get<std::string>());
  e.split = enum_from_name<Split>(j.at("split").get<std::string>(), kSplitNames, "split");
  e.origin = enum_from_name<Corpus>(j.at("origin").get<std::string>(), kCorpusNames, "corpus");
  e.augmented = j.value("augmented", false);
  e.distracted = j.value("distracted", false);
}

inline void to_json(json& j, const EpochSample& s) {
  j = json{{"epoch", s.epoch}, {"with_replacement", s.with_replacement}, {"indices", s.indices}};
}

inline void from_json(const json& j, EpochSample& s) {
  s.epoch = j.at("epoch").get<std::size_t>();
  s.with_replacement = j.at("with_replacement").get<bool>();
  s.indices = j.at("indices").get<std::vector<std::size_t>>();
}

// ---------------------------------------------------------------------------
// Manifest build

struct Manifest {
  std::vector<ManifestEntry> entries;  // sorted by item_key
  std::vector<std::string> warnings;
};

inline constexpr const char* kManifestFile = "manifest.jsonl";

namespace detail {

struct VideoBuildResult {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;
  std::set<std::tuple<int, int, int>> blank_dims;  // (w, h, channels) of blank targets needed
};

inline std::string blank_target_path(int w, int h, int c) {
  return "targets/blank_" + std::to_string(w) + "x" + std::to_string(h) + "x" + std::to_string(c) + ".png";
}

inline std::map<int, ImageBuf> load_selected(const SourceVideoMeta& meta, const fs::path& base, int stride,
                                             std::map<int, std::string>* all_paths = nullptr) {
  const fs::path dir = fs::path(meta.frame_dir).is_absolute() ? fs::path(meta.frame_dir) : base / meta.frame_dir;
  const auto paths = list_frames(dir);
  if (!paths.empty() && (paths.begin()->first != 0 || paths.rbegin()->first != static_cast<int>(paths.size()) - 1)) {
    throw InvalidArgument("frames in '" + dir.string() + "' are not numbered contiguously from 0");
  }
  if (all_paths) *all_paths = paths;
  std::map<int, ImageBuf> frames;
  for (int idx : select_frames(static_cast<int>(paths.size()), stride)) frames.emplace(idx, load_image(paths.at(idx)));
  return frames;
}

// Applies the video's distraction across its full frame sequence and returns
// the distracted frames at the selected indices.
inline std::map<int, ImageBuf> distract_video(const std::map<int, std::string>& all_paths,
                                              const std::vector<int>& selected, const DistractPolicy& policy,
                                              const SeedSpec& video_seed) {
  FrameSequence seq;
  for (const auto& [idx, path] : all_paths) {
    seq.frames.push_back(load_image(path));
    seq.indices.push_back(idx);
  }
  const auto& first = seq.frames.front();
  DistractionSpec spec = random_distraction(video_seed.child("spec"), policy, first.width(), first.height());
  if (spec.mode == OverlayMode::Rolling && seq.frames.size() < 2) spec.mode = OverlayMode::Static;
  const FrameSequence out = apply_distraction(seq, spec, video_seed.child("overlay"));
  std::map<int, ImageBuf> frames;
  for (int idx : selected) frames.emplace(idx, out.frames.at(static_cast<std::size_t>(idx)));
  return frames;
}

}  // namespace detail

struct BuildInputs {
  std::vector<SourceVideoMeta> sources;
  std::vector<FaceBox> boxes;
  fs::path base_dir;  // relative frame_dir entries resolve against this
};

/// Builds the corpus under out_dir and writes out_dir/manifest.jsonl. The
/// output is a pure function of (inputs, policy, seed) for any `jobs`.
inline Manifest build_manifest(const BuildInputs& in, const BuildPolicy& policy, const fs::path& out_dir,
                               const SeedSpec& seed, std::size_t jobs = 1) {
  policy.validate();
  const BoxIndex boxes = index_boxes(in.boxes);
  std::set<std::string> seen;
  for (const auto& s : in.sources) {
    if (!seen.insert(s.video_id).second) throw InvalidArgument("duplicate video id '" + s.video_id + "'");
  }
  for (const auto& s : in.sources) {
    if (s.label == Label::Fake) resolve_original(in.sources, s);
  }

  // Seeded per-corpus inclusion, then augmentation/distraction selection
  // among the included dfdc videos.
  std::map<Corpus, std::vector<std::string>> by_corpus;
  for (const auto& s : in.sources) by_corpus[s.corpus].push_back(s.video_id);
  std::set<std::string> included;
  for (const auto& [corpus, ids] : by_corpus) {
    const auto subset = seeded_subset(ids, policy.inclusion(corpus), seed,
                                      "include/" + std::string(kCorpusNames[static_cast<std::size_t>(corpus)]));
    included.insert(subset.begin(), subset.end());
  }
  std::vector<std::string> dfdc_ids;
  for (const auto& s : in.sources)
    if (s.corpus == Corpus::Dfdc && included.contains(s.video_id)) dfdc_ids.push_back(s.video_id);
  const auto augmented = seeded_subset(dfdc_ids, policy.augment_fraction, seed, "augment-select");
  const auto distracted = seeded_subset(dfdc_ids, policy.distract_fraction, seed, "distract-select");

  std::vector<const SourceVideoMeta*> work;
  for (const auto& s : in.sources)
    if (included.contains(s.video_id)) work.push_back(&s);
  std::sort(work.begin(), work.end(), [](const auto* a, const auto* b) { return a->video_id < b->video_id; });

  fs::create_directories(out_dir);
  static const std::map<int, std::map<int, BBox>> kNoBoxes;
  auto boxes_for = [&](const std::string& id) -> const std::map<int, std::map<int, BBox>>& {
    auto it = boxes.find(id);
    return it == boxes.end() ? kNoBoxes : it->second;
  };

  auto build_one = [&](std::size_t k) -> detail::VideoBuildResult {
    const SourceVideoMeta& meta = *work[k];
    detail::VideoBuildResult res;
    const SeedSpec video_seed = seed.child("video").child(meta.video_id);
    const bool do_augment = augmented.contains(meta.video_id);
    const bool do_distract = distracted.contains(meta.video_id);
    const std::string& split_key = meta.label == Label::Fake ? meta.original_id : meta.video_id;
    const Split split =
        Rng(seed.child("split").child(split_key)).uniform() < policy.test_fraction ? Split::Test : Split::Train;

    const auto& own_boxes = boxes_for(meta.video_id);
    if (own_boxes.empty()) {
      res.warnings.push_back(meta.video_id + ": no face detections, video dropped");
      return res;
    }

    std::map<int, std::string> all_paths;
    std::map<int, ImageBuf> frames = detail::load_selected(meta, in.base_dir, policy.stride, &all_paths);
    if (do_distract && !frames.empty()) {
      std::vector<int> selected;
      for (const auto& [idx, img] : frames) selected.push_back(idx);
      frames = detail::distract_video(all_paths, selected, policy.distract, video_seed.child("distract"));
    }
    std::vector<AugmentSpec> plan;
    if (do_augment) plan = random_plan(video_seed.child("augment-plan"), policy.augment).specs;

    auto finish_face = [&](const ImageBuf& face, int frame_idx, int face_idx) {
      if (!do_augment) return quantize(face);
      const SeedSpec face_seed = video_seed.child("augment").child(make_item_key(meta.video_id, frame_idx, face_idx));
      return quantize(compose(face, plan, face_seed));
    };

    const fs::path face_dir = fs::path("faces") / meta.video_id;
    fs::create_directories(out_dir / face_dir);

    auto base_entry = [&](int frame_idx, int face_idx) {
      ManifestEntry e;
      e.item_key = make_item_key(meta.video_id, frame_idx, face_idx);
      e.video_id = meta.video_id;
      e.frame_idx = frame_idx;
      e.face_idx = face_idx;
      e.label = meta.label;
      e.split = split;
      e.origin = meta.corpus;
      e.augmented = do_augment;
      e.distracted = do_distract;
      char name[32];
      std::snprintf(name, sizeof name, "f%05d_%02d.png", frame_idx, face_idx);
      e.face_path = (face_dir / name).generic_string();
      return e;
    };

    if (meta.label == Label::Real) {
      for (const auto& [frame_idx, frame] : frames) {
        auto fb = own_boxes.find(frame_idx);
        if (fb == own_boxes.end()) continue;
        for (const auto& [face_idx, box] : fb->second) {
          const ImageBuf face = finish_face(crop(frame, box), frame_idx, face_idx);
          ManifestEntry e = base_entry(frame_idx, face_idx);
          save_image(face, (out_dir / e.face_path).string());
          e.mri_path = detail::blank_target_path(face.width(), face.height(), face.channels());
          res.blank_dims.emplace(face.width(), face.height(), face.channels());
          res.entries.push_back(std::move(e));
        }
      }
      return res;
    }

    const SourceVideoMeta& original = resolve_original(in.sources, meta);
    std::map<int, std::string> real_paths;
    auto real_frames = detail::load_selected(original, in.base_dir, policy.stride, &real_paths);
    // The real side receives the fake's overlay and augmentation draws, so the
    // MRI isolates the manipulation rather than the distortion.
    if (do_distract && !real_frames.empty()) {
      std::vector<int> selected;
      for (const auto& [idx, img] : real_frames) selected.push_back(idx);
      real_frames = detail::distract_video(real_paths, selected, policy.distract, video_seed.child("distract"));
    }
    PairingResult paired = pair_faces(frames, real_frames, own_boxes, boxes_for(original.video_id));
    for (const auto& msg : paired.skipped) res.warnings.push_back(meta.video_id + ": " + msg);
    if (paired.pairs.empty()) {
      res.warnings.push_back(meta.video_id + ": no paired faces, video dropped");
      return res;
    }
    const fs::path pair_dir = fs::path("pairs") / meta.video_id;
    const fs::path mri_dir = fs::path("mri") / meta.video_id;
    fs::create_directories(out_dir / pair_dir);
    fs::create_directories(out_dir / mri_dir);
    for (auto& p : paired.pairs) {
      const ImageBuf face = finish_face(p.fake, p.frame_idx, p.face_idx);
      const ImageBuf real = finish_face(p.real, p.frame_idx, p.face_idx);
      ManifestEntry e = base_entry(p.frame_idx, p.face_idx);
      const std::string stem = fs::path(e.face_path).stem().string();
      e.pair_path = (pair_dir / (stem + ".png")).generic_string();
      e.mri_path = (mri_dir / (stem + ".png")).generic_string();
      e.mri_raw_path = (mri_dir / (stem + ".mri")).generic_string();
      const MriImage mri = mri_image(face, real, policy.ssim);
      save_image(face, (out_dir / e.face_path).string());
      save_image(real, (out_dir / e.pair_path).string());
      try {
        export_mri(mri, (out_dir / e.mri_path).string(), (out_dir / e.mri_raw_path).string());
      } catch (const IoError& err) {
        res.warnings.push_back(e.item_key + ": MRI export failed, entry skipped: " + err.what());
        continue;
      }
      res.entries.push_back(std::move(e));
    }
    return res;
  };

  auto results = parallel_map(jobs, work.size(), build_one);

  Manifest manifest;
  std::set<std::tuple<int, int, int>> blank_dims;
  for (auto& r : results) {
    for (auto& e : r.entries) manifest.entries.push_back(std::move(e));
    for (auto& w : r.warnings) manifest.warnings.push_back(std::move(w));
    blank_dims.insert(r.blank_dims.begin(), r.blank_dims.end());
  }
  if (!blank_dims.empty()) fs::create_directories(out_dir / "targets");
  for (const auto& [w, h, c] : blank_dims) {
    save_image(ImageBuf(w, h, c, 0.0f), (out_dir / detail::blank_target_path(w, h, c)).string());
  }
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const auto& a, const auto& b) { return a.item_key < b.item_key; });
  write_jsonl(out_dir / kManifestFile, manifest.entries);
  return manifest;
}

inline std::vector<ManifestEntry> read_manifest(const fs::path& path) { return read_jsonl<ManifestEntry>(path); }

// ---------------------------------------------------------------------------
// Balanced epoch sampling

/// Every fake entry once plus an equal number of real entries, drawn without
/// replacement when there are enough reals and with replacement otherwise.
/// Order is shuffled per (seed, epoch). Only entries of `split` take part.
inline EpochSample balanced_epoch_sample(const std::vector<ManifestEntry>& manifest, std::size_t epoch,
                                         const SeedSpec& seed, std::optional<Split> split = Split::Train) {
  std::vector<std::size_t> fakes, reals;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (split && manifest[i].split != *split) continue;
    (manifest[i].label == Label::Fake ? fakes : reals).push_back(i);
  }
  if (fakes.empty() || reals.empty()) {
    throw InvalidArgument("balanced sampling needs at least one real and one fake entry");
  }
  Rng rng(seed.child("epoch").child(std::to_string(epoch)));
  EpochSample s;
  s.epoch = epoch;
  s.indices = fakes;
  if (reals.size() >= fakes.size()) {
    // Partial Fisher-Yates: the first |fakes| slots become a uniform subset.
    for (std::size_t i = 0; i < fakes.size(); ++i) {
      const std::size_t j = i + rng.below(reals.size() - i);
      std::swap(reals[i], reals[j]);
      s.indices.push_back(reals[i]);
    }
  } else {
    s.with_replacement = true;
    for (std::size_t i = 0; i < fakes.size(); ++i) s.indices.push_back(reals[rng.below(reals.size())]);
  }
  for (std::size_t i = s.indices.size(); i > 1; --i) std::swap(s.indices[i - 1], s.indices[rng.below(i)]);
  return s;
}

}  // namespace mriforge
