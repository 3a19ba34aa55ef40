#pragma once

// Procedural stand-in corpus: real videos show a drifting cartoon face over a
// textured background; each fake copies a real video and repaints the lower
// face on a seeded subset of frames (always including frame 0). Untampered
// fake frames are byte-identical to their source frames.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mriforge/dataset.hpp"
#include "mriforge/detect.hpp"
#include "mriforge/image.hpp"
#include "mriforge/image_io.hpp"
#include "mriforge/parallel.hpp"
#include "mriforge/seed.hpp"

namespace mriforge {

struct SynthOptions {
  int n_videos = 8;  // even; half real, half fake
  int frames_per_video = 10;
  int width = 64;
  int height = 64;
  Corpus corpus = Corpus::Synthetic;
  double tamper_probability = 0.5;  // per frame after frame 0

  void validate() const {
    if (n_videos < 2 || n_videos % 2 != 0) throw InvalidArgument("n_videos must be an even number >= 2");
    if (frames_per_video < 1) throw InvalidArgument("frames_per_video must be >= 1");
    if (width < 32 || height < 32) throw InvalidArgument("synthetic frames must be at least 32x32");
    if (!(tamper_probability >= 0.0 && tamper_probability <= 1.0)) {
      throw InvalidArgument("tamper_probability must lie in [0, 1]");
    }
  }
};

struct LabelRecord {
  std::string video_id;
  Label label = Label::Real;
};

inline void to_json(json& j, const LabelRecord& r) { j = json{{"video_id", r.video_id}, {"label", label_name(r.label)}}; }
inline void from_json(const json& j, LabelRecord& r) {
  r.video_id = j.at("video_id").get<std::string>();
  r.label = parse_label(j.at("label").get<std::string>());
}

struct SynthCorpus {
  std::vector<SourceVideoMeta> sources;
  std::vector<FaceBox> boxes;
  std::vector<LabelRecord> labels;
  std::vector<std::vector<bool>> tampered;  // per fake video, per frame
};

inline constexpr const char* kSourcesFile = "sources.jsonl";
inline constexpr const char* kBoxesFile = "boxes.jsonl";
inline constexpr const char* kLabelsFile = "labels.jsonl";

namespace detail {

struct FaceLayout {
  int cx, cy, rx, ry;
  float skin[3];
  float bg[3];
};

inline std::string video_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d", prefix, i);
  return buf;
}

// Triangle wave in [-amp, amp] with the given period; integer arithmetic only.
inline int triangle(int t, int period, int amp) {
  const int phase = t % period;
  const int half = period / 2;
  const int v = phase < half ? phase : period - phase;
  return (v * 2 * amp) / half - amp;
}

inline FaceLayout face_layout(const SynthOptions& o, Rng& rng) {
  FaceLayout f{};
  f.rx = o.width / 5;
  f.ry = o.height / 4;
  f.cx = o.width / 2;
  f.cy = o.height / 2;
  for (int c = 0; c < 3; ++c) {
    f.skin[c] = static_cast<float>(rng.uniform_int(120, 230));
    f.bg[c] = static_cast<float>(rng.uniform_int(20, 110));
  }
  return f;
}

inline bool inside_ellipse(int x, int y, int cx, int cy, int rx, int ry) {
  const long dx = x - cx, dy = y - cy;
  return dx * dx * ry * ry + dy * dy * rx * rx <= static_cast<long>(rx) * rx * ry * ry;
}

inline ImageBuf draw_real_frame(const SynthOptions& o, const FaceLayout& f, const std::vector<float>& texture, int t,
                                BBox& box) {
  ImageBuf img(o.width, o.height, 3);
  const int cx = f.cx + triangle(t, 16, 3);
  const int cy = f.cy + triangle(t + 4, 12, 2);
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      const float tex = texture[static_cast<std::size_t>(y) * o.width + x];
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = std::clamp(f.bg[c] + tex + static_cast<float>(y / 4), 0.0f, 255.0f);
      if (inside_ellipse(x, y, cx, cy, f.rx, f.ry)) {
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = f.skin[c] - static_cast<float>((x - cx + f.rx) / 4);
      }
    }
  }
  // Eyes and mouth.
  const int eye_dx = f.rx / 2, eye_y = cy - f.ry / 3, eye_r = std::max(1, f.rx / 5);
  for (int side : {-1, 1}) {
    for (int y = eye_y - eye_r; y <= eye_y + eye_r; ++y)
      for (int x = cx + side * eye_dx - eye_r; x <= cx + side * eye_dx + eye_r; ++x)
        if (inside_ellipse(x, y, cx + side * eye_dx, eye_y, eye_r, eye_r))
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = 30.0f;
  }
  const int mouth_y = cy + f.ry / 2, mouth_w = f.rx / 2 + 1;
  for (int y = mouth_y; y < mouth_y + 2; ++y)
    for (int x = cx - mouth_w; x <= cx + mouth_w; ++x) {
      img.at(x, y, 0) = 150.0f;
      img.at(x, y, 1) = 40.0f;
      img.at(x, y, 2) = 40.0f;
    }
  const int margin = 2;
  box = clip_box(BBox{cx - f.rx - margin, cy - f.ry - margin, 2 * (f.rx + margin) + 1, 2 * (f.ry + margin) + 1},
                 o.width, o.height);
  return img;
}

// Repaints the lower half of the face inside its box: shifted skin tone,
// a striped texture and a displaced mouth.
inline void tamper(ImageBuf& img, const BBox& box, Rng& rng) {
  const float shift[3] = {static_cast<float>(rng.uniform_int(-40, 40)), static_cast<float>(rng.uniform_int(-40, 40)),
                          static_cast<float>(rng.uniform_int(-40, 40))};
  const int period = rng.uniform_int(2, 4);
  const int y0 = box.y + box.h / 2, y1 = box.y + box.h - 3;
  const int x0 = box.x + box.w / 4, x1 = box.x + box.w - box.w / 4;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const float stripe = ((x + y) / period) % 2 == 0 ? 12.0f : -12.0f;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = std::clamp(img.at(x, y, c) + shift[c] + stripe, 0.0f, 255.0f);
    }
  }
}

}  // namespace detail

/// Writes frames/<video>/frame_NNNNN.png plus the sources, boxes and labels
/// JSONL files under out_dir. Output is a pure function of (options, seed).
inline SynthCorpus synth_corpus(const SynthOptions& opt, const SeedSpec& seed, const fs::path& out_dir,
                                std::size_t jobs = 1) {
  opt.validate();
  const int pairs = opt.n_videos / 2;
  SynthCorpus corpus;
  corpus.tampered.resize(static_cast<std::size_t>(pairs));

  struct PairOutput {
    std::vector<FaceBox> boxes;
    std::vector<bool> tampered;
  };
  auto make_pair = [&](std::size_t i) {
    const std::string real_id = detail::video_name("real", static_cast<int>(i));
    const std::string fake_id = detail::video_name("fake", static_cast<int>(i));
    Rng layout_rng(seed.child("layout").child(real_id));
    const detail::FaceLayout layout = detail::face_layout(opt, layout_rng);
    std::vector<float> texture(static_cast<std::size_t>(opt.width) * opt.height);
    for (auto& v : texture) v = static_cast<float>(layout_rng.uniform_int(-12, 12));

    Rng tamper_rng(seed.child("tamper").child(fake_id));
    fs::create_directories(out_dir / "frames" / real_id);
    fs::create_directories(out_dir / "frames" / fake_id);
    PairOutput out;
    for (int t = 0; t < opt.frames_per_video; ++t) {
      BBox box;
      const ImageBuf real = detail::draw_real_frame(opt, layout, texture, t, box);
      ImageBuf fake = real;
      const bool tampered = t == 0 || tamper_rng.bernoulli(opt.tamper_probability);
      if (tampered) detail::tamper(fake, box, tamper_rng);
      out.tampered.push_back(tampered);
      save_image(real, (out_dir / "frames" / real_id / frame_file_name(t)).string());
      save_image(fake, (out_dir / "frames" / fake_id / frame_file_name(t)).string());
      out.boxes.push_back(FaceBox{real_id, t, 0, box});
      out.boxes.push_back(FaceBox{fake_id, t, 0, box});
    }
    return out;
  };
  auto results = parallel_map(jobs, static_cast<std::size_t>(pairs), make_pair);

  for (int i = 0; i < pairs; ++i) {
    const std::string real_id = detail::video_name("real", i);
    const std::string fake_id = detail::video_name("fake", i);
    corpus.sources.push_back(SourceVideoMeta{real_id, Label::Real, "", "frames/" + real_id, opt.corpus});
    corpus.sources.push_back(SourceVideoMeta{fake_id, Label::Fake, real_id, "frames/" + fake_id, opt.corpus});
    corpus.labels.push_back(LabelRecord{real_id, Label::Real});
    corpus.labels.push_back(LabelRecord{fake_id, Label::Fake});
    auto& r = results[static_cast<std::size_t>(i)];
    corpus.boxes.insert(corpus.boxes.end(), r.boxes.begin(), r.boxes.end());
    corpus.tampered[static_cast<std::size_t>(i)] = std::move(r.tampered);
  }
  auto by_id = [](const auto& a, const auto& b) { return a.video_id < b.video_id; };
  std::sort(corpus.sources.begin(), corpus.sources.end(), by_id);
  std::sort(corpus.labels.begin(), corpus.labels.end(), by_id);
  std::stable_sort(corpus.boxes.begin(), corpus.boxes.end(), [](const FaceBox& a, const FaceBox& b) {
    return std::tie(a.video_id, a.frame_idx, a.face_idx) < std::tie(b.video_id, b.frame_idx, b.face_idx);
  });
  write_jsonl(out_dir / kSourcesFile, corpus.sources);
  write_jsonl(out_dir / kBoxesFile, corpus.boxes);
  write_jsonl(out_dir / kLabelsFile, corpus.labels);
  return corpus;
}

}  // namespace mriforge
