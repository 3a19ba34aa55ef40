// mriforge command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 invalid arguments or inputs. Logs go to stderr; artifacts to files or
// stdout.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "digest.hpp"
#include "mriforge/augment.hpp"
#include "mriforge/config.hpp"
#include "mriforge/dataset.hpp"
#include "mriforge/detect.hpp"
#include "mriforge/distract.hpp"
#include "mriforge/image_io.hpp"
#include "mriforge/losses.hpp"
#include "mriforge/report.hpp"
#include "mriforge/ssim.hpp"
#include "mriforge/synth.hpp"

namespace fs = std::filesystem;
using namespace mriforge;

namespace {

void log(const std::string& msg) { std::cerr << "mriforge: " << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& flag, const RunConfig& cfg) {
  if (flag) return *flag;
  if (cfg.master_seed) return *cfg.master_seed;
  throw InvalidArgument("a seed is required (--seed or `seed` in the config file)");
}

std::string pick(const std::string& flag, const std::string& from_config, const char* what) {
  const std::string& v = flag.empty() ? from_config : flag;
  if (v.empty()) throw InvalidArgument(std::string("missing ") + what);
  return v;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw InvalidArgument(std::string(what) + " not found: '" + path + "'");
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidArgument(std::string(what) + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + " is empty");
  return out;
}

// SSIM flag overrides shared by several commands.
struct SsimFlags {
  std::optional<int> window;
  std::optional<double> k1, k2, range;

  void add(CLI::App* cmd) {
    cmd->add_option("--window", window, "SSIM window side N (odd)");
    cmd->add_option("--k1", k1, "SSIM constant K1");
    cmd->add_option("--k2", k2, "SSIM constant K2");
    cmd->add_option("--range", range, "dynamic range L");
  }

  SsimConfig apply(SsimConfig cfg) const {
    if (window) cfg.window = *window;
    if (k1) cfg.k1 = *k1;
    if (k2) cfg.k2 = *k2;
    if (range) cfg.range = *range;
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mriforge: SSIM/MRI computation, MRI dataset construction, loss evaluation and video-level "
               "fake detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mriforge 0.1.0");

  RunConfig run;
  std::function<void()> action;
  SsimFlags ssim_flags;

  // ssim ------------------------------------------------------------------
  auto* ssim_cmd = app.add_subcommand("ssim", "print the SSIM index of two images");
  std::string ssim_a, ssim_b, ssim_map;
  ssim_cmd->add_option("a", ssim_a, "first image")->required();
  ssim_cmd->add_option("b", ssim_b, "second image")->required();
  ssim_cmd->add_option("--map", ssim_map, "write the SSIM map (clamped to [0, 1], x255) as PNG");
  ssim_flags.add(ssim_cmd);
  ssim_cmd->callback([&] {
    action = [&] {
      const auto cfg = ssim_flags.apply(run.ssim);
      const ImageBuf a = load_image(ssim_a), b = load_image(ssim_b);
      const SsimMap map = ssim_image(a, b, cfg);
      std::cout << fixed6(mean_value(map)) << '\n';
      if (!ssim_map.empty()) save_image(unit_map_to_image(map), ssim_map);
    };
  });

  // mri -------------------------------------------------------------------
  auto* mri_cmd = app.add_subcommand("mri", "write the MRI (1 - SSIM map) of an image pair");
  std::string mri_a, mri_b, mri_out, mri_raw_path;
  bool mri_raw = false;
  mri_cmd->add_option("a", mri_a, "face image")->required();
  mri_cmd->add_option("b", mri_b, "reference image")->required();
  mri_cmd->add_option("out", mri_out, "output PNG")->required();
  mri_cmd->add_flag("--raw", mri_raw, "also write the float sidecar next to the PNG (.mri)");
  mri_cmd->add_option("--raw-path", mri_raw_path, "sidecar path (implies --raw)");
  ssim_flags.add(mri_cmd);
  mri_cmd->callback([&] {
    action = [&] {
      const auto cfg = ssim_flags.apply(run.ssim);
      const MriImage m = mri_image(load_image(mri_a), load_image(mri_b), cfg);
      std::string raw = mri_raw_path;
      if (raw.empty() && mri_raw) raw = fs::path(mri_out).replace_extension(".mri").string();
      export_mri(m, mri_out, raw);
    };
  });

  // augment ---------------------------------------------------------------
  auto* aug_cmd = app.add_subcommand("augment", "apply augmentations to one image");
  std::string aug_in, aug_out, aug_key, aug_policy;
  std::vector<std::string> aug_specs;
  std::optional<std::uint64_t> aug_seed;
  aug_cmd->add_option("input", aug_in, "input image")->required();
  aug_cmd->add_option("output", aug_out, "output PNG")->required();
  aug_cmd->add_option("--spec", aug_specs, "kind[:name=value,...], applied in order (repeatable)");
  aug_cmd->add_option("--policy", aug_policy, "draw a random plan from this policy TOML instead");
  aug_cmd->add_option("--seed", aug_seed, "master seed");
  aug_cmd->add_option("--key", aug_key, "item key for the derived stream")->default_val("item");
  aug_cmd->callback([&] {
    action = [&] {
      const SeedSpec seed{require_seed(aug_seed, run), aug_key};
      AugmentPlan plan;
      if (!aug_policy.empty()) {
        if (!aug_specs.empty()) throw InvalidArgument("--spec and --policy are mutually exclusive");
        plan = random_plan(seed.child("plan"), load_policy(aug_policy).augment);
      } else {
        for (const auto& s : aug_specs) plan.specs.push_back(parse_augment_spec(s));
        plan.seed = seed;
      }
      for (const auto& s : plan.specs) log("augment: " + std::string(augment_kind(s)));
      save_image(compose(load_image(aug_in), plan), aug_out);
    };
  });

  // distract --------------------------------------------------------------
  auto* dis_cmd = app.add_subcommand("distract", "overlay a distraction on a frame directory");
  std::string dis_frames, dis_out, dis_key, dis_policy, dis_object, dis_mode, dis_color, dis_direction, dis_text;
  std::optional<std::uint64_t> dis_seed;
  int dis_scale = 1, dis_thickness = 1, dis_radius = 8, dis_rect_w = 12, dis_rect_h = 8;
  double dis_appear = 0.2;
  dis_cmd->add_option("--frames", dis_frames, "directory of frame_NNNNN.png|jpg files")->required();
  dis_cmd->add_option("--out", dis_out, "output directory")->required();
  dis_cmd->add_option("--seed", dis_seed, "master seed");
  dis_cmd->add_option("--key", dis_key, "item key for the derived stream")->default_val("video");
  dis_cmd->add_option("--policy", dis_policy, "policy TOML for a random distraction");
  dis_cmd->add_option("--object", dis_object, "text | circle | rectangle (omit for a random draw)");
  dis_cmd->add_option("--mode", dis_mode, "static | rolling | spontaneous")->default_val("static");
  dis_cmd->add_option("--color", dis_color, "red | blue | green | white | black")->default_val("white");
  dis_cmd->add_option("--direction", dis_direction, "right-to-left | left-to-right | up-to-down | down-to-up")
      ->default_val("left-to-right");
  dis_cmd->add_option("--text", dis_text, "8 alphanumeric characters (random if omitted)");
  dis_cmd->add_option("--font-scale", dis_scale, "1..6");
  dis_cmd->add_option("--thickness", dis_thickness, "1..3");
  dis_cmd->add_option("--radius", dis_radius, "circle radius");
  dis_cmd->add_option("--rect-w", dis_rect_w, "rectangle width");
  dis_cmd->add_option("--rect-h", dis_rect_h, "rectangle height");
  dis_cmd->add_option("--appear-probability", dis_appear, "per-frame probability (spontaneous)");
  dis_cmd->callback([&] {
    action = [&] {
      const SeedSpec seed{require_seed(dis_seed, run), dis_key};
      const auto paths = list_frames(dis_frames);
      if (paths.empty()) throw InvalidArgument("no frames in '" + dis_frames + "'");
      FrameSequence seq;
      for (const auto& [idx, path] : paths) {
        seq.frames.push_back(load_image(path));
        seq.indices.push_back(idx);
      }
      DistractionSpec spec;
      if (dis_object.empty()) {
        const DistractPolicy policy = dis_policy.empty() ? run.build.distract : load_policy(dis_policy).distract;
        spec = random_distraction(seed.child("spec"), policy, seq.frames[0].width(), seq.frames[0].height());
        if (spec.mode == OverlayMode::Rolling && seq.frames.size() < 2) spec.mode = OverlayMode::Static;
      } else {
        spec.object = enum_from_name<OverlayObject>(dis_object, kOverlayObjectNames, "overlay object");
        spec.mode = enum_from_name<OverlayMode>(dis_mode, kOverlayModeNames, "overlay mode");
        spec.color = enum_from_name<OverlayColor>(dis_color, kOverlayColorNames, "overlay color");
        spec.direction = enum_from_name<RollDirection>(dis_direction, kRollDirectionNames, "roll direction");
        spec.text = dis_text.empty() ? gen_random_text(seed.child("text")) : dis_text;
        spec.font_scale = dis_scale;
        spec.thickness = dis_thickness;
        spec.radius = dis_radius;
        spec.rect_w = dis_rect_w;
        spec.rect_h = dis_rect_h;
        spec.appear_probability = dis_appear;
      }
      log("distract: " + std::string(enum_name(spec.object, kOverlayObjectNames)) + ", " +
          std::string(enum_name(spec.mode, kOverlayModeNames)));
      const FrameSequence out = apply_distraction(seq, spec, seed.child("overlay"));
      fs::create_directories(dis_out);
      for (std::size_t i = 0; i < out.frames.size(); ++i) {
        save_image(out.frames[i], (fs::path(dis_out) / frame_file_name(out.indices[i])).string());
      }
    };
  });

  // synth-corpus ----------------------------------------------------------
  auto* syn_cmd = app.add_subcommand("synth-corpus", "generate a procedural real/fake video corpus");
  SynthOptions syn;
  std::string syn_out, syn_corpus = "synthetic";
  std::optional<std::uint64_t> syn_seed;
  std::size_t syn_jobs = 1;
  syn_cmd->add_option("--out", syn_out, "output directory")->required();
  syn_cmd->add_option("--seed", syn_seed, "master seed");
  syn_cmd->add_option("--videos", syn.n_videos, "number of videos (even)")->default_val(8);
  syn_cmd->add_option("--frames", syn.frames_per_video, "frames per video")->default_val(10);
  syn_cmd->add_option("--width", syn.width, "frame width")->default_val(64);
  syn_cmd->add_option("--height", syn.height, "frame height")->default_val(64);
  syn_cmd->add_option("--tamper-probability", syn.tamper_probability, "per-frame tamper probability after frame 0")
      ->default_val(0.5);
  syn_cmd->add_option("--corpus", syn_corpus, "corpus tag for the sources file")->default_val("synthetic");
  syn_cmd->add_option("--jobs", syn_jobs, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  syn_cmd->callback([&] {
    action = [&] {
      syn.corpus = enum_from_name<Corpus>(syn_corpus, kCorpusNames, "corpus");
      const auto c = synth_corpus(syn, SeedSpec{require_seed(syn_seed, run), "synth"}, syn_out, syn_jobs);
      log("synth-corpus: wrote " + std::to_string(c.sources.size()) + " videos to " + syn_out);
    };
  });

  // make-dataset ----------------------------------------------------------
  auto* mk_cmd = app.add_subcommand("make-dataset", "build face crops, MRI targets and the manifest");
  std::string mk_sources, mk_boxes, mk_out, mk_policy;
  std::optional<std::uint64_t> mk_seed;
  std::optional<int> mk_stride;
  std::size_t mk_jobs = 1, mk_epochs = 0;
  mk_cmd->add_option("--sources", mk_sources, "sources JSONL");
  mk_cmd->add_option("--boxes", mk_boxes, "face boxes JSONL");
  mk_cmd->add_option("--out", mk_out, "output directory");
  mk_cmd->add_option("--policy", mk_policy, "build policy TOML");
  mk_cmd->add_option("--seed", mk_seed, "master seed");
  mk_cmd->add_option("--stride", mk_stride, "frame stride");
  mk_cmd->add_option("--epochs", mk_epochs, "also write this many balanced epoch samples")->default_val(0);
  mk_cmd->add_option("--jobs", mk_jobs, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  ssim_flags.add(mk_cmd);
  mk_cmd->callback([&] {
    action = [&] {
      const std::string sources = pick(mk_sources, run.sources, "--sources");
      const std::string boxes = pick(mk_boxes, run.boxes, "--boxes");
      const std::string out = pick(mk_out, run.out_dir, "--out");
      require_file(sources, "sources file");
      require_file(boxes, "boxes file");
      const std::uint64_t seed = require_seed(mk_seed, run);
      BuildPolicy policy = mk_policy.empty() ? run.build : load_policy(mk_policy);
      if (mk_stride) policy.stride = *mk_stride;
      policy.ssim = ssim_flags.apply(run.ssim);
      BuildInputs in{read_jsonl<SourceVideoMeta>(sources), read_jsonl<FaceBox>(boxes), fs::path(sources).parent_path()};
      const Manifest m = build_manifest(in, policy, out, SeedSpec{seed, "dataset"}, mk_jobs);
      for (const auto& w : m.warnings) log("warning: " + w);
      if (mk_epochs > 0) {
        fs::create_directories(fs::path(out) / "epochs");
        for (std::size_t e = 0; e < mk_epochs; ++e) {
          const auto sample = balanced_epoch_sample(m.entries, e, SeedSpec{seed, "sampling"});
          char name[32];
          std::snprintf(name, sizeof name, "epoch_%04zu.json", e);
          write_text(fs::path(out) / "epochs" / name, json(sample).dump() + "\n");
        }
      }
      log("make-dataset: " + std::to_string(m.entries.size()) + " manifest entries");
      std::cout << "entries " << m.entries.size() << "\ndigest " << tools::tree_digest(out) << '\n';
    };
  });

  // eval-losses -----------------------------------------------------------
  auto* ev_cmd = app.add_subcommand("eval-losses", "evaluate generator/discriminator losses on predictions");
  std::string ev_manifest, ev_pred, ev_out, ev_l2_mode;
  std::optional<double> ev_lambda, ev_tau, ev_eta;
  double ev_range = 1.0;
  ev_cmd->add_option("--manifest", ev_manifest, "manifest JSONL")->required();
  ev_cmd->add_option("--predictions", ev_pred, "directory holding index.jsonl")->required();
  ev_cmd->add_option("--out", ev_out, "report JSON (stdout if omitted)");
  ev_cmd->add_option("--lambda", ev_lambda, "pixel/perceptual weight");
  ev_cmd->add_option("--tau", ev_tau, "L2 vs perceptual balance in [0, 1]");
  ev_cmd->add_option("--eta", ev_eta, "discriminator weight");
  ev_cmd->add_option("--l2-mode", ev_l2_mode, "mse | norm");
  ev_cmd->add_option("--ssim-range", ev_range, "dynamic range of MRI values")->default_val(1.0);
  ev_cmd->callback([&] {
    action = [&] {
      require_file(ev_manifest, "manifest");
      LossConfig lc = run.losses;
      if (ev_lambda) lc.lambda = *ev_lambda;
      if (ev_tau) lc.tau = *ev_tau;
      if (ev_eta) lc.eta = *ev_eta;
      if (ev_l2_mode == "norm") lc.l2_mode = L2Mode::Norm;
      else if (ev_l2_mode == "mse") lc.l2_mode = L2Mode::Mse;
      else if (!ev_l2_mode.empty()) throw InvalidArgument("--l2-mode must be mse or norm");
      SsimConfig sc = run.ssim;
      sc.range = ev_range;
      const auto report = evaluate_losses(load_loss_samples(ev_manifest, ev_pred), lc, sc);
      const std::string text = json(report).dump(2) + "\n";
      if (ev_out.empty()) std::cout << text;
      else write_text(ev_out, text);
    };
  });

  // detect / grid-search --------------------------------------------------
  std::string det_scores, det_labels, det_out, det_preset, det_thresholds, det_fractions;
  std::optional<double> det_threshold, det_fraction;
  bool det_grid = false;
  auto add_detect_options = [&](CLI::App* cmd, bool grid_only) {
    cmd->add_option("--scores", det_scores, "face scores JSONL")->required();
    cmd->add_option("--labels", det_labels, "video labels JSONL")->required();
    cmd->add_option("--out", det_out, "report directory");
    cmd->add_option("--thresholds", det_thresholds, "comma-separated threshold grid");
    cmd->add_option("--fractions", det_fractions, "comma-separated fraction grid");
    if (!grid_only) {
      cmd->add_option("--preset", det_preset, "plain | mri operating point");
      cmd->add_option("--threshold", det_threshold, "fake-frame threshold");
      cmd->add_option("--fraction", det_fraction, "fake fraction");
      cmd->add_flag("--grid", det_grid, "grid-search the two parameters first");
    }
  };
  auto run_detect = [&] {
    require_file(det_scores, "scores file");
    require_file(det_labels, "labels file");
    const auto scores = read_jsonl<FaceScore>(det_scores);
    if (scores.empty()) throw InvalidArgument("scores file '" + det_scores + "' is empty");
    std::map<std::string, Label> labels;
    for (const auto& r : read_jsonl<LabelRecord>(det_labels)) {
      if (!labels.emplace(r.video_id, r.label).second) throw InvalidArgument("duplicate label for '" + r.video_id + "'");
    }
    const GroupedScores grouped = group_scores(scores, labels);
    for (const auto& d : grouped.dropped) log("warning: " + d + ": no face scores, video dropped");
    if (grouped.videos.empty()) throw InvalidArgument("no labelled video has face scores");

    AggregationParams params;
    if (!det_preset.empty()) params = preset(det_preset);
    else if (!det_grid && !(det_threshold && det_fraction)) {
      throw InvalidArgument("give --preset, both --threshold and --fraction, or --grid");
    }
    if (det_threshold) params.fake_frame_threshold = *det_threshold;
    if (det_fraction) params.fake_fraction = *det_fraction;
    std::optional<GridSearchResult> grid;
    if (det_grid) {
      const auto t = det_thresholds.empty() ? run.thresholds : parse_list(det_thresholds, "--thresholds");
      const auto f = det_fractions.empty() ? run.fractions : parse_list(det_fractions, "--fractions");
      grid = grid_search(grouped.videos, t, f);
      params = grid->best;
    }
    params.validate();
    const auto ev = evaluate_videos(grouped.videos, params);
    const auto m = metrics(ev.cm, ev.scores, ev.labels);
    std::cout << "video_id,label,verdict,score\n";
    for (std::size_t i = 0; i < grouped.videos.size(); ++i) {
      std::cout << grouped.videos[i].video_id << ',' << label_name(ev.labels[i]) << ',' << label_name(ev.verdicts[i])
                << ',' << fixed6(ev.scores[i]) << '\n';
    }
    if (grid) {
      log("grid-search best: threshold " + fixed6(params.fake_frame_threshold) + ", fraction " +
          fixed6(params.fake_fraction) + ", balanced accuracy " + fixed6(grid->best_balanced_accuracy));
    }
    if (!det_out.empty()) {
      const fs::path out(det_out);
      write_text(out / "metrics.csv", metrics_csv(m));
      write_text(out / "summary.md", summary_markdown(params, ev.cm, m, grouped.dropped));
      if (grid) write_text(out / "grid.json", grid_json(*grid).dump(2) + "\n");
    }
  };
  auto* det_cmd = app.add_subcommand("detect", "aggregate face scores into video verdicts and metrics");
  add_detect_options(det_cmd, false);
  det_cmd->callback([&] { action = run_detect; });
  auto* grid_cmd = app.add_subcommand("grid-search", "alias of detect --grid");
  add_detect_options(grid_cmd, true);
  grid_cmd->callback([&] {
    det_grid = true;
    action = run_detect;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (const char* path = std::getenv("MRI_FORGE_CONFIG"); path && *path) run = load_run_config(path);
    if (action) action();
    return 0;
  } catch (const InvalidArgument& e) {
    log(std::string("error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
}
