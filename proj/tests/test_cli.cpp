#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mriforge/dataset.hpp"
#include "mriforge/report.hpp"
#include "mriforge/synth.hpp"
#include "test_util.hpp"

using namespace mriforge;
using testutil::TempDir;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const std::string& env = "") {
  TempDir scratch("cli_err");
  const std::string err_path = scratch / "stderr";
  const std::string cmd = env + " '" MRIFORGE_CLI "' " + args + " 2>'" + err_path + "'";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream e(err_path);
  r.err.assign(std::istreambuf_iterator<char>(e), std::istreambuf_iterator<char>());
  return r;
}

std::string text_of(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_scores(const TempDir& dir, const std::vector<FaceScore>& scores, const std::vector<LabelRecord>& labels) {
  write_jsonl(dir.path() / "scores.jsonl", scores);
  write_jsonl(dir.path() / "labels.jsonl", labels);
}

}  // namespace

TEST(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("detect --help").code, 0);
  const auto v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("mriforge"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("ssim --no-such-flag a b").code, 2);
  EXPECT_EQ(run("ssim onlyone").code, 2);
}

TEST(Cli, SsimOfImageWithItselfIsOne) {
  TempDir dir("cli");
  save_image(testutil::random_image(20, 20, 3, 1), dir / "a.png");
  const auto r = run("ssim " + (dir / "a.png") + " " + (dir / "a.png"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "1.000000\n");
}

TEST(Cli, SsimDimsMismatchExitsTwoAndNamesDims) {
  TempDir dir("cli");
  save_image(ImageBuf(10, 10, 3), dir / "a.png");
  save_image(ImageBuf(12, 10, 3), dir / "b.png");
  const auto r = run("ssim " + (dir / "a.png") + " " + (dir / "b.png"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("10x10x3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("12x10x3"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputFileNamesPath) {
  TempDir dir("cli");
  save_image(ImageBuf(4, 4, 1), dir / "a.png");
  const auto r = run("ssim " + (dir / "a.png") + " " + (dir / "ghost.png"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("ghost.png"), std::string::npos) << r.err;
}

TEST(Cli, MriRawSidecarMatchesLibrary) {
  TempDir dir("cli");
  const ImageBuf a = testutil::random_image(16, 16, 3, 2), b = testutil::random_image(16, 16, 3, 3);
  save_image(a, dir / "a.png");
  save_image(b, dir / "b.png");
  const auto r = run("mri " + (dir / "a.png") + " " + (dir / "b.png") + " " + (dir / "m.png") + " --raw");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bytes = testutil::read_bytes(dir.path() / "m.mri");
  ASSERT_GE(bytes.size(), 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MRI0");
  const MriImage raw = read_mri_raw(dir / "m.mri");
  const MriImage lib = mri_image(a, b, SsimConfig{});
  for (std::size_t i = 0; i < raw.values().size(); ++i)
    ASSERT_EQ(raw.values()[i], static_cast<double>(static_cast<float>(lib.values()[i])));
  EXPECT_EQ(load_image(dir / "m.png"), quantize(unit_map_to_image(lib)));
}

TEST(Cli, AugmentSpecMatchesLibraryAndNeedsSeed) {
  TempDir dir("cli");
  const ImageBuf a = testutil::random_image(16, 16, 3, 4);
  save_image(a, dir / "a.png");
  const auto r = run("augment " + (dir / "a.png") + " " + (dir / "o.png") +
                     " --spec brightness:delta=10 --spec hflip --seed 5 --key k");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_image(dir / "o.png"),
            quantize(compose(a, AugmentPlan{{aug::Brightness{10}, aug::HFlip{}}, SeedSpec{5, "k"}})));
  EXPECT_EQ(run("augment " + (dir / "a.png") + " " + (dir / "o.png") + " --spec hflip").code, 2);
  EXPECT_EQ(run("augment " + (dir / "a.png") + " " + (dir / "o.png") + " --spec sharpen --seed 1").code, 2);
}

TEST(Cli, DistractWritesEveryFrame) {
  TempDir dir("cli");
  fs::create_directories(dir.path() / "in");
  for (int i = 0; i < 4; ++i) save_image(ImageBuf(64, 32, 3, 0.0f), (dir.path() / "in" / frame_file_name(i)).string());
  const auto r = run("distract --frames " + (dir / "in") + " --out " + (dir / "out") +
                     " --seed 3 --object rectangle --mode rolling --rect-w 10 --rect-h 6");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(list_frames(dir.path() / "out").size(), 4u);
  const auto random = run("distract --frames " + (dir / "in") + " --out " + (dir / "out2") + " --seed 3");
  EXPECT_EQ(random.code, 0) << random.err;
  EXPECT_EQ(run("distract --frames " + (dir / "in") + " --out " + (dir / "o3") + " --seed 3 --object star").code, 2);
}

TEST(Cli, MakeDatasetReportsDigestAndRejectsMissingBoxes) {
  TempDir dir("cli");
  const auto s = run("synth-corpus --out " + (dir / "c") + " --seed 9 --videos 4 --frames 11");
  ASSERT_EQ(s.code, 0) << s.err;
  const std::string base = "make-dataset --sources " + (dir / "c/sources.jsonl") + " --seed 9 --stride 5";
  const auto a = run(base + " --boxes " + (dir / "c/boxes.jsonl") + " --out " + (dir / "d1") + " --epochs 2");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("entries "), std::string::npos);
  EXPECT_NE(a.out.find("digest "), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path() / "d1" / "epochs" / "epoch_0001.json"));
  const auto b = run(base + " --boxes " + (dir / "c/boxes.jsonl") + " --out " + (dir / "d2") + " --epochs 2 --jobs 3");
  EXPECT_EQ(a.out, b.out);
  const auto missing = run(base + " --boxes " + (dir / "c/none.jsonl") + " --out " + (dir / "d3"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("none.jsonl"), std::string::npos);
  EXPECT_EQ(run("make-dataset --sources " + (dir / "c/sources.jsonl") + " --boxes " + (dir / "c/boxes.jsonl") +
                " --out " + (dir / "d4"))
                .code,
            2);  // no seed
}

TEST(Cli, ConfigFileSuppliesSeedAndPaths) {
  TempDir dir("cli");
  ASSERT_EQ(run("synth-corpus --out " + (dir / "c") + " --seed 2 --videos 2 --frames 3").code, 0);
  std::ofstream(dir.path() / "run.toml") << "seed = 2\n[paths]\nsources = \"c/sources.jsonl\"\n"
                                            "boxes = \"c/boxes.jsonl\"\nout_dir = \"ds\"\n";
  const auto r = run("make-dataset", "MRI_FORGE_CONFIG='" + (dir / "run.toml") + "'");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir.path() / "ds" / kManifestFile));
  std::ofstream(dir.path() / "bad.toml") << "seeed = 2\n";
  EXPECT_EQ(run("make-dataset", "MRI_FORGE_CONFIG='" + (dir / "bad.toml") + "'").code, 2);
}

TEST(Cli, EvalLossesPerfectPredictionsLeaveOnlyCgan) {
  TempDir dir("cli");
  ASSERT_EQ(run("synth-corpus --out " + (dir / "c") + " --seed 4 --videos 2 --frames 1").code, 0);
  ASSERT_EQ(run("make-dataset --sources " + (dir / "c/sources.jsonl") + " --boxes " + (dir / "c/boxes.jsonl") +
                " --out " + (dir / "ds") + " --seed 4")
                .code,
            0);
  const fs::path manifest = dir.path() / "ds" / kManifestFile;
  const auto entries = read_manifest(manifest);
  ASSERT_EQ(entries.size(), 2u);
  fs::create_directories(dir.path() / "pred");
  std::ofstream index(dir.path() / "pred" / kPredictionIndex);
  std::vector<LossSample> samples;
  for (const auto& e : entries) {
    const MriImage truth = load_truth_mri(e, manifest.parent_path());
    const std::string name = e.video_id + ".mri";
    write_mri_raw(truth, (dir.path() / "pred" / name).string());
    index << json{{"item_key", e.item_key}, {"batch", 0}, {"pred", name}, {"d_fake", {{0.2, 0.8}}},
                  {"d_real", {{0.1, 0.3}}}}
                 .dump()
          << '\n';
    samples.push_back(LossSample{0, truth, truth, {{0.2, 0.8}}, {{0.1, 0.3}}});
  }
  index.close();
  const auto r = run("eval-losses --manifest '" + manifest.string() + "' --predictions " + (dir / "pred") + " --out " +
                     (dir / "report.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(text_of(dir.path() / "report.json"));
  const auto rows = report.at("rows");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("l2").get<double>(), 0.0);
  EXPECT_NEAR(rows[0].at("per").get<double>(), 0.0, 1e-6);
  EXPECT_NEAR(rows[0].at("total_G").get<double>(), rows[0].at("cgan").get<double>(), 1e-4);
  SsimConfig sc;
  sc.range = 1.0;
  const LossReport lib = evaluate_losses(samples, LossConfig{}, sc);
  EXPECT_NEAR(rows[0].at("cgan").get<double>(), lib.rows[0].cgan, 1e-12);
  EXPECT_NEAR(rows[0].at("total_G").get<double>(), lib.rows[0].total_G, 1e-12);
  EXPECT_NEAR(rows[0].at("total_D").get<double>(), lib.rows[0].total_D, 1e-12);
  EXPECT_EQ(report.get<LossReport>().rows.size(), 1u);
}

TEST(Cli, DetectMatchesLibrary) {
  TempDir dir("cli");
  Rng rng(SeedSpec{7, "cli-detect"});
  std::vector<FaceScore> scores;
  std::vector<LabelRecord> labels;
  std::vector<LabelledVideo> videos;
  for (int v = 0; v < 12; ++v) {
    const std::string id = "vid" + std::to_string(v);
    const Label l = v % 2 ? Label::Fake : Label::Real;
    labels.push_back({id, l});
    LabelledVideo lv{id, l, {}};
    for (int f = 0; f < 6; ++f) {
      const double p = l == Label::Fake ? rng.uniform(0.3, 1.0) : rng.uniform(0.0, 0.9);
      scores.push_back({id, f, 0, p});
      lv.p_fake.push_back(p);
    }
    videos.push_back(lv);
  }
  std::sort(videos.begin(), videos.end(), [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  write_scores(dir, scores, labels);
  const std::string io = "--scores " + (dir / "scores.jsonl") + " --labels " + (dir / "labels.jsonl");

  const auto r = run("detect " + io + " --preset mri --out " + (dir / "rep"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ev = evaluate_videos(videos, kMriPreset);
  std::ostringstream expect;
  expect << "video_id,label,verdict,score\n";
  for (std::size_t i = 0; i < videos.size(); ++i) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", ev.scores[i]);
    expect << videos[i].video_id << ',' << label_name(ev.labels[i]) << ',' << label_name(ev.verdicts[i]) << ','
           << score << '\n';
  }
  EXPECT_EQ(r.out, expect.str());
  EXPECT_EQ(text_of(dir.path() / "rep" / "metrics.csv"), metrics_csv(metrics(ev.cm, ev.scores, ev.labels)));
  EXPECT_TRUE(fs::exists(dir.path() / "rep" / "summary.md"));

  const auto g = run("grid-search " + io + " --out " + (dir / "grid"));
  ASSERT_EQ(g.code, 0) << g.err;
  const auto lib = grid_search(videos, default_grid(), default_grid());
  const json grid = json::parse(text_of(dir.path() / "grid" / "grid.json"));
  EXPECT_EQ(grid, grid_json(lib));
  EXPECT_EQ(run("detect " + io + " --grid").out, g.out);
}

TEST(Cli, DetectInputErrors) {
  TempDir dir("cli");
  write_scores(dir, {}, {{"a", Label::Real}});
  const std::string io = "--scores " + (dir / "scores.jsonl") + " --labels " + (dir / "labels.jsonl");
  EXPECT_EQ(run("detect " + io + " --preset plain").code, 2);  // empty scores
  write_scores(dir, {{"a", 0, 0, 0.5}}, {{"a", Label::Real}});
  EXPECT_EQ(run("detect " + io).code, 2);  // no operating point
  EXPECT_EQ(run("detect " + io + " --threshold 0.5").code, 2);
  EXPECT_EQ(run("detect " + io + " --preset best").code, 2);
  EXPECT_EQ(run("detect " + io + " --threshold 0.5 --fraction 0.2").code, 0);
  EXPECT_EQ(run("detect " + io + " --grid").code, 2);  // single class
  write_scores(dir, {{"a", 0, 0, 1.5}}, {{"a", Label::Real}});
  EXPECT_EQ(run("detect " + io + " --preset mri").code, 2);
}
