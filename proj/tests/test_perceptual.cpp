#include <gtest/gtest.h>

#include <cmath>

#include "mriforge/augment.hpp"
#include "mriforge/image_io.hpp"
#include "mriforge/ssim.hpp"
#include "oracles/oracles.hpp"
#include "test_util.hpp"

using namespace mriforge;
using testutil::TempDir;

namespace {

const SsimConfig kDefault{};

ImageBuf ramp_x() {
  ImageBuf img(5, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y, 0) = static_cast<float>(10 * x + y);
  return img;
}

ImageBuf ramp_y() {
  ImageBuf img(5, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y, 0) = static_cast<float>(3 * y * y + x);
  return img;
}

}  // namespace

TEST(SsimConfig, DerivedConstants) {
  EXPECT_DOUBLE_EQ(kDefault.c1(), 6.5025);
  EXPECT_DOUBLE_EQ(kDefault.c2(), 58.5225);
  EXPECT_DOUBLE_EQ(kDefault.c3(), 29.26125);
  SsimConfig bad;
  bad.window = 4;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = SsimConfig{};
  bad.k1 = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = SsimConfig{};
  bad.gamma = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(WindowStats, ConstantWindow) {
  const ImageBuf c(20, 20, 1, 100.0f);
  const auto st = window_stats(c, c, 10, 10, 0, kDefault);
  EXPECT_DOUBLE_EQ(st.mu_x, 100.0);
  EXPECT_DOUBLE_EQ(st.mu_y, 100.0);
  EXPECT_NEAR(st.sigma_x, 0.0, 1e-12);
  EXPECT_NEAR(st.sigma_xy, 0.0, 1e-12);
}

TEST(WindowStats, SelfCovarianceIsVariance) {
  const ImageBuf x = testutil::random_image(15, 15, 1, 3);
  for (auto [px, py] : {std::pair{0, 0}, std::pair{7, 7}, std::pair{14, 3}}) {
    const auto st = window_stats(x, x, px, py, 0, kDefault);
    EXPECT_NEAR(st.sigma_xy, st.sigma_x * st.sigma_x, 1e-9 * (1 + st.sigma_xy));
  }
}

TEST(WindowStats, RampCenterN3) {
  // 9 samples x = 10i + j, y = 3j^2 + i over i, j in {1, 2, 3}; values from a
  // separate script: means 22 and 16, divisor 8 for deviations.
  SsimConfig cfg;
  cfg.window = 3;
  const auto st = window_stats(ramp_x(), ramp_y(), 2, 2, 0, cfg);
  EXPECT_NEAR(st.mu_x, 22.0, 1e-12);
  EXPECT_NEAR(st.mu_y, 16.0, 1e-12);
  EXPECT_NEAR(st.sigma_x, 8.703447592764606, 1e-12);
  EXPECT_NEAR(st.sigma_y, 10.535653752852738, 1e-12);
  EXPECT_NEAR(st.sigma_xy, 16.5, 1e-12);
}

TEST(WindowStats, ZeroPaddingAtCorner) {
  SsimConfig cfg;
  cfg.window = 3;
  const ImageBuf c(4, 4, 1, 90.0f);
  // Corner window: 4 of 9 samples inside.
  const auto st = window_stats(c, c, 0, 0, 0, cfg);
  EXPECT_NEAR(st.mu_x, 40.0, 1e-12);
  const double var = (4 * 50.0 * 50.0 + 5 * 40.0 * 40.0) / 8.0;
  EXPECT_NEAR(st.sigma_x, std::sqrt(var), 1e-12);
}

TEST(WindowStats, ShapeMismatchNamesBothDims) {
  try {
    window_stats(ImageBuf(4, 4, 1), ImageBuf(5, 4, 1), 0, 0, 0, kDefault);
    FAIL();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("4x4x1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("5x4x1"), std::string::npos) << msg;
  }
}

TEST(SsimComponents, IdenticalStatsGiveOnes) {
  const WindowStats st{50, 50, 12, 12, 144};
  const auto c = ssim_components(st, kDefault);
  EXPECT_DOUBLE_EQ(c.luminance, 1.0);
  EXPECT_DOUBLE_EQ(c.contrast, 1.0);
  EXPECT_DOUBLE_EQ(c.structure, 1.0);
  EXPECT_DOUBLE_EQ(ssim_pixel(st, kDefault), 1.0);
}

TEST(SsimComponents, BlackVersusWhiteLuminance) {
  const WindowStats st{0, 255, 0, 0, 0};
  const auto c = ssim_components(st, kDefault);
  EXPECT_NEAR(c.luminance, 6.5025 / 65031.5025, 1e-15);
  EXPECT_NEAR(c.luminance, 9.999000099990003e-05, 1e-15);
  EXPECT_DOUBLE_EQ(c.contrast, 1.0);
  EXPECT_DOUBLE_EQ(c.structure, 1.0);
  EXPECT_NEAR(ssim_pixel(st, kDefault), 9.999000099990003e-05, 1e-15);
}

TEST(SsimComponents, AnticorrelatedStructureIsNegative) {
  const WindowStats st{80, 80, 10, 10, -100};
  const auto c = ssim_components(st, kDefault);
  EXPECT_NEAR(c.structure, (-100 + 29.26125) / (100 + 29.26125), 1e-15);
  EXPECT_NEAR(c.structure, -0.5472541074761386, 1e-12);
}

TEST(SsimPixel, ProductEqualsClosedForm) {
  Rng rng(SeedSpec{11, "stats"});
  for (int i = 0; i < 2000; ++i) {
    const double sx = rng.uniform(0, 80), sy = rng.uniform(0, 80);
    const WindowStats st{rng.uniform(0, 255), rng.uniform(0, 255), sx, sy, rng.uniform(-1, 1) * sx * sy};
    EXPECT_NEAR(ssim_pixel(st, kDefault), ssim_pixel_closed_form(st, kDefault), 1e-12);
  }
}

TEST(SsimPixel, FractionalExponentOfNegativeComponentIsDomainError) {
  SsimConfig cfg;
  cfg.gamma = 0.5;
  EXPECT_THROW(ssim_pixel(WindowStats{80, 80, 10, 10, -100}, cfg), DomainError);
  cfg.gamma = 2.0;
  EXPECT_GT(ssim_pixel(WindowStats{80, 80, 10, 10, -100}, cfg), 0.0);
}

TEST(SsimImage, SelfMapIsOnesIncludingBorder) {
  const ImageBuf x = testutil::random_image(19, 13, 3, 8);
  const SsimMap m = ssim_image(x, x, kDefault);
  EXPECT_EQ(m.dims(), "19x13x3");
  for (double v : m.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(SsimImage, MatchesBruteForceOracle) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ImageBuf x = testutil::random_image(32, 32, 3, 100 + s);
    const ImageBuf y = testutil::random_image(32, 32, 3, 200 + s);
    const auto fast = ssim_image(x, y, kDefault).values();
    const auto slow = oracle::ssim_map(x, y, kDefault);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-9) << "pixel " << i;
  }
}

TEST(SsimImage, OracleAgreesForOtherWindowsAndExponents) {
  SsimConfig cfg;
  cfg.window = 5;
  cfg.alpha = 2.0;
  cfg.beta = 1.0;
  cfg.gamma = 3.0;
  const ImageBuf x = testutil::random_image(9, 7, 1, 1);
  const ImageBuf y = testutil::random_image(9, 7, 1, 2);
  const auto fast = ssim_image(x, y, cfg).values();
  const auto slow = oracle::ssim_map(x, y, cfg);
  for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], slow[i], 1e-9);
}

TEST(SsimImage, ChannelsAreIndependent) {
  const ImageBuf x = testutil::random_image(16, 16, 3, 21);
  const ImageBuf y = testutil::random_image(16, 16, 3, 22);
  const SsimMap rgb = ssim_image(x, y, kDefault);
  for (int c = 0; c < 3; ++c) {
    ImageBuf xc(16, 16, 1), yc(16, 16, 1);
    for (int py = 0; py < 16; ++py)
      for (int px = 0; px < 16; ++px) {
        xc.at(px, py, 0) = x.at(px, py, c);
        yc.at(px, py, 0) = y.at(px, py, c);
      }
    const SsimMap single = ssim_image(xc, yc, kDefault);
    for (int py = 0; py < 16; ++py)
      for (int px = 0; px < 16; ++px) EXPECT_EQ(single.at(px, py, 0), rgb.at(px, py, c));
  }
}

TEST(SsimIndex, SymmetricAndBounded) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ImageBuf x = testutil::random_image(24, 20, 3, s);
    const ImageBuf y = testutil::random_image(24, 20, 3, s + 50);
    EXPECT_NEAR(ssim_index(x, y, kDefault), ssim_index(y, x, kDefault), 1e-12);
    const SsimMap a = ssim_image(x, y, kDefault), b = ssim_image(y, x, kDefault);
    for (std::size_t i = 0; i < a.values().size(); ++i) {
      EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
      EXPECT_LE(a.values()[i], 1.0 + 1e-9);
    }
  }
}

TEST(SsimIndex, IdentityIsOne) {
  EXPECT_NEAR(ssim_index(ImageBuf(8, 8, 1, 0.0f), ImageBuf(8, 8, 1, 0.0f), kDefault), 1.0, 1e-12);
  EXPECT_NEAR(ssim_index(ImageBuf(8, 8, 3, 255.0f), ImageBuf(8, 8, 3, 255.0f), kDefault), 1.0, 1e-12);
}

TEST(SsimIndex, BlackVersusWhiteInteriorMatchesClosedForm) {
  // Zero padding perturbs windows that touch the border; pixels whose window
  // lies inside the image see c = s = 1 and take the closed-form value.
  const ImageBuf black(32, 32, 1, 0.0f), white(32, 32, 1, 255.0f);
  const SsimMap m = ssim_image(black, white, kDefault);
  for (int y = 5; y < 27; ++y)
    for (int x = 5; x < 27; ++x) EXPECT_NEAR(m.at(x, y, 0), 6.5025 / 65031.5025, 1e-15);
  // The corner window is a quarter white, so the contrast term drops well below 1.
  EXPECT_NEAR(m.at(0, 0, 0), oracle::ssim_at(oracle::window(black, white, 0, 0, 0, 11), kDefault), 1e-15);
  EXPECT_LT(m.at(0, 0, 0), m.at(16, 16, 0));
}

TEST(SsimIndex, NoiseMonotonicity) {
  const double variances[] = {1, 4, 16, 64, 256};
  const ImageBuf x = testutil::random_image(48, 48, 3, 77, 40, 215);
  double prev = 2.0;
  for (double v : variances) {
    const ImageBuf noisy = apply_augment(x, aug::Gaussian{v}, SeedSpec{5, "noise"});
    const double s = ssim_index(x, noisy, kDefault);
    EXPECT_LT(s, prev) << "variance " << v;
    prev = s;
  }
}

TEST(Mri, SelfPairIsBlank) {
  const ImageBuf x = testutil::random_image(20, 20, 3, 4);
  for (double v : mri_image(x, x, kDefault).values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Mri, ComplementsSsimExactly) {
  const ImageBuf x = testutil::random_image(20, 20, 3, 4), y = testutil::random_image(20, 20, 3, 5);
  const SsimMap s = ssim_image(x, y, kDefault);
  const MriImage m = mri_image(x, y, kDefault);
  for (std::size_t i = 0; i < s.values().size(); ++i) EXPECT_EQ(m.values()[i], 1.0 - s.values()[i]);
}

TEST(Mri, LocalDifferenceGivesLocalResponse) {
  ImageBuf x = testutil::random_image(40, 40, 1, 6, 60, 190);
  ImageBuf y = x;
  for (int py = 30; py < 36; ++py)
    for (int px = 30; px < 36; ++px) y.at(px, py, 0) = 255.0f - y.at(px, py, 0);
  const MriImage m = mri_image(x, y, kDefault);
  EXPECT_GT(m.at(32, 32, 0), 0.1);
  EXPECT_NEAR(m.at(5, 5, 0), 0.0, 1e-12);
}

TEST(ExportMri, ClampsAndRounds) {
  TempDir dir("mri");
  MriImage m(3, 1, 1);
  m.values() = {0.0, 0.5, 1.7};
  export_mri(m, dir / "m.png", dir / "m.mri");
  EXPECT_EQ(load_image(dir / "m.png").pixels(), (std::vector<float>{0, 128, 255}));
  const MriImage raw = read_mri_raw(dir / "m.mri");
  EXPECT_EQ(raw.values()[2], static_cast<double>(1.7f));
  const auto bytes = testutil::read_bytes(dir.path() / "m.mri");
  ASSERT_EQ(bytes.size(), 16u + 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MRI0");
  EXPECT_EQ(bytes[4], 3);  // width, little-endian
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 1);
}

TEST(ExportMri, BlankIsBlack) {
  TempDir dir("mri");
  export_mri(MriImage(4, 4, 3, 0.0), dir / "b.png");
  for (float v : load_image(dir / "b.png").pixels()) EXPECT_EQ(v, 0.0f);
}

TEST(ExportMri, RejectsCorruptSidecar) {
  TempDir dir("mri");
  testutil::write_bytes(dir.path() / "bad.mri", {'M', 'R', 'I', '1', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0});
  EXPECT_THROW(read_mri_raw(dir / "bad.mri"), IoError);
  testutil::write_bytes(dir.path() / "short.mri", {'M', 'R', 'I', '0', 2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0});
  EXPECT_THROW(read_mri_raw(dir / "short.mri"), IoError);
}
