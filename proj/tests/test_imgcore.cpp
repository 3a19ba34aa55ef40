#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mriforge/image.hpp"
#include "mriforge/image_io.hpp"
#include "mriforge/seed.hpp"
#include "test_util.hpp"

using namespace mriforge;
using testutil::TempDir;

TEST(ImageBuf, RejectsBadShapes) {
  EXPECT_THROW(ImageBuf(0, 3, 1), InvalidArgument);
  EXPECT_THROW(ImageBuf(2, 2, 2), InvalidArgument);
  EXPECT_THROW(ImageBuf(2, 2, 1, std::vector<float>(3)), InvalidArgument);
  ImageBuf img(3, 2, 3);
  EXPECT_EQ(img.pixels().size(), 18u);
  EXPECT_EQ(img.index(2, 1, 2), 17u);
}

TEST(ImageIo, DecodesGrayBytesVerbatim) {
  TempDir dir("io");
  const ImageBuf img(2, 2, 1, std::vector<float>{0, 128, 255, 64});
  save_image(img, dir / "g.png");
  const ImageBuf back = load_image(dir / "g.png");
  EXPECT_EQ(back.channels(), 1);
  EXPECT_EQ(back.pixels(), (std::vector<float>{0, 128, 255, 64}));
}

TEST(ImageIo, RoundTripsIntegerRgb) {
  TempDir dir("io");
  const ImageBuf img = testutil::random_image(17, 9, 3, 5);
  save_image(img, dir / "c.png");
  EXPECT_EQ(load_image(dir / "c.png"), img);
}

TEST(ImageIo, RoundsHalfAwayFromZero) {
  TempDir dir("io");
  save_image(ImageBuf(3, 1, 1, std::vector<float>{0.4f, 127.5f, 254.6f}), dir / "r.png");
  EXPECT_EQ(load_image(dir / "r.png").pixels(), (std::vector<float>{0, 128, 255}));
}

TEST(ImageIo, BlankImageIsAllZeroBytes) {
  TempDir dir("io");
  save_image(ImageBuf(4, 4, 3, 0.0f), dir / "z.png");
  for (float v : load_image(dir / "z.png").pixels()) EXPECT_EQ(v, 0.0f);
}

TEST(ImageIo, RejectsOutOfRangePixel) {
  TempDir dir("io");
  EXPECT_THROW(save_image(ImageBuf(1, 1, 1, std::vector<float>{256.0f}), dir / "x.png"), InvalidArgument);
  EXPECT_THROW(save_image(ImageBuf(1, 1, 1, std::vector<float>{-0.5f}), dir / "x.png"), InvalidArgument);
}

TEST(ImageIo, ErrorsNameThePath) {
  TempDir dir("io");
  save_image(testutil::random_image(16, 16, 3, 1), dir / "t.png");
  auto bytes = testutil::read_bytes(dir / "t.png");
  bytes.resize(bytes.size() / 2);
  testutil::write_bytes(dir.path() / "trunc.png", bytes);
  try {
    load_image(dir / "trunc.png");
    FAIL() << "expected a decode error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("trunc.png"), std::string::npos) << e.what();
  }
  try {
    load_image(dir / "missing.png");
    FAIL() << "expected a missing-file error";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.png"), std::string::npos);
  }
  testutil::write_bytes(dir.path() / "junk.bmp", {'B', 'M', 0, 0, 0, 0});
  EXPECT_THROW(load_image(dir / "junk.bmp"), InvalidArgument);
}

TEST(ImageIo, UnwritablePathFails) {
  EXPECT_THROW(save_image(ImageBuf(1, 1, 1), "/nonexistent_dir_xyz/a.png"), IoError);
}

TEST(Crop, CenterBlock) {
  ImageBuf img(4, 4, 1);
  for (int i = 0; i < 16; ++i) img.pixels()[i] = static_cast<float>(i);
  const ImageBuf c = crop(img, BBox{1, 1, 2, 2});
  EXPECT_EQ(c.width(), 2);
  EXPECT_EQ(c.pixels(), (std::vector<float>{5, 6, 9, 10}));
}

TEST(Crop, FullImageIsIdentity) {
  const ImageBuf img = testutil::random_image(5, 4, 3, 2);
  EXPECT_EQ(crop(img, BBox{0, 0, 5, 4}), img);
}

TEST(Crop, ClipsToBounds) {
  ImageBuf img(4, 4, 1);
  for (int i = 0; i < 16; ++i) img.pixels()[i] = static_cast<float>(i);
  const ImageBuf c = crop(img, BBox{3, 3, 4, 4});
  EXPECT_EQ(c.width(), 1);
  EXPECT_EQ(c.height(), 1);
  EXPECT_EQ(c.pixels()[0], 15.0f);
  EXPECT_THROW(crop(img, BBox{4, 0, 2, 2}), InvalidArgument);
  EXPECT_THROW(crop(img, BBox{-5, -5, 3, 3}), InvalidArgument);
}

TEST(Crop, ComposesLikeOffsetBoxes) {
  const ImageBuf img = testutil::random_image(12, 10, 3, 9);
  const BBox a{2, 1, 8, 7}, b{3, 2, 4, 3};
  EXPECT_EQ(crop(crop(img, a), b), crop(img, BBox{a.x + b.x, a.y + b.y, b.w, b.h}));
}

TEST(Resize, IdentityDims) {
  const ImageBuf img = testutil::random_image(7, 5, 3, 4);
  const ImageBuf r = resize(img, 7, 5);
  for (std::size_t i = 0; i < img.pixels().size(); ++i) EXPECT_NEAR(r.pixels()[i], img.pixels()[i], 1e-9);
}

TEST(Resize, ConstantStaysConstant) {
  const ImageBuf r = resize(ImageBuf(5, 3, 3, 77.0f), 13, 2);
  for (float v : r.pixels()) EXPECT_FLOAT_EQ(v, 77.0f);
}

TEST(Resize, TwoPixelRampUpsample) {
  // Half-pixel centres: source x = (i + 0.5) / 2 - 0.5 -> -0.25, 0.25, 0.75, 1.25,
  // clamped to [0, 1] -> 0, 63.75, 191.25, 255.
  const ImageBuf r = resize(ImageBuf(2, 1, 1, std::vector<float>{0, 255}), 4, 1);
  EXPECT_EQ(r.pixels(), (std::vector<float>{0.0f, 63.75f, 191.25f, 255.0f}));
}

TEST(Quantize, SnapsToByteGrid) {
  const ImageBuf q = quantize(ImageBuf(3, 1, 1, std::vector<float>{-3.0f, 10.5f, 300.0f}));
  EXPECT_EQ(q.pixels(), (std::vector<float>{0, 11, 255}));
}

TEST(Seed, StreamIsPureFunctionOfInputs) {
  const SeedSpec a{42, "video17/frame30/face0"};
  EXPECT_EQ(a.stream_seed(), (SeedSpec{42, "video17/frame30/face0"}).stream_seed());
  EXPECT_NE(a.stream_seed(), (SeedSpec{43, "video17/frame30/face0"}).stream_seed());
  EXPECT_NE(a.stream_seed(), (SeedSpec{42, "video17/frame30/face1"}).stream_seed());
  Rng r1(a), r2(a);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(r1.next_u64(), r2.next_u64());
}

TEST(Seed, PinnedValues) {
  // FNV-1a 64 reference vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(SeedSpec{}.child("x").item_key, "x");
  EXPECT_EQ((SeedSpec{1, "v"}).child("f").item_key, "v/f");
}

TEST(Seed, DistinctKeysGiveUncorrelatedStreams) {
  Rng a(SeedSpec{7, "video1/frame0"}), b(SeedSpec{7, "video1/frame1"});
  const int n = 10000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(), y = b.uniform();
    sa += x, sb += y, saa += x * x, sbb += y * y, sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  EXPECT_LT(std::abs(corr), 0.05);
}

TEST(Rng, DistributionsHaveExpectedMoments) {
  Rng rng(SeedSpec{1, "moments"});
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.02);
  for (double mean : {3.0, 40.0}) {
    double ps = 0, pss = 0;
    const int m = 50000;
    for (int i = 0; i < m; ++i) {
      const double k = rng.poisson(mean);
      ps += k;
      pss += k * k;
    }
    const double mu = ps / m;
    EXPECT_NEAR(mu, mean, 4 * std::sqrt(mean / m));
    EXPECT_NEAR(pss / m - mu * mu, mean, 0.05 * mean);
  }
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) {
    const int v = rng.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5u);
}
