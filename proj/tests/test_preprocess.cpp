#include <gtest/gtest.h>

#include <cmath>

#include "mmgf/preprocess.hpp"
#include "mmgf/rng.hpp"
#include "mmgf/segments.hpp"
#include "mmgf/synthgen.hpp"

using namespace mmgf;

namespace {

ImuSequence make_imu(int channels, int n, double rate) {
  ImuSequence imu;
  imu.sample_rate = rate;
  imu.channel_layout = channels == 12 ? ImuSequence::two_hand_layout()
                                      : ImuSequence::one_hand_layout("right");
  imu.data = Tensor<float>({channels, n});
  return imu;
}

}  // namespace

// ===== resample_imu =====

TEST(Resample, OutputLengthMatchesRateRatio) {
  // 10 s at 64 Hz -> 640 samples; at 25 Hz the same span holds 250 samples.
  auto imu = make_imu(6, 640, 64.0);
  auto out = resample_imu(imu, 25.0);
  EXPECT_EQ(out.n_frames(), 250);
  EXPECT_EQ(out.n_channels(), 6);
  EXPECT_DOUBLE_EQ(out.sample_rate, 25.0);
}

TEST(Resample, LinearSignalInterpolatesExactly) {
  // Linear interpolation reproduces affine signals exactly at any phase.
  auto imu = make_imu(6, 640, 64.0);
  for (int c = 0; c < 6; ++c)
    for (int t = 0; t < 640; ++t)
      imu.data(c, t) = static_cast<float>(0.5 * t + 3.0 * c);
  auto out = resample_imu(imu, 25.0);
  for (int c = 0; c < 6; ++c)
    for (int i = 0; i < out.n_frames(); ++i) {
      const double src_pos = i * 64.0 / 25.0;
      EXPECT_NEAR(out.data(c, i), 0.5 * src_pos + 3.0 * c, 1e-4);
    }
}

TEST(Resample, EqualRatesIsIdentity) {
  auto imu = make_imu(6, 100, 25.0);
  Rng rng(7);
  for (int c = 0; c < 6; ++c)
    for (int t = 0; t < 100; ++t) imu.data(c, t) = static_cast<float>(rng.normal());
  auto out = resample_imu(imu, 25.0);
  ASSERT_EQ(out.n_frames(), 100);
  for (int c = 0; c < 6; ++c)
    for (int t = 0; t < 100; ++t) EXPECT_EQ(out.data(c, t), imu.data(c, t));
}

TEST(Resample, UpsamplingRejected) {
  auto imu = make_imu(6, 100, 25.0);
  EXPECT_THROW(resample_imu(imu, 64.0), ValidationError);
}

TEST(Resample, AntialiasKeepsDcAndCutsAliasedTone) {
  // A 30 Hz tone sampled at 64 Hz folds to 5.5 Hz after naive decimation to
  // 25 Hz; the anti-alias filter should suppress it. DC must pass untouched.
  const int n = 1280;
  auto dc = make_imu(6, n, 64.0);
  for (int c = 0; c < 6; ++c)
    for (int t = 0; t < n; ++t) dc.data(c, t) = 0.75f;
  auto dc_out = resample_imu(dc, 25.0, /*antialias=*/true);
  for (int i = 20; i < dc_out.n_frames() - 20; ++i)
    EXPECT_NEAR(dc_out.data(0, i), 0.75, 1e-4);

  auto tone = make_imu(6, n, 64.0);
  for (int t = 0; t < n; ++t)
    tone.data(0, t) = static_cast<float>(std::sin(2.0 * M_PI * 30.0 * t / 64.0));
  auto plain = resample_imu(tone, 25.0, false);
  auto filtered = resample_imu(tone, 25.0, true);
  auto rms = [](const ImuSequence& s) {
    double acc = 0.0;
    int count = 0;
    for (int i = 20; i < s.n_frames() - 20; ++i) {
      acc += s.data(0, i) * s.data(0, i);
      ++count;
    }
    return std::sqrt(acc / count);
  };
  EXPECT_GT(rms(plain), 0.3);            // alias lands in band, survives
  EXPECT_LT(rms(filtered), 0.05 * rms(plain));
}

// ===== concat_hands =====

TEST(ConcatHands, LeftBlockFirstAndLayoutMerged) {
  auto left = make_imu(6, 50, 25.0);
  auto right = make_imu(6, 50, 25.0);
  left.channel_layout = ImuSequence::one_hand_layout("left");
  for (int c = 0; c < 6; ++c)
    for (int t = 0; t < 50; ++t) {
      left.data(c, t) = static_cast<float>(100 + c);
      right.data(c, t) = static_cast<float>(200 + c);
    }
  auto both = concat_hands(left, right);
  ASSERT_EQ(both.n_channels(), 12);
  EXPECT_EQ(both.channel_layout, ImuSequence::two_hand_layout());
  EXPECT_FLOAT_EQ(both.data(0, 10), 100.0f);
  EXPECT_FLOAT_EQ(both.data(5, 10), 105.0f);
  EXPECT_FLOAT_EQ(both.data(6, 10), 200.0f);
  EXPECT_FLOAT_EQ(both.data(11, 10), 205.0f);
}

TEST(ConcatHands, MismatchesRejected) {
  auto a = make_imu(6, 50, 25.0);
  auto b = make_imu(6, 60, 25.0);
  EXPECT_THROW(concat_hands(a, b), ValidationError);
  auto c = make_imu(6, 50, 64.0);
  EXPECT_THROW(concat_hands(a, c), ValidationError);
  auto d = make_imu(12, 50, 25.0);
  EXPECT_THROW(concat_hands(a, d), ValidationError);
}

// ===== remove_clutter =====

TEST(Clutter, StaticBackgroundRemovedTransientKept) {
  // Constant ridge B plus a one-frame blob A: the mean is B + A/N, so the
  // blob frame keeps A*(1 - 1/N) and every other frame clips to zero.
  const int R = 4, D = 8, N = 10;
  RdtCube cube;
  cube.frame_rate = 25.0;
  cube.data = Tensor<float>({R, D, N});
  const float B = 2.0f, A = 5.0f;
  for (int r = 0; r < R; ++r)
    for (int d = 0; d < D; ++d)
      for (int t = 0; t < N; ++t) cube.data(r, d, t) = B;
  cube.data(2, 3, 4) += A;

  auto cleaned = remove_clutter(cube);
  EXPECT_NEAR(cleaned.data(2, 3, 4), A * (1.0 - 1.0 / N), 1e-5);
  for (int r = 0; r < R; ++r)
    for (int d = 0; d < D; ++d)
      for (int t = 0; t < N; ++t)
        if (!(r == 2 && d == 3 && t == 4)) EXPECT_FLOAT_EQ(cleaned.data(r, d, t), 0.0f);
}

TEST(Clutter, NoNegativesAndSingleFrameRejected) {
  Rng rng(11);
  RdtCube cube;
  cube.frame_rate = 25.0;
  cube.data = Tensor<float>({8, 16, 40});
  for (auto& v : cube.data.raw()) v = static_cast<float>(std::abs(rng.normal()));
  auto cleaned = remove_clutter(cube);
  for (auto v : cleaned.data.raw()) EXPECT_GE(v, 0.0f);

  RdtCube single;
  single.frame_rate = 25.0;
  single.data = Tensor<float>({8, 16, 1});
  EXPECT_THROW(remove_clutter(single), ValidationError);
}

// ===== window_session / stitch =====

namespace {

MealSession session_of_length(int n, unsigned long long seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.duration_s = n / cfg.frame_rate;
  std::vector<std::string> warnings;
  return generate_session(cfg, "win_test", &warnings);
}

}  // namespace

TEST(Windowing, NonOverlappingCountAndPadding) {
  auto session = session_of_length(2500, 31);
  WindowSpec spec;
  spec.window_frames = 1000;
  auto [windows, map] = window_session(session, spec);
  ASSERT_EQ(windows.size(), 3u);
  EXPECT_EQ(windows[0].session_start, 0);
  EXPECT_EQ(windows[0].valid_frames, 1000);
  EXPECT_EQ(windows[2].session_start, 2000);
  EXPECT_EQ(windows[2].valid_frames, 500);

  // Padded tail repeats the final session frame in every stream.
  const auto& tail = windows[2];
  ASSERT_TRUE(tail.radar && tail.imu);
  for (int j = 500; j < 1000; ++j) {
    EXPECT_EQ(tail.labels[static_cast<size_t>(j)], session.labels.labels[2499]);
    EXPECT_FLOAT_EQ((*tail.imu)(0, j), session.imu->data(0, 2499));
    EXPECT_FLOAT_EQ((*tail.radar)(3, 5, j), session.radar->data(3, 5, 2499));
  }
  // Interior frames map one-to-one.
  EXPECT_FLOAT_EQ((*windows[1].imu)(2, 7), session.imu->data(2, 1007));
}

TEST(Windowing, StitchCoversEveryFrameExactlyOnce) {
  auto session = session_of_length(2500, 32);
  WindowSpec spec;
  spec.window_frames = 1000;
  auto [windows, map] = window_session(session, spec);

  // Mark each window column with its absolute frame id; stitching must give
  // back frame t at position t, i.e. each frame written exactly once.
  std::vector<Tensor<double>> probs;
  for (const auto& win : windows) {
    Tensor<double> p({kNumClasses, spec.window_frames});
    for (int j = 0; j < spec.window_frames; ++j) {
      p(0, j) = win.session_start + j;
      p(1, j) = 1.0;
      p(2, j) = 0.0;
    }
    probs.push_back(std::move(p));
  }
  auto stitched = stitch_window_probs(probs, map);
  ASSERT_EQ(stitched.dim(1), 2500);
  for (int t = 0; t < 2500; ++t) {
    EXPECT_DOUBLE_EQ(stitched(0, t), t);
    EXPECT_DOUBLE_EQ(stitched(1, t), 1.0);
  }
}

TEST(Windowing, OverlapAveragesAndStaysNormalized) {
  auto session = session_of_length(1600, 33);
  WindowSpec spec;
  spec.window_frames = 1000;
  spec.stride_frames = 500;
  auto [windows, map] = window_session(session, spec);
  ASSERT_EQ(windows.size(), 4u);

  Rng rng(5);
  std::vector<Tensor<double>> probs;
  for (size_t i = 0; i < windows.size(); ++i) {
    Tensor<double> p({kNumClasses, spec.window_frames});
    for (int j = 0; j < spec.window_frames; ++j) {
      double a = rng.uniform() + 0.1, b = rng.uniform() + 0.1, c = rng.uniform() + 0.1;
      const double s = a + b + c;
      p(0, j) = a / s;
      p(1, j) = b / s;
      p(2, j) = c / s;
    }
    probs.push_back(std::move(p));
  }
  auto stitched = stitch_window_probs(probs, map);
  for (int t = 0; t < 1600; ++t) {
    const double sum = stitched(0, t) + stitched(1, t) + stitched(2, t);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  // Frame 600 is covered by windows 0 and 1 (starts 0 and 500): exact mean.
  EXPECT_NEAR(stitched(0, 600), 0.5 * (probs[0](0, 600) + probs[1](0, 100)), 1e-12);
  // Frame 100 only by window 0.
  EXPECT_DOUBLE_EQ(stitched(2, 100), probs[0](2, 100));
}

TEST(Windowing, ShortSessionYieldsOnePaddedWindow) {
  auto session = session_of_length(300, 34);
  WindowSpec spec;
  spec.window_frames = 1000;
  auto [windows, map] = window_session(session, spec);
  ASSERT_EQ(windows.size(), 1u);
  EXPECT_EQ(windows[0].valid_frames, 300);
  EXPECT_EQ(map.n_frames, 300);
}

TEST(Windowing, WindowCountMismatchRejected) {
  auto session = session_of_length(1000, 35);
  WindowSpec spec;
  auto [windows, map] = window_session(session, spec);
  std::vector<Tensor<double>> probs;  // empty on purpose
  EXPECT_THROW(stitch_window_probs(probs, map), ValidationError);
}
