#include <gtest/gtest.h>

#include <cmath>

#include "mmgf/backbone.hpp"
#include "mmgf/rng.hpp"

using namespace mmgf;

namespace {

Tensor<double> random_input(std::vector<int> shape, unsigned long long seed) {
  Rng rng(seed);
  Tensor<double> x(shape);
  for (auto& v : x.raw()) v = rng.normal();
  return x;
}

TcnConfig small_tcn(int channels = 8) {
  TcnConfig c;
  c.n_blocks = 2;
  c.channels = channels;
  c.dilations = {1, 2};
  return c;
}

Radar3dConfig small_radar(int channels = 8) {
  Radar3dConfig c;
  c.stages = {{2, 3, 2, 2}, {4, 3, 2, 2}};
  c.tcn = small_tcn(channels);
  return c;
}

}  // namespace

// ===== shapes and length preservation =====

TEST(TcnEncoder, ShapeContracts) {
  TcnConfig cfg;  // default: 5 blocks, 64 channels
  TcnEncoder<double> enc("enc", 12, cfg);
  enc.init(1);
  for (int n : {1, 7, 300}) {
    auto y = enc.forward(random_input({12, n}, 100 + static_cast<unsigned>(n)));
    ASSERT_EQ(y.rank(), 2);
    EXPECT_EQ(y.dim(0), 64);
    EXPECT_EQ(y.dim(1), n);
    for (auto v : y.raw()) ASSERT_TRUE(std::isfinite(v));
  }
  // one-hand variant
  TcnEncoder<double> enc6("enc6", 6, cfg);
  enc6.init(2);
  auto y6 = enc6.forward(random_input({6, 40}, 5));
  EXPECT_EQ(y6.dim(0), 64);
  EXPECT_EQ(y6.dim(1), 40);
}

TEST(TcnEncoder, ChannelMismatchRejected) {
  TcnEncoder<double> enc("enc", 12, small_tcn());
  enc.init(1);
  EXPECT_THROW(enc.forward(random_input({6, 10}, 3)), ValidationError);
}

TEST(TcnEncoder, ZeroParamsMapZeroInputToZero) {
  TcnEncoder<double> enc("enc", 4, small_tcn());
  std::vector<Parameter<double>*> ps;
  enc.collect_params(ps);
  for (auto* p : ps) p->value.fill(0.0);
  Tensor<double> x({4, 9});
  auto y = enc.forward(x);
  for (auto v : y.raw()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(RadarEncoder, ShapeContracts) {
  Radar3dConfig cfg = small_radar();
  RadarEncoder<double> enc("renc", cfg);
  enc.init(3);
  for (int n : {1, 7, 50}) {
    auto y = enc.forward(random_input({32, 64, n}, 200 + static_cast<unsigned>(n)));
    EXPECT_EQ(y.dim(0), 8);
    EXPECT_EQ(y.dim(1), n);
    for (auto v : y.raw()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(RadarEncoder, DefaultConfigReducesSpatialAxesFully) {
  // 4 stages of 2x2 pooling take 32x64 to 2x4; the global average absorbs
  // the rest, so the temporal feature length must match the input frames.
  Radar3dConfig cfg;  // default stages 16/32/32/64
  cfg.tcn = small_tcn(64);
  RadarEncoder<double> enc("renc", cfg);
  enc.init(4);
  auto y = enc.forward(random_input({32, 64, 5}, 42));
  EXPECT_EQ(y.dim(0), 64);
  EXPECT_EQ(y.dim(1), 5);
}

// ===== determinism =====

TEST(Backbone, SeededInitIsBitIdentical) {
  TcnEncoder<double> a("enc", 6, small_tcn()), b("enc", 6, small_tcn());
  a.init(77);
  b.init(77);
  auto x = random_input({6, 20}, 7);
  auto ya = a.forward(x), yb = b.forward(x);
  for (size_t i = 0; i < ya.size(); ++i) ASSERT_EQ(ya.raw()[i], yb.raw()[i]);

  TcnEncoder<double> c("enc", 6, small_tcn());
  c.init(78);
  auto yc = c.forward(x);
  bool differs = false;
  for (size_t i = 0; i < ya.size(); ++i)
    if (ya.raw()[i] != yc.raw()[i]) differs = true;
  EXPECT_TRUE(differs);
}

// ===== temporal equivariance away from the edges =====

TEST(RadarEncoder, TimeShiftEquivariantAwayFromEdges) {
  // Both the 3-D stages (temporal taps) and the TCN are shift-equivariant
  // except within a boundary halo where zero-padding differs.
  Radar3dConfig cfg = small_radar();
  RadarEncoder<double> enc("renc", cfg);
  enc.init(9);
  const int n = 40, shift = 5;
  auto x = random_input({8, 8, n}, 11);
  Tensor<double> xs({8, 8, n});
  for (int r = 0; r < 8; ++r)
    for (int d = 0; d < 8; ++d)
      for (int t = 0; t < n; ++t) xs(r, d, (t + shift) % n) = x(r, d, t);
  auto y = enc.forward(x);
  auto ys = enc.forward(xs);

  // halo: TCN context half-width + one frame per 3-D conv stage
  const int halo = (cfg.tcn.receptive_field() - 1) / 2 +
                   static_cast<int>(cfg.stages.size());
  for (int t = 0; t < n; ++t) {
    const int ts = (t + shift) % n;
    const bool t_interior = t >= halo && t < n - halo;
    const bool ts_interior = ts >= halo && ts < n - halo;
    const bool no_wrap = t + shift < n;
    if (t_interior && ts_interior && no_wrap)
      for (int c = 0; c < 8; ++c) EXPECT_NEAR(ys(c, ts), y(c, t), 1e-9);
  }
}

TEST(TcnConfig, ReceptiveFieldFormula) {
  TcnConfig cfg;  // k=3, dilations 1,2,4,8,16 -> 1 + 2*31 = 63
  EXPECT_EQ(cfg.receptive_field(), 63);
  TcnConfig small = small_tcn();  // k=3, dilations 1,2 -> 7
  EXPECT_EQ(small.receptive_field(), 7);
}

// ===== predictor =====

TEST(Predictor, ColumnsSumToOne) {
  Predictor<double> head("p", 8);
  head.init(12);
  auto m = random_input({8, 25}, 13);
  auto p = head.probs(m);
  ASSERT_EQ(p.dim(0), 3);
  ASSERT_EQ(p.dim(1), 25);
  for (int t = 0; t < 25; ++t)
    EXPECT_NEAR(p(0, t) + p(1, t) + p(2, t), 1.0, 1e-12);
}

TEST(Predictor, ZeroEverythingGivesUniform) {
  Predictor<double> head("p", 8);  // params default to zero until init
  Tensor<double> m({8, 4});
  auto p = head.probs(m);
  for (int t = 0; t < 4; ++t)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(p(c, t), 1.0 / 3.0, 1e-12);
}

TEST(Predictor, SmallInitKeepsInitialCrossEntropyNearLogThree) {
  Predictor<double> head("p", 64);
  head.init(99);
  auto m = random_input({64, 200}, 21);
  auto p = head.probs(m);
  double ce = 0.0;
  for (int t = 0; t < 200; ++t) ce -= std::log(p(1, t));
  ce /= 200.0;
  EXPECT_NEAR(ce, std::log(3.0), 0.2);
}

// ===== config validation =====

TEST(Configs, BadValuesRejected) {
  TcnConfig t;
  t.dilations = {1, 2};  // n_blocks still 5
  EXPECT_THROW(t.validate(), ValidationError);

  Radar3dConfig r;
  r.stages[1].kernel = 4;
  EXPECT_THROW(r.validate(), ValidationError);

  Radar3dConfig empty;
  empty.stages.clear();
  EXPECT_THROW(empty.validate(), ValidationError);
}
