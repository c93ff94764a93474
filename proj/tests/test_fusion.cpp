#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mmgf/fusion.hpp"
#include "mmgf/model.hpp"
#include "mmgf/rng.hpp"

using namespace mmgf;

namespace {

Tensor<double> random_mat(int rows, int cols, unsigned long long seed) {
  Rng rng(seed);
  Tensor<double> x({rows, cols});
  for (auto& v : x.raw()) v = rng.normal();
  return x;
}

std::map<std::string, Parameter<double>*> params_by_name(
    std::vector<Parameter<double>*> ps) {
  std::map<std::string, Parameter<double>*> out;
  for (auto* p : ps) out[p->name] = p;
  return out;
}

}  // namespace

// ===== element-wise / concat / decision fusion =====

TEST(FuseAdd, IdentityCommutativityAndHandCase) {
  auto a = random_mat(4, 6, 1);
  Tensor<double> zero({4, 6});
  auto out = fuse_add(a, zero);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(out.raw()[i], a.raw()[i]);

  auto b = random_mat(4, 6, 2);
  auto ab = fuse_add(a, b), ba = fuse_add(b, a);
  for (size_t i = 0; i < ab.size(); ++i) EXPECT_DOUBLE_EQ(ab.raw()[i], ba.raw()[i]);

  Tensor<double> x({1, 2}), y({1, 2});
  x(0, 0) = 1; x(0, 1) = 2; y(0, 0) = 3; y(0, 1) = 4;
  auto s = fuse_add(x, y);
  EXPECT_DOUBLE_EQ(s(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 6.0);

  Tensor<double> bad({4, 7});
  EXPECT_THROW(fuse_add(a, bad), ValidationError);
}

TEST(FuseConcat, RadarChannelsFirst) {
  auto mr = random_mat(64, 9, 3);
  auto mi = random_mat(64, 9, 4);
  auto out = fuse_concat(mr, mi);
  ASSERT_EQ(out.dim(0), 128);
  ASSERT_EQ(out.dim(1), 9);
  for (int c = 0; c < 64; ++c)
    for (int t = 0; t < 9; ++t) {
      EXPECT_DOUBLE_EQ(out(c, t), mr(c, t));
      EXPECT_DOUBLE_EQ(out(c + 64, t), mi(c, t));
    }
  Tensor<double> bad({64, 8});
  EXPECT_THROW(fuse_concat(mr, bad), ValidationError);
}

TEST(FuseDecision, MeanOfProbabilityColumns) {
  Tensor<double> pa({3, 2}), pb({3, 2});
  pa(0, 0) = 1.0;  // [1,0,0]
  pb(1, 0) = 1.0;  // [0,1,0]
  pa(0, 1) = 0.2; pa(1, 1) = 0.5; pa(2, 1) = 0.3;
  pb(0, 1) = 0.2; pb(1, 1) = 0.5; pb(2, 1) = 0.3;
  auto out = fuse_decision(pa, pb);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(out(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(out(2, 0), 0.0);
  // identical inputs pass through
  EXPECT_DOUBLE_EQ(out(1, 1), 0.5);
  for (int t = 0; t < 2; ++t)
    EXPECT_NEAR(out(0, t) + out(1, t) + out(2, t), 1.0, 1e-12);

  Tensor<double> not_probs({3, 2});
  not_probs.fill(0.9);
  EXPECT_THROW(fuse_decision(pa, not_probs), ValidationError);
}

// ===== cross-modal attention =====

TEST(CmaConfig, HeadDimMismatchRejected) {
  CmaConfig bad;
  bad.n_heads = 7;  // 7*8 != 64
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Cma, SingleTokenEqualsProjectedValue) {
  // One key: attention weight is 1, so the output is the value projection of
  // the single opposing vector pushed through the output projection.
  CmaConfig cfg;
  cfg.n_heads = 2;
  cfg.head_dim = 4;
  cfg.model_dim = 8;
  DirectedCrossAttention<double> att("att", cfg);
  std::vector<Parameter<double>*> ps;
  att.collect_params(ps);
  init_parameters(ps, 31);
  auto names = params_by_name(ps);

  auto xq = random_mat(8, 1, 5);
  auto xkv = random_mat(8, 1, 6);
  auto y = att.forward(xq, xkv);

  const auto& wv = names.at("att.v.w")->value;
  const auto& bv = names.at("att.v.b")->value;
  const auto& wo = names.at("att.o.w")->value;
  const auto& bo = names.at("att.o.b")->value;
  std::vector<double> v(8, 0.0);
  for (int r = 0; r < 8; ++r) {
    v[static_cast<size_t>(r)] = bv(r);
    for (int c = 0; c < 8; ++c) v[static_cast<size_t>(r)] += wv(r, c) * xkv(c, 0);
  }
  for (int r = 0; r < 8; ++r) {
    double expect = bo(r);
    for (int c = 0; c < 8; ++c) expect += wo(r, c) * v[static_cast<size_t>(c)];
    EXPECT_NEAR(y(r, 0), expect, 1e-12);
  }
}

TEST(Cma, TwoTokenHandComputedWeights) {
  // Identity projections, one head of dimension 1: query 1 against keys
  // (0, ln 3) gives weights softmax([0, ln 3]) = (0.25, 0.75).
  CmaConfig cfg;
  cfg.n_heads = 1;
  cfg.head_dim = 1;
  cfg.model_dim = 1;
  DirectedCrossAttention<double> att("att", cfg);
  std::vector<Parameter<double>*> ps;
  att.collect_params(ps);
  auto names = params_by_name(ps);
  names.at("att.q.w")->value(0, 0) = 1.0;
  names.at("att.k.w")->value(0, 0) = 1.0;
  names.at("att.v.w")->value(0, 0) = 1.0;
  names.at("att.o.w")->value(0, 0) = 1.0;

  Tensor<double> xq({1, 2}), xkv({1, 2});
  xq(0, 0) = 1.0;
  xq(0, 1) = 1.0;
  xkv(0, 0) = 0.0;
  xkv(0, 1) = std::log(3.0);
  auto y = att.forward(xq, xkv);
  const auto& a = att.attention();
  EXPECT_NEAR(a(0, 0, 0), 0.25, 1e-12);
  EXPECT_NEAR(a(0, 0, 1), 0.75, 1e-12);
  EXPECT_NEAR(y(0, 0), 0.75 * std::log(3.0), 1e-12);
  EXPECT_NEAR(y(0, 1), 0.75 * std::log(3.0), 1e-12);
}

TEST(Cma, AttentionRowsSumToOne) {
  CmaConfig cfg;
  cfg.n_heads = 2;
  cfg.head_dim = 4;
  cfg.model_dim = 8;
  DirectedCrossAttention<double> att("att", cfg);
  std::vector<Parameter<double>*> ps;
  att.collect_params(ps);
  init_parameters(ps, 33);
  att.forward(random_mat(8, 10, 7), random_mat(8, 10, 8));
  const auto& a = att.attention();
  for (int h = 0; h < 2; ++h)
    for (int i = 0; i < 10; ++i) {
      double s = 0.0;
      for (int j = 0; j < 10; ++j) s += a(h, i, j);
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
}

TEST(Cma, FusionOutputIsDirectedPair) {
  CmaConfig cfg;
  cfg.n_heads = 2;
  cfg.head_dim = 4;
  cfg.model_dim = 8;
  CmaFusion<double> fusion(cfg);
  std::vector<Parameter<double>*> ps;
  fusion.collect_params(ps);
  init_parameters(ps, 34);
  auto mr = random_mat(8, 5, 9);
  auto mi = random_mat(8, 5, 10);
  auto fused = fusion.forward(mr, mi);
  ASSERT_EQ(fused.dim(0), 16);
  ASSERT_EQ(fused.dim(1), 5);
  // channels [0,8) are the radar-query direction, [8,16) the IMU-query one
  auto a = fusion.radar_query().forward(mr, mi);
  auto b = fusion.imu_query().forward(mi, mr);
  for (int c = 0; c < 8; ++c)
    for (int t = 0; t < 5; ++t) {
      EXPECT_DOUBLE_EQ(fused(c, t), a(c, t));
      EXPECT_DOUBLE_EQ(fused(c + 8, t), b(c, t));
    }
}

TEST(Cma, PermutingTimeIndicesPermutesOutput) {
  CmaConfig cfg;
  cfg.n_heads = 2;
  cfg.head_dim = 4;
  cfg.model_dim = 8;
  CmaFusion<double> fusion(cfg);
  std::vector<Parameter<double>*> ps;
  fusion.collect_params(ps);
  init_parameters(ps, 35);

  const int n = 6;
  auto mr = random_mat(8, n, 11);
  auto mi = random_mat(8, n, 12);
  std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  Tensor<double> mrp({8, n}), mip({8, n});
  for (int c = 0; c < 8; ++c)
    for (int t = 0; t < n; ++t) {
      mrp(c, perm[static_cast<size_t>(t)]) = mr(c, t);
      mip(c, perm[static_cast<size_t>(t)]) = mi(c, t);
    }
  auto y = fusion.forward(mr, mi);
  auto yp = fusion.forward(mrp, mip);
  for (int c = 0; c < 16; ++c)
    for (int t = 0; t < n; ++t)
      EXPECT_NEAR(yp(c, perm[static_cast<size_t>(t)]), y(c, t), 1e-9);
}

// ===== fusion head dispatch =====

TEST(FusionHead, MethodsProduceNormalizedProbs) {
  ModelConfig cfg;
  cfg.imu_channels = 6;
  cfg.imu_tcn.n_blocks = 1;
  cfg.imu_tcn.dilations = {1};
  cfg.imu_tcn.channels = 8;
  cfg.radar.stages = {{2, 3, 4, 4}};
  cfg.radar.tcn = cfg.imu_tcn;
  cfg.cma.n_heads = 2;
  cfg.cma.head_dim = 4;
  cfg.cma.model_dim = 8;

  auto mr = random_mat(8, 7, 13);
  auto mi = random_mat(8, 7, 14);
  Predictor<double> pr("p_radar", 8), pi("p_imu", 8);
  pr.init(40);
  pi.init(41);

  for (auto method : {FusionMethod::Add, FusionMethod::Concat,
                      FusionMethod::Decision, FusionMethod::Cma}) {
    cfg.fusion = method;
    FusionHead<double> head(cfg);
    head.init(50);
    auto p = head.forward_fused_probs(mr, mi, pr, pi);
    ASSERT_EQ(p.dim(0), 3);
    ASSERT_EQ(p.dim(1), 7);
    for (int t = 0; t < 7; ++t)
      EXPECT_NEAR(p(0, t) + p(1, t) + p(2, t), 1.0, 1e-9)
          << fusion_method_name(method);
  }
}
