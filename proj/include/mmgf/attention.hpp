#pragma once

// Scaled dot-product cross-attention between two feature sequences, and the
// symmetric two-direction fusion built from it.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/nn.hpp"
#include "mmgf/tensor.hpp"

namespace mmgf {

struct CmaConfig {
  int n_heads = 8;
  int head_dim = 8;
  int model_dim = 64;

  void validate() const {
    if (n_heads < 1 || head_dim < 1)
      throw ValidationError("CmaConfig: heads and head_dim must be >= 1");
    if (n_heads * head_dim != model_dim)
      throw ValidationError("CmaConfig: n_heads*head_dim (" +
                            std::to_string(n_heads * head_dim) +
                            ") must equal model_dim (" +
                            std::to_string(model_dim) + ")");
  }
};

// One attention direction: queries from x_q, keys/values from x_kv. All four
// projections are full model_dim x model_dim maps with bias; heads are row
// slices of the projected matrices.
template <class S>
class DirectedCrossAttention {
 public:
  DirectedCrossAttention(const std::string& name, const CmaConfig& cfg)
      : cfg_(cfg),
        proj_q_(name + ".q", cfg.model_dim, cfg.model_dim),
        proj_k_(name + ".k", cfg.model_dim, cfg.model_dim),
        proj_v_(name + ".v", cfg.model_dim, cfg.model_dim),
        proj_o_(name + ".o", cfg.model_dim, cfg.model_dim) {
    cfg.validate();
  }

  // x_q, x_kv: [model_dim, N] -> [model_dim, N]
  Tensor<S> forward(const Tensor<S>& x_q, const Tensor<S>& x_kv) {
    const int M = cfg_.model_dim;
    if (x_q.rank() != 2 || x_q.dim(0) != M || x_kv.rank() != 2 || x_kv.dim(0) != M)
      throw ValidationError("cross-attention: inputs must be [" +
                            std::to_string(M) + ", N], got " + x_q.shape_str() +
                            " and " + x_kv.shape_str());
    if (x_q.dim(1) != x_kv.dim(1))
      throw ValidationError("cross-attention: sequence length mismatch");
    const int N = x_q.dim(1);
    const int H = cfg_.n_heads, dh = cfg_.head_dim;
    const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

    q_ = proj_q_.forward(x_q);
    k_ = proj_k_.forward(x_kv);
    v_ = proj_v_.forward(x_kv);

    attn_ = Tensor<S>({H, N, N});
    Tensor<S> concat({M, N});
    std::vector<S> srow(static_cast<size_t>(N));
    for (int h = 0; h < H; ++h) {
      const int r0 = h * dh;
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) srow[static_cast<size_t>(j)] = S(0);
        for (int k = 0; k < dh; ++k) {
          const S qv = q_(r0 + k, i);
          const S* krow = k_.data() + static_cast<size_t>(r0 + k) * N;
          for (int j = 0; j < N; ++j) srow[static_cast<size_t>(j)] += qv * krow[j];
        }
        // softmax over keys, max-subtracted
        S mx = srow[0] * inv_sqrt;
        for (int j = 1; j < N; ++j) mx = std::max(mx, srow[static_cast<size_t>(j)] * inv_sqrt);
        S z = 0;
        S* arow = attn_.data() + (static_cast<size_t>(h) * N + i) * N;
        for (int j = 0; j < N; ++j) {
          const S e = std::exp(srow[static_cast<size_t>(j)] * inv_sqrt - mx);
          arow[j] = e;
          z += e;
        }
        for (int j = 0; j < N; ++j) arow[j] /= z;
        for (int k = 0; k < dh; ++k) {
          const S* vrow = v_.data() + static_cast<size_t>(r0 + k) * N;
          S acc = 0;
          for (int j = 0; j < N; ++j) acc += arow[j] * vrow[j];
          concat(r0 + k, i) = acc;
        }
      }
    }
    return proj_o_.forward(concat);
  }

  // Returns (grad wrt x_q, grad wrt x_kv).
  std::pair<Tensor<S>, Tensor<S>> backward(const Tensor<S>& gy) {
    const int M = cfg_.model_dim, H = cfg_.n_heads, dh = cfg_.head_dim;
    const int N = q_.dim(1);
    const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

    Tensor<S> gconcat = proj_o_.backward(gy);
    Tensor<S> gq({M, N}), gk({M, N}), gv({M, N});
    std::vector<S> ga(static_cast<size_t>(N)), gs(static_cast<size_t>(N));
    for (int h = 0; h < H; ++h) {
      const int r0 = h * dh;
      for (int i = 0; i < N; ++i) {
        const S* arow = attn_.data() + (static_cast<size_t>(h) * N + i) * N;
        // dL/dA(i,:) from the value mix, plus dL/dV contribution
        for (int j = 0; j < N; ++j) ga[static_cast<size_t>(j)] = S(0);
        for (int k = 0; k < dh; ++k) {
          const S gc = gconcat(r0 + k, i);
          const S* vrow = v_.data() + static_cast<size_t>(r0 + k) * N;
          S* gvrow = gv.data() + static_cast<size_t>(r0 + k) * N;
          for (int j = 0; j < N; ++j) {
            ga[static_cast<size_t>(j)] += gc * vrow[j];
            gvrow[j] += gc * arow[j];
          }
        }
        // softmax backward on the row
        S dot = 0;
        for (int j = 0; j < N; ++j) dot += arow[j] * ga[static_cast<size_t>(j)];
        for (int j = 0; j < N; ++j)
          gs[static_cast<size_t>(j)] = arow[j] * (ga[static_cast<size_t>(j)] - dot) * inv_sqrt;
        // through the score product
        for (int k = 0; k < dh; ++k) {
          const S* krow = k_.data() + static_cast<size_t>(r0 + k) * N;
          S* gkrow = gk.data() + static_cast<size_t>(r0 + k) * N;
          const S qv = q_(r0 + k, i);
          S acc = 0;
          for (int j = 0; j < N; ++j) {
            acc += gs[static_cast<size_t>(j)] * krow[j];
            gkrow[j] += gs[static_cast<size_t>(j)] * qv;
          }
          gq(r0 + k, i) += acc;
        }
      }
    }
    Tensor<S> gx_q = proj_q_.backward(gq);
    Tensor<S> gx_kv = proj_k_.backward(gk);
    Tensor<S> gx_v = proj_v_.backward(gv);
    S* a = gx_kv.data();
    const S* bptr = gx_v.data();
    for (size_t i = 0; i < gx_kv.size(); ++i) a[i] += bptr[i];
    return {std::move(gx_q), std::move(gx_kv)};
  }

  // Attention weights from the last forward: [heads, N_query, N_key].
  const Tensor<S>& attention() const { return attn_; }

  void collect_params(std::vector<Parameter<S>*>& out) {
    for (auto* p : proj_q_.params()) out.push_back(p);
    for (auto* p : proj_k_.params()) out.push_back(p);
    for (auto* p : proj_v_.params()) out.push_back(p);
    for (auto* p : proj_o_.params()) out.push_back(p);
  }

 private:
  CmaConfig cfg_;
  PointwiseConv<S> proj_q_, proj_k_, proj_v_, proj_o_;
  Tensor<S> q_, k_, v_, attn_;
};

// Symmetric fusion: the radar-query direction (information flowing from the
// IMU features into the radar timeline) is computed first and occupies output
// channels [0, model_dim); the mirrored direction fills the rest.
template <class S>
class CmaFusion {
 public:
  explicit CmaFusion(const CmaConfig& cfg = {})
      : cfg_(cfg),
        to_radar_("cma.i2r", cfg),
        to_imu_("cma.r2i", cfg) {}

  // m_radar, m_imu: [model_dim, N] -> [2*model_dim, N]
  Tensor<S> forward(const Tensor<S>& m_radar, const Tensor<S>& m_imu) {
    Tensor<S> a = to_radar_.forward(m_radar, m_imu);  // Q from radar, K/V IMU
    Tensor<S> b = to_imu_.forward(m_imu, m_radar);    // Q from IMU, K/V radar
    const int M = cfg_.model_dim, N = a.dim(1);
    Tensor<S> fused({2 * M, N});
    std::copy(a.data(), a.data() + a.size(), fused.data());
    std::copy(b.data(), b.data() + b.size(), fused.data() + a.size());
    return fused;
  }

  // Returns (grad wrt m_radar, grad wrt m_imu).
  std::pair<Tensor<S>, Tensor<S>> backward(const Tensor<S>& gfused) {
    const int M = cfg_.model_dim, N = gfused.dim(1);
    Tensor<S> ga({M, N}), gb({M, N});
    std::copy(gfused.data(), gfused.data() + ga.size(), ga.data());
    std::copy(gfused.data() + ga.size(), gfused.data() + 2 * ga.size(), gb.data());
    auto [ga_radar, ga_imu] = to_radar_.backward(ga);
    auto [gb_imu, gb_radar] = to_imu_.backward(gb);
    S* r = ga_radar.data();
    const S* r2 = gb_radar.data();
    for (size_t i = 0; i < ga_radar.size(); ++i) r[i] += r2[i];
    S* m = ga_imu.data();
    const S* m2 = gb_imu.data();
    for (size_t i = 0; i < ga_imu.size(); ++i) m[i] += m2[i];
    return {std::move(ga_radar), std::move(ga_imu)};
  }

  DirectedCrossAttention<S>& radar_query() { return to_radar_; }
  DirectedCrossAttention<S>& imu_query() { return to_imu_; }
  const CmaConfig& config() const { return cfg_; }

  void collect_params(std::vector<Parameter<S>*>& out) {
    to_radar_.collect_params(out);
    to_imu_.collect_params(out);
  }

 private:
  CmaConfig cfg_;
  DirectedCrossAttention<S> to_radar_, to_imu_;
};

}  // namespace mmgf
