#pragma once

// Modality-specific encoders producing 64-channel per-frame features, and the
// pointwise predictor heads mapping features to class probabilities.

#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/nn.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

// ===== Configs =====

struct TcnConfig {
  int n_blocks = 5;
  int kernel_size = 3;
  int channels = 64;
  std::vector<int> dilations = {1, 2, 4, 8, 16};
  bool causal = false;

  void validate() const {
    if (n_blocks < 1) throw ValidationError("TcnConfig: n_blocks must be >= 1");
    if (static_cast<int>(dilations.size()) != n_blocks)
      throw ValidationError("TcnConfig: need one dilation per block (" +
                            std::to_string(dilations.size()) + " given for " +
                            std::to_string(n_blocks) + " blocks)");
    if (channels < 1 || kernel_size < 1)
      throw ValidationError("TcnConfig: channels and kernel_size must be >= 1");
    for (int d : dilations)
      if (d < 1) throw ValidationError("TcnConfig: dilations must be >= 1");
  }

  // One dilated conv per block, so each block widens the context window by
  // (k-1)*dilation frames.
  int receptive_field() const {
    int sum = std::accumulate(dilations.begin(), dilations.end(), 0);
    return 1 + (kernel_size - 1) * sum;
  }
};

struct Radar3dStage {
  int out_channels = 0;
  int kernel = 3;
  int pool_r = 2;
  int pool_d = 2;
};

struct Radar3dConfig {
  std::vector<Radar3dStage> stages = {
      {16, 3, 2, 2}, {32, 3, 2, 2}, {32, 3, 2, 2}, {64, 3, 2, 2}};
  TcnConfig tcn;  // temporal part, applied after spatial reduction

  void validate() const {
    if (stages.empty()) throw ValidationError("Radar3dConfig: need >= 1 stage");
    for (const auto& s : stages) {
      if (s.out_channels < 1)
        throw ValidationError("Radar3dConfig: stage channels must be >= 1");
      if (s.kernel % 2 == 0)
        throw ValidationError("Radar3dConfig: stage kernels must be odd");
      if (s.pool_r < 1 || s.pool_d < 1)
        throw ValidationError("Radar3dConfig: pool sizes must be >= 1");
    }
    tcn.validate();
  }
};

// ===== IMU-style encoder: pointwise input projection + residual TCN blocks =====

template <class S>
class TcnEncoder {
 public:
  TcnEncoder(const std::string& name, int in_channels, const TcnConfig& cfg)
      : cfg_(cfg), proj_(name + ".proj", in_channels, cfg.channels) {
    cfg.validate();
    for (int i = 0; i < cfg.n_blocks; ++i)
      blocks_.emplace_back(name + ".block" + std::to_string(i), cfg.channels,
                           cfg.kernel_size, cfg.dilations[static_cast<size_t>(i)],
                           cfg.causal);
  }

  // x: [in_channels, N] -> [channels, N]
  Tensor<S> forward(const Tensor<S>& x) {
    Tensor<S> h = proj_.forward(x);
    for (auto& b : blocks_) h = b.forward(h);
    return h;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    Tensor<S> g = gy;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
      g = it->backward(g);
    return proj_.backward(g);
  }

  void collect_params(std::vector<Parameter<S>*>& out) {
    for (auto* p : proj_.params()) out.push_back(p);
    for (auto& b : blocks_) b.collect_params(out);
  }

  void init(std::uint64_t master_seed) {
    std::vector<Parameter<S>*> ps;
    collect_params(ps);
    init_parameters(ps, master_seed);
  }

  const TcnConfig& config() const { return cfg_; }
  int in_channels() const { return proj_.in_; }

 private:
  TcnConfig cfg_;
  PointwiseConv<S> proj_;
  std::vector<TcnBlock<S>> blocks_;
};

// ===== Radar encoder: 3-D conv stages -> spatial average -> temporal TCN =====

template <class S>
class RadarEncoder {
 public:
  RadarEncoder(const std::string& name, const Radar3dConfig& cfg)
      : cfg_(cfg),
        tcn_(name + ".tcn", cfg.stages.back().out_channels, cfg.tcn) {
    cfg.validate();
    int in = 1;
    for (size_t i = 0; i < cfg.stages.size(); ++i) {
      const auto& st = cfg.stages[i];
      convs_.push_back(std::make_unique<Conv3d<S>>(
          name + ".stage" + std::to_string(i), in, st.out_channels, st.kernel));
      pools_.push_back(std::make_unique<MaxPool3dSpatial<S>>(st.pool_r, st.pool_d));
      relus_.emplace_back();
      in = st.out_channels;
    }
  }

  // x: [R, D, N] -> [channels, N]
  Tensor<S> forward(const Tensor<S>& x) {
    if (x.rank() != 3)
      throw ValidationError("RadarEncoder: expected [range, doppler, N], got " +
                            x.shape_str());
    Tensor<S> h = x;
    h.reshape({1, x.dim(0), x.dim(1), x.dim(2)});
    for (size_t i = 0; i < convs_.size(); ++i) {
      h = convs_[i]->forward(h);
      h = relus_[i].forward(h);
      h = pools_[i]->forward(h);
    }
    h = gap_.forward(h);
    return tcn_.forward(h);
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    Tensor<S> g = tcn_.backward(gy);
    g = gap_.backward(g);
    for (size_t i = convs_.size(); i-- > 0;) {
      g = pools_[i]->backward(g);
      g = relus_[i].backward(g);
      g = convs_[i]->backward(g);
    }
    g.reshape({g.dim(1), g.dim(2), g.dim(3)});
    return g;
  }

  void collect_params(std::vector<Parameter<S>*>& out) {
    for (auto& c : convs_)
      for (auto* p : c->params()) out.push_back(p);
    tcn_.collect_params(out);
  }

  void init(std::uint64_t master_seed) {
    std::vector<Parameter<S>*> ps;
    collect_params(ps);
    init_parameters(ps, master_seed);
  }

  const Radar3dConfig& config() const { return cfg_; }

 private:
  Radar3dConfig cfg_;
  std::vector<std::unique_ptr<Conv3d<S>>> convs_;
  std::vector<std::unique_ptr<MaxPool3dSpatial<S>>> pools_;
  std::vector<Relu<S>> relus_;
  GlobalSpatialAvg<S> gap_;
  TcnEncoder<S> tcn_;
};

// ===== Predictor: pointwise linear map to classes + per-frame softmax =====

template <class S>
class Predictor {
 public:
  explicit Predictor(const std::string& name, int in_channels = 64)
      : map_(name, in_channels, kNumClasses) {}

  // Raw class scores [3, N]; training losses consume these directly.
  Tensor<S> logits(const Tensor<S>& m) { return map_.forward(m); }

  // Probabilities [3, N]; columns sum to 1.
  Tensor<S> probs(const Tensor<S>& m) { return softmax_columns(logits(m)); }

  Tensor<S> backward(const Tensor<S>& dlogits) { return map_.backward(dlogits); }

  void collect_params(std::vector<Parameter<S>*>& out) {
    for (auto* p : map_.params()) out.push_back(p);
  }

  // Small weights keep the initial softmax near uniform, so the first-epoch
  // cross-entropy starts near ln(3).
  void init(std::uint64_t master_seed) {
    std::vector<Parameter<S>*> ps;
    collect_params(ps);
    init_parameters(ps, master_seed, 0.1);
  }

  int in_channels() const { return map_.in_; }

 private:
  PointwiseConv<S> map_;
};

}  // namespace mmgf
