#pragma once

// Full model assembly: unimodal branches (encoder + predictor head), the
// adaptation encoders that rebuild a missing modality's features, and the
// fusion head. Also the config-to-JSON plumbing used by checkpoints.

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmgf/attention.hpp"
#include "mmgf/backbone.hpp"
#include "mmgf/fusion.hpp"
#include "mmgf/losses.hpp"

namespace mmgf {

enum class Modality { Imu, Radar };

inline const char* modality_name(Modality m) {
  return m == Modality::Imu ? "imu" : "radar";
}

// ===== Config =====

struct ModelConfig {
  int imu_channels = 12;
  TcnConfig imu_tcn;
  Radar3dConfig radar;
  CmaConfig cma;
  FusionMethod fusion = FusionMethod::Cma;

  void validate() const {
    if (imu_channels != 6 && imu_channels != 12)
      throw ValidationError("ModelConfig: imu_channels must be 6 or 12");
    imu_tcn.validate();
    radar.validate();
    cma.validate();
    if (imu_tcn.channels != cma.model_dim || radar.tcn.channels != cma.model_dim)
      throw ValidationError("ModelConfig: encoder channels must equal the fusion model_dim");
  }

  // Input width of the fused predictor head; 0 means no head (decision mode).
  int fused_dim() const {
    switch (fusion) {
      case FusionMethod::Add: return cma.model_dim;
      case FusionMethod::Concat: return 2 * cma.model_dim;
      case FusionMethod::Cma: return 2 * cma.model_dim;
      case FusionMethod::Decision: return 0;
    }
    return 0;
  }
};

// ===== JSON round-trip for configs =====

inline nlohmann::json to_json(const TcnConfig& c) {
  return {{"n_blocks", c.n_blocks}, {"kernel_size", c.kernel_size},
          {"channels", c.channels}, {"dilations", c.dilations},
          {"causal", c.causal}};
}

inline TcnConfig tcn_config_from_json(const nlohmann::json& j) {
  TcnConfig c;
  c.n_blocks = j.at("n_blocks").get<int>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.channels = j.at("channels").get<int>();
  c.dilations = j.at("dilations").get<std::vector<int>>();
  c.causal = j.at("causal").get<bool>();
  return c;
}

inline nlohmann::json to_json(const Radar3dConfig& c) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : c.stages)
    stages.push_back({{"out_channels", s.out_channels}, {"kernel", s.kernel},
                      {"pool_r", s.pool_r}, {"pool_d", s.pool_d}});
  return {{"stages", stages}, {"tcn", to_json(c.tcn)}};
}

inline Radar3dConfig radar_config_from_json(const nlohmann::json& j) {
  Radar3dConfig c;
  c.stages.clear();
  for (const auto& s : j.at("stages")) {
    Radar3dStage st;
    st.out_channels = s.at("out_channels").get<int>();
    st.kernel = s.at("kernel").get<int>();
    st.pool_r = s.at("pool_r").get<int>();
    st.pool_d = s.at("pool_d").get<int>();
    c.stages.push_back(st);
  }
  c.tcn = tcn_config_from_json(j.at("tcn"));
  return c;
}

inline nlohmann::json to_json(const CmaConfig& c) {
  return {{"n_heads", c.n_heads}, {"head_dim", c.head_dim},
          {"model_dim", c.model_dim}};
}

inline CmaConfig cma_config_from_json(const nlohmann::json& j) {
  CmaConfig c;
  c.n_heads = j.at("n_heads").get<int>();
  c.head_dim = j.at("head_dim").get<int>();
  c.model_dim = j.at("model_dim").get<int>();
  return c;
}

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"imu_channels", c.imu_channels}, {"imu_tcn", to_json(c.imu_tcn)},
          {"radar", to_json(c.radar)}, {"cma", to_json(c.cma)},
          {"fusion", fusion_method_name(c.fusion)}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.imu_channels = j.at("imu_channels").get<int>();
  c.imu_tcn = tcn_config_from_json(j.at("imu_tcn"));
  c.radar = radar_config_from_json(j.at("radar"));
  c.cma = cma_config_from_json(j.at("cma"));
  c.fusion = fusion_method_from_name(j.at("fusion").get<std::string>());
  return c;
}

// ===== Unimodal branches =====

template <class S>
struct ImuBranch {
  TcnEncoder<S> encoder;
  Predictor<S> predictor;

  explicit ImuBranch(const ModelConfig& cfg)
      : encoder("f_imu", cfg.imu_channels, cfg.imu_tcn),
        predictor("p_imu", cfg.imu_tcn.channels) {}

  void collect_params(std::vector<Parameter<S>*>& out) {
    encoder.collect_params(out);
    predictor.collect_params(out);
  }
  std::vector<Parameter<S>*> params() {
    std::vector<Parameter<S>*> out;
    collect_params(out);
    return out;
  }
  void init(std::uint64_t seed) {
    encoder.init(seed);
    predictor.init(seed);
  }
  void set_frozen(bool f) {
    for (auto* p : params()) p->frozen = f;
  }
};

template <class S>
struct RadarBranch {
  RadarEncoder<S> encoder;
  Predictor<S> predictor;

  explicit RadarBranch(const ModelConfig& cfg)
      : encoder("f_radar", cfg.radar),
        predictor("p_radar", cfg.radar.tcn.channels) {}

  void collect_params(std::vector<Parameter<S>*>& out) {
    encoder.collect_params(out);
    predictor.collect_params(out);
  }
  std::vector<Parameter<S>*> params() {
    std::vector<Parameter<S>*> out;
    collect_params(out);
    return out;
  }
  void init(std::uint64_t seed) {
    encoder.init(seed);
    predictor.init(seed);
  }
  void set_frozen(bool f) {
    for (auto* p : params()) p->frozen = f;
  }
};

// ===== Fusion head: adaptation encoders + fusion + multimodal predictor =====

template <class S>
struct FusionHead {
  // mae_i2r consumes the IMU stream and mimics radar-side features; mae_r2i
  // consumes the radar cube and mimics IMU-side features. Fresh inits, same
  // architectures as the corresponding source-modality encoders.
  TcnEncoder<S> mae_i2r;
  RadarEncoder<S> mae_r2i;
  CmaFusion<S> cma;
  std::optional<Predictor<S>> predictor;  // absent in decision mode
  FusionMethod method;

  explicit FusionHead(const ModelConfig& cfg)
      : mae_i2r("mae_i2r", cfg.imu_channels, cfg.imu_tcn),
        mae_r2i("mae_r2i", cfg.radar),
        cma(cfg.cma),
        method(cfg.fusion) {
    if (cfg.fused_dim() > 0)
      predictor.emplace("p_fused", cfg.fused_dim());
  }

  // Fuses two 64-wide feature sequences into class probabilities. Stores the
  // per-method intermediates needed by backward_fused.
  Tensor<S> forward_fused_probs(const Tensor<S>& m_radar, const Tensor<S>& m_imu,
                                Predictor<S>& radar_pred, Predictor<S>& imu_pred) {
    switch (method) {
      case FusionMethod::Add:
        probs_ = softmax_columns(predictor->logits(fuse_add(m_radar, m_imu)));
        return probs_;
      case FusionMethod::Concat:
        probs_ = softmax_columns(predictor->logits(fuse_concat(m_radar, m_imu)));
        return probs_;
      case FusionMethod::Cma:
        probs_ = softmax_columns(predictor->logits(cma.forward(m_radar, m_imu)));
        return probs_;
      case FusionMethod::Decision:
        p_radar_ = radar_pred.probs(m_radar);
        p_imu_ = imu_pred.probs(m_imu);
        probs_ = fuse_decision(p_radar_, p_imu_);
        return probs_;
    }
    throw RuntimeFailure("unreachable fusion method");
  }

  // dprobs: dL/d(fused probabilities). Accumulates parameter grads and
  // returns (grad wrt m_radar, grad wrt m_imu) for end-to-end training.
  std::pair<Tensor<S>, Tensor<S>> backward_fused(const Tensor<S>& dprobs,
                                                 Predictor<S>& radar_pred,
                                                 Predictor<S>& imu_pred) {
    switch (method) {
      case FusionMethod::Add: {
        Tensor<S> dz = softmax_backward_columns(probs_, dprobs);
        Tensor<S> g = predictor->backward(dz);
        return {g, g};
      }
      case FusionMethod::Concat: {
        Tensor<S> dz = softmax_backward_columns(probs_, dprobs);
        Tensor<S> g = predictor->backward(dz);
        const int M = g.dim(0) / 2, N = g.dim(1);
        Tensor<S> gr({M, N}), gi({M, N});
        std::copy(g.data(), g.data() + gr.size(), gr.data());
        std::copy(g.data() + gr.size(), g.data() + 2 * gr.size(), gi.data());
        return {std::move(gr), std::move(gi)};
      }
      case FusionMethod::Cma: {
        Tensor<S> dz = softmax_backward_columns(probs_, dprobs);
        Tensor<S> g = predictor->backward(dz);
        return cma.backward(g);
      }
      case FusionMethod::Decision: {
        Tensor<S> gp_r = dprobs, gp_i = dprobs;
        for (auto& v : gp_r.raw()) v *= S(0.5);
        for (auto& v : gp_i.raw()) v *= S(0.5);
        Tensor<S> gr = radar_pred.backward(softmax_backward_columns(p_radar_, gp_r));
        Tensor<S> gi = imu_pred.backward(softmax_backward_columns(p_imu_, gp_i));
        return {std::move(gr), std::move(gi)};
      }
    }
    throw RuntimeFailure("unreachable fusion method");
  }

  void collect_params(std::vector<Parameter<S>*>& out) {
    mae_i2r.collect_params(out);
    mae_r2i.collect_params(out);
    if (method == FusionMethod::Cma) cma.collect_params(out);
    if (predictor) predictor->collect_params(out);
  }
  std::vector<Parameter<S>*> params() {
    std::vector<Parameter<S>*> out;
    collect_params(out);
    return out;
  }
  void init(std::uint64_t seed) {
    mae_i2r.init(seed);
    mae_r2i.init(seed);
    std::vector<Parameter<S>*> ps;
    if (method == FusionMethod::Cma) cma.collect_params(ps);
    init_parameters(ps, seed);
    if (predictor) predictor->init(seed);
  }

 private:
  Tensor<S> probs_, p_radar_, p_imu_;
};

// ===== Whole model (used by inference) =====

template <class S>
struct FullModel {
  ModelConfig config;
  ImuBranch<S> imu;
  RadarBranch<S> radar;
  FusionHead<S> fusion;

  explicit FullModel(const ModelConfig& cfg)
      : config(cfg), imu(cfg), radar(cfg), fusion(cfg) {
    cfg.validate();
  }

  void init(std::uint64_t seed) {
    imu.init(seed);
    radar.init(seed);
    fusion.init(seed);
  }
};

}  // namespace mmgf
