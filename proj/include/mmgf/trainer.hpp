#pragma once

// Two-step training: unimodal branches first, then (with those frozen) the
// adaptation encoders, attention fusion, and multimodal head. Also fold
// planning for session-level cross-validation and the canonical session
// preprocessing applied before windowing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmgf/adam.hpp"
#include "mmgf/checkpoint.hpp"
#include "mmgf/losses.hpp"
#include "mmgf/model.hpp"
#include "mmgf/preprocess.hpp"
#include "mmgf/rng.hpp"
#include "mmgf/synthgen.hpp"

namespace mmgf {

// ===== Config =====

struct TrainConfig {
  double lr = 0.0005;
  int epochs = 100;
  int batch_size = 4;
  WindowSpec window;
  std::uint64_t seed = 1;
  LossConfig loss;
  // Ablation: train everything jointly from scratch instead of freezing the
  // pretrained unimodal branches. Alignment targets stay gradient-detached.
  bool end_to_end = false;

  void validate() const {
    if (!(lr > 0.0)) throw ValidationError("TrainConfig: lr must be positive");
    if (epochs < 1) throw ValidationError("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("TrainConfig: batch_size must be >= 1");
    window.validate();
    loss.validate();
  }

  AdamConfig adam() const {
    AdamConfig a;
    a.lr = lr;
    return a;
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"window_frames", c.window.window_frames},
          {"stride_frames", c.window.stride_frames},
          {"seed", c.seed},
          {"tau", c.loss.tau},
          {"lambda", c.loss.lambda},
          {"beta", c.loss.beta},
          {"end_to_end", c.end_to_end},
          {"optimizer", "adam"},
          {"beta1", 0.9},
          {"beta2", 0.999},
          {"eps", 1e-8}};
}

// ===== Fold planning =====

struct Fold {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct FoldPlan {
  std::vector<Fold> folds;
  int n_folds() const { return static_cast<int>(folds.size()); }
};

// Seeded session-level partition. Test-set sizes differ by at most one, with
// the larger ones placed in the last folds (52 over 5 -> 10,10,10,11,11).
inline FoldPlan make_folds(const std::vector<std::string>& session_ids,
                           int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ValidationError("make_folds: need at least 2 folds");
  if (static_cast<int>(session_ids.size()) < n_folds)
    throw ValidationError("make_folds: " + std::to_string(session_ids.size()) +
                          " sessions cannot fill " + std::to_string(n_folds) +
                          " folds");
  {
    auto sorted = session_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError("make_folds: duplicate session ids");
  }

  std::vector<std::string> order = session_ids;
  Rng rng(derive_seed(seed, "folds"));
  rng.shuffle(order);

  const int n = static_cast<int>(order.size());
  const int base = n / n_folds;
  const int rem = n % n_folds;
  FoldPlan plan;
  int at = 0;
  for (int f = 0; f < n_folds; ++f) {
    const int take = base + (f >= n_folds - rem ? 1 : 0);
    Fold fold;
    fold.test_ids.assign(order.begin() + at, order.begin() + at + take);
    fold.train_ids.reserve(order.size() - static_cast<size_t>(take));
    for (int i = 0; i < n; ++i)
      if (i < at || i >= at + take) fold.train_ids.push_back(order[static_cast<size_t>(i)]);
    at += take;
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

// ===== Canonical preprocessing =====

// Brings a raw session to model-ready form: IMU resampled down to the label
// frame rate (with anti-aliasing) and radar static clutter removed. Streams
// already at the label rate pass through untouched. Resampling runs before
// validation so a raw higher-rate IMU recording is legal input; the prepared
// session must come out frame-aligned.
inline MealSession prepare_session(const MealSession& raw) {
  MealSession s = raw;
  if (s.imu && s.imu->sample_rate > s.labels.frame_rate * (1.0 + 1e-9))
    s.imu = resample_imu(*s.imu, s.labels.frame_rate, /*antialias=*/true);
  if (s.radar && s.radar->n_frames() >= 2) s.radar = remove_clutter(*s.radar);
  s.validate();
  return s;
}

// ===== Training windows =====

// One fixed-length training example in the compute scalar type.
template <class S>
struct TrainWindow {
  int valid_frames = 0;
  std::vector<ClassId> labels;     // length window_frames
  std::optional<Tensor<S>> radar;  // [R, D, W]
  std::optional<Tensor<S>> imu;    // [C, W]
};

// Windows every prepared session and converts streams to the compute type.
// Only the requested modalities are materialized.
template <class S>
std::vector<TrainWindow<S>> build_training_windows(
    const std::vector<MealSession>& sessions, const WindowSpec& spec,
    bool need_imu, bool need_radar) {
  std::vector<TrainWindow<S>> out;
  for (const auto& session : sessions) {
    if (need_imu && !session.imu)
      throw ValidationError("training: session '" + session.session_id +
                            "' has no IMU stream");
    if (need_radar && !session.radar)
      throw ValidationError("training: session '" + session.session_id +
                            "' has no radar stream");
    auto [windows, map] = window_session(session, spec);
    (void)map;
    for (auto& w : windows) {
      TrainWindow<S> tw;
      tw.valid_frames = w.valid_frames;
      tw.labels = std::move(w.labels);
      if (need_radar) tw.radar = convert<S>(*w.radar);
      if (need_imu) tw.imu = convert<S>(*w.imu);
      out.push_back(std::move(tw));
    }
  }
  return out;
}

// ===== Histories =====

struct EpochStats {
  double loss = 0.0;  // mean classification objective per window
  double ce = 0.0;
  double tmse = 0.0;
};

struct UnimodalHistory {
  EpochStats initial;              // evaluation pass before any update
  std::vector<EpochStats> epochs;  // per-epoch training means
};

struct FusionEpochStats {
  double total = 0.0;     // mean full objective per window
  double cls_fuse = 0.0;  // fused-branch classification objective
  double r2i_align = 0.0; // feature alignment, radar-to-IMU adaptation
  double r2i_cls = 0.0;
  double i2r_align = 0.0; // feature alignment, IMU-to-radar adaptation
  double i2r_cls = 0.0;
};

struct FusionHistory {
  FusionEpochStats initial;
  std::vector<FusionEpochStats> epochs;
  // Digest over the frozen unimodal tensors before/after training; equal by
  // contract. Both zero in end-to-end mode (nothing is frozen).
  std::uint64_t frozen_digest_before = 0;
  std::uint64_t frozen_digest_after = 0;
};

inline nlohmann::json to_json(const UnimodalHistory& h) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : h.epochs)
    epochs.push_back({{"loss", e.loss}, {"ce", e.ce}, {"tmse", e.tmse}});
  return {{"initial",
           {{"loss", h.initial.loss}, {"ce", h.initial.ce}, {"tmse", h.initial.tmse}}},
          {"epochs", epochs}};
}

inline nlohmann::json to_json(const FusionEpochStats& e) {
  return {{"total", e.total},       {"cls_fuse", e.cls_fuse},
          {"r2i_align", e.r2i_align}, {"r2i_cls", e.r2i_cls},
          {"i2r_align", e.i2r_align}, {"i2r_cls", e.i2r_cls}};
}

inline nlohmann::json to_json(const FusionHistory& h) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : h.epochs) epochs.push_back(to_json(e));
  return {{"initial", to_json(h.initial)},
          {"epochs", epochs},
          {"frozen_digest_before", h.frozen_digest_before},
          {"frozen_digest_after", h.frozen_digest_after}};
}

// ===== Shared loop plumbing =====

namespace train_detail {

inline void check_finite(double loss, int epoch, size_t window_idx) {
  if (!std::isfinite(loss))
    throw RuntimeFailure("training diverged: non-finite loss at epoch " +
                         std::to_string(epoch) + ", window " +
                         std::to_string(window_idx));
}

// Every window exactly once per epoch, order drawn from the run seed.
inline std::vector<size_t> epoch_order(size_t n, std::uint64_t seed, int epoch) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, "epoch_order", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  return order;
}

template <class S>
void add_scaled(Tensor<S>& acc, const Tensor<S>& g, S scale) {
  S* a = acc.data();
  const S* b = g.data();
  for (size_t i = 0; i < acc.size(); ++i) a[i] += scale * b[i];
}

}  // namespace train_detail

// ===== Step 1: unimodal branch training =====

// Minimizes the classification objective of one branch over the windows.
// The model must already be initialized (or loaded); this unfreezes and
// trains only the chosen branch.
template <class S>
UnimodalHistory train_unimodal(FullModel<S>& model, Modality modality,
                               const std::vector<TrainWindow<S>>& windows,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw ValidationError("train_unimodal: no training windows");
  for (const auto& w : windows) {
    const bool have = modality == Modality::Imu ? w.imu.has_value() : w.radar.has_value();
    if (!have)
      throw ValidationError(std::string("train_unimodal: window lacks the ") +
                            modality_name(modality) + " stream");
  }

  std::vector<Parameter<S>*> params;
  if (modality == Modality::Imu) {
    model.imu.set_frozen(false);
    model.imu.collect_params(params);
  } else {
    model.radar.set_frozen(false);
    model.radar.collect_params(params);
  }
  Adam<S> opt(params, cfg.adam());

  auto forward_loss = [&](const TrainWindow<S>& w, bool with_grad) {
    const Tensor<S>& x = modality == Modality::Imu ? *w.imu : *w.radar;
    Tensor<S> m = modality == Modality::Imu ? model.imu.encoder.forward(x)
                                            : model.radar.encoder.forward(x);
    Predictor<S>& pred =
        modality == Modality::Imu ? model.imu.predictor : model.radar.predictor;
    auto out = cls_loss_with_grad(w.labels, pred.logits(m), cfg.loss, w.valid_frames);
    if (with_grad) {
      Tensor<S> gm = pred.backward(out.dlogits);
      if (modality == Modality::Imu)
        model.imu.encoder.backward(gm);
      else
        model.radar.encoder.backward(gm);
    }
    return out;
  };

  UnimodalHistory hist;
  for (const auto& w : windows) {
    auto out = forward_loss(w, /*with_grad=*/false);
    hist.initial.loss += out.total;
    hist.initial.ce += out.ce;
    hist.initial.tmse += out.tmse;
  }
  hist.initial.loss /= static_cast<double>(windows.size());
  hist.initial.ce /= static_cast<double>(windows.size());
  hist.initial.tmse /= static_cast<double>(windows.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = train_detail::epoch_order(windows.size(), cfg.seed, epoch);
    EpochStats stats;
    size_t at = 0;
    while (at < order.size()) {
      const size_t batch = std::min<size_t>(cfg.batch_size, order.size() - at);
      opt.zero_grad();
      for (size_t b = 0; b < batch; ++b) {
        const auto& w = windows[order[at + b]];
        auto out = forward_loss(w, /*with_grad=*/true);
        train_detail::check_finite(out.total, epoch, order[at + b]);
        stats.loss += out.total;
        stats.ce += out.ce;
        stats.tmse += out.tmse;
      }
      opt.step(1.0 / static_cast<double>(batch));
      at += batch;
    }
    stats.loss /= static_cast<double>(windows.size());
    stats.ce /= static_cast<double>(windows.size());
    stats.tmse /= static_cast<double>(windows.size());
    hist.epochs.push_back(stats);
  }
  return hist;
}

// ===== Step 2: adaptation + fusion training =====

// Trains the adaptation encoders, the attention fusion, and the multimodal
// head against the full objective: fused classification plus both adaptation
// losses (alignment to the target-modality features plus a classification
// term through that modality's predictor), all three on every batch.
//
// Two-step mode freezes the unimodal branches bit-exactly and precomputes
// their features once. End-to-end mode trains every parameter; alignment
// targets are still treated as constants of the current step.
template <class S>
FusionHistory train_fusion(FullModel<S>& model,
                           const std::vector<TrainWindow<S>>& windows,
                           const TrainConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw ValidationError("train_fusion: no training windows");
  for (const auto& w : windows)
    if (!w.imu || !w.radar)
      throw ValidationError("train_fusion: every window needs both modalities");

  const bool two_step = !cfg.end_to_end;
  model.imu.set_frozen(two_step);
  model.radar.set_frozen(two_step);

  std::vector<Parameter<S>*> trainable;
  model.fusion.collect_params(trainable);
  if (!two_step) {
    model.imu.collect_params(trainable);
    model.radar.collect_params(trainable);
  }
  Adam<S> opt(trainable, cfg.adam());

  std::vector<Parameter<S>*> frozen;
  if (two_step) {
    model.imu.collect_params(frozen);
    model.radar.collect_params(frozen);
  }

  FusionHistory hist;
  hist.frozen_digest_before = two_step ? params_fingerprint(frozen) : 0;

  // Frozen encoders are pure functions of fixed inputs: compute their
  // features (also the alignment targets) once.
  std::vector<Tensor<S>> feat_imu, feat_radar;
  if (two_step) {
    feat_imu.reserve(windows.size());
    feat_radar.reserve(windows.size());
    for (const auto& w : windows) {
      feat_imu.push_back(model.imu.encoder.forward(*w.imu));
      feat_radar.push_back(model.radar.encoder.forward(*w.radar));
    }
  }

  // Per-window pass. Backward order matters: each predictor's forward cache
  // is consumed by the matching backward before the next forward reuses it
  // (fused -> r2i -> i2r).
  auto run_window = [&](size_t idx, bool with_grad) {
    const auto& w = windows[idx];
    FusionEpochStats s;

    Tensor<S> m_imu, m_radar;
    if (two_step) {
      m_imu = feat_imu[idx];
      m_radar = feat_radar[idx];
    } else {
      m_imu = model.imu.encoder.forward(*w.imu);
      m_radar = model.radar.encoder.forward(*w.radar);
    }

    Tensor<S> probs = model.fusion.forward_fused_probs(
        m_radar, m_imu, model.radar.predictor, model.imu.predictor);
    auto fuse_out =
        cls_loss_with_grad_probs(w.labels, probs, cfg.loss, w.valid_frames);
    s.cls_fuse = fuse_out.total;
    if (with_grad) {
      auto [gmr, gmi] = model.fusion.backward_fused(
          fuse_out.dprobs, model.radar.predictor, model.imu.predictor);
      if (!two_step) {
        model.radar.encoder.backward(gmr);
        model.imu.encoder.backward(gmi);
      }
    }

    // Radar-to-IMU adaptation: rebuild IMU-side features from the radar cube.
    {
      Tensor<S> mp = model.fusion.mae_r2i.forward(*w.radar);
      s.r2i_align = align_loss(mp, m_imu);
      auto cls = cls_loss_with_grad(w.labels, model.imu.predictor.logits(mp),
                                    cfg.loss, w.valid_frames);
      s.r2i_cls = cls.total;
      if (with_grad) {
        Tensor<S> g = align_loss_grad(mp, m_imu);
        Tensor<S> scaled = cls.dlogits;
        for (auto& v : scaled.raw()) v *= static_cast<S>(cfg.loss.beta);
        train_detail::add_scaled(g, model.imu.predictor.backward(scaled), S(1));
        model.fusion.mae_r2i.backward(g);
      }
    }

    // IMU-to-radar adaptation: rebuild radar-side features from the IMU.
    {
      Tensor<S> mp = model.fusion.mae_i2r.forward(*w.imu);
      s.i2r_align = align_loss(mp, m_radar);
      auto cls = cls_loss_with_grad(w.labels, model.radar.predictor.logits(mp),
                                    cfg.loss, w.valid_frames);
      s.i2r_cls = cls.total;
      if (with_grad) {
        Tensor<S> g = align_loss_grad(mp, m_radar);
        Tensor<S> scaled = cls.dlogits;
        for (auto& v : scaled.raw()) v *= static_cast<S>(cfg.loss.beta);
        train_detail::add_scaled(g, model.radar.predictor.backward(scaled), S(1));
        model.fusion.mae_i2r.backward(g);
      }
    }

    s.total = total_loss(s.cls_fuse, s.r2i_align + cfg.loss.beta * s.r2i_cls,
                         s.i2r_align + cfg.loss.beta * s.i2r_cls);
    return s;
  };

  auto accumulate = [](FusionEpochStats& into, const FusionEpochStats& s) {
    into.total += s.total;
    into.cls_fuse += s.cls_fuse;
    into.r2i_align += s.r2i_align;
    into.r2i_cls += s.r2i_cls;
    into.i2r_align += s.i2r_align;
    into.i2r_cls += s.i2r_cls;
  };
  auto divide = [](FusionEpochStats& s, double n) {
    s.total /= n;
    s.cls_fuse /= n;
    s.r2i_align /= n;
    s.r2i_cls /= n;
    s.i2r_align /= n;
    s.i2r_cls /= n;
  };

  for (size_t i = 0; i < windows.size(); ++i)
    accumulate(hist.initial, run_window(i, /*with_grad=*/false));
  divide(hist.initial, static_cast<double>(windows.size()));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = train_detail::epoch_order(windows.size(), cfg.seed, epoch);
    FusionEpochStats stats;
    size_t at = 0;
    while (at < order.size()) {
      const size_t batch = std::min<size_t>(cfg.batch_size, order.size() - at);
      opt.zero_grad();
      for (size_t b = 0; b < batch; ++b) {
        const auto s = run_window(order[at + b], /*with_grad=*/true);
        train_detail::check_finite(s.total, epoch, order[at + b]);
        accumulate(stats, s);
      }
      opt.step(1.0 / static_cast<double>(batch));
      at += batch;
    }
    divide(stats, static_cast<double>(windows.size()));
    hist.epochs.push_back(stats);
  }

  hist.frozen_digest_after = two_step ? params_fingerprint(frozen) : 0;
  if (two_step && hist.frozen_digest_after != hist.frozen_digest_before)
    throw RuntimeFailure("train_fusion: frozen parameters changed during training");
  return hist;
}

}  // namespace mmgf
