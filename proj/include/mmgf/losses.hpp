#pragma once

// Training objectives: per-frame cross-entropy, truncated MSE smoothing over
// adjacent log-probabilities, feature alignment, and their compositions.
// Forward functions take probabilities; the *_with_grad variants take logits
// and return the gradient with respect to them.

#include <cmath>
#include <vector>

#include "mmgf/backbone.hpp"
#include "mmgf/errors.hpp"
#include "mmgf/nn.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

struct LossConfig {
  double tau = 4.0;     // truncation threshold on log-prob jumps
  double lambda = 0.15; // smoothing weight inside the classification loss
  double beta = 0.35;   // classification weight inside the adaptation loss

  void validate() const {
    if (tau <= 0.0) throw ValidationError("LossConfig: tau must be > 0");
    if (lambda < 0.0 || beta < 0.0)
      throw ValidationError("LossConfig: lambda and beta must be >= 0");
  }
};

inline constexpr double kProbClamp = 1e-12;

namespace loss_detail {

inline int resolve_valid(int n_total, int n_valid, const char* who) {
  if (n_valid < 0) return n_total;
  if (n_valid == 0 || n_valid > n_total)
    throw ValidationError(std::string(who) + ": n_valid out of range");
  return n_valid;
}

}  // namespace loss_detail

// ===== Cross-entropy =====

// (1/N) * sum_t -log p[y_t, t]. Optional n_valid restricts to a prefix (used
// for padded window tails).
template <class S>
double ce_loss(const std::vector<ClassId>& y, const Tensor<S>& p,
               int n_valid = -1) {
  if (static_cast<int>(y.size()) != p.dim(1))
    throw ValidationError("ce_loss: " + std::to_string(y.size()) +
                          " labels vs " + std::to_string(p.dim(1)) + " frames");
  const int n = loss_detail::resolve_valid(p.dim(1), n_valid, "ce_loss");
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    const double pt = std::max(static_cast<double>(
        p(static_cast<int>(y[static_cast<size_t>(t)]), t)), kProbClamp);
    acc -= std::log(pt);
  }
  return acc / n;
}

// ===== Truncated MSE over adjacent log-prob differences =====

// (1/(N*C)) * sum_{t>=1, c} min(|log p_t - log p_{t-1}|, tau)^2. The
// previous-frame term is a constant in the gradient.
template <class S>
double tmse_loss(const Tensor<S>& p, double tau, int n_valid = -1) {
  const int C = p.dim(0);
  const int n = loss_detail::resolve_valid(p.dim(1), n_valid, "tmse_loss");
  if (n < 2) throw ValidationError("tmse_loss: needs at least 2 frames");
  double acc = 0.0;
  for (int t = 1; t < n; ++t)
    for (int c = 0; c < C; ++c) {
      const double cur = std::log(std::max(static_cast<double>(p(c, t)), kProbClamp));
      const double prev = std::log(std::max(static_cast<double>(p(c, t - 1)), kProbClamp));
      const double delta = std::min(std::abs(cur - prev), tau);
      acc += delta * delta;
    }
  return acc / (static_cast<double>(n) * C);
}

// ===== Classification loss: ce + lambda * tmse =====

template <class S>
double cls_loss(const std::vector<ClassId>& y, const Tensor<S>& p,
                const LossConfig& cfg, int n_valid = -1) {
  return ce_loss(y, p, n_valid) + cfg.lambda * tmse_loss(p, cfg.tau, n_valid);
}

// Fused forward + gradient with respect to logits. The gradient is assembled
// in log-prob space (ce picks -1/N at the true class; the smoothing term adds
// 2*delta*sign/(N*C) where unclipped) and mapped through the softmax Jacobian.
template <class S>
struct ClsLossOut {
  double ce = 0.0, tmse = 0.0, total = 0.0;
  Tensor<S> probs;    // [3, N]
  Tensor<S> dlogits;  // [3, N]; zero on frames past n_valid
};

template <class S>
ClsLossOut<S> cls_loss_with_grad(const std::vector<ClassId>& y,
                                 const Tensor<S>& logits, const LossConfig& cfg,
                                 int n_valid = -1) {
  const int C = logits.dim(0), total_n = logits.dim(1);
  if (static_cast<int>(y.size()) != total_n)
    throw ValidationError("cls_loss: label/frame count mismatch");
  const int n = loss_detail::resolve_valid(total_n, n_valid, "cls_loss");

  ClsLossOut<S> out;
  out.probs = softmax_columns(logits);
  out.ce = ce_loss(y, out.probs, n);
  out.tmse = n >= 2 ? tmse_loss(out.probs, cfg.tau, n) : 0.0;
  out.total = out.ce + cfg.lambda * out.tmse;

  Tensor<S> glogp({C, total_n});
  for (int t = 0; t < n; ++t)
    glogp(static_cast<int>(y[static_cast<size_t>(t)]), t) = static_cast<S>(-1.0 / n);
  if (n >= 2 && cfg.lambda > 0.0) {
    const double w = 2.0 * cfg.lambda / (static_cast<double>(n) * C);
    for (int t = 1; t < n; ++t)
      for (int c = 0; c < C; ++c) {
        const double cur = std::log(std::max(static_cast<double>(out.probs(c, t)), kProbClamp));
        const double prev = std::log(std::max(static_cast<double>(out.probs(c, t - 1)), kProbClamp));
        const double diff = cur - prev;
        if (std::abs(diff) < cfg.tau)
          glogp(c, t) += static_cast<S>(w * diff);
        // clipped jumps contribute a constant tau^2: zero gradient
      }
  }
  // dL/dz_k = g_k - p_k * sum_c g_c  (chain rule through log-softmax)
  out.dlogits = Tensor<S>({C, total_n});
  for (int t = 0; t < n; ++t) {
    S dot = 0;
    for (int c = 0; c < C; ++c) dot += glogp(c, t);
    for (int c = 0; c < C; ++c)
      out.dlogits(c, t) = glogp(c, t) - out.probs(c, t) * dot;
  }
  return out;
}

// Same loss, but differentiated with respect to the probabilities themselves
// (used when the probabilities are produced by something other than a plain
// softmax head, e.g. decision averaging).
template <class S>
struct ClsProbsLossOut {
  double ce = 0.0, tmse = 0.0, total = 0.0;
  Tensor<S> dprobs;  // [3, N]
};

template <class S>
ClsProbsLossOut<S> cls_loss_with_grad_probs(const std::vector<ClassId>& y,
                                            const Tensor<S>& probs,
                                            const LossConfig& cfg,
                                            int n_valid = -1) {
  const int C = probs.dim(0), total_n = probs.dim(1);
  if (static_cast<int>(y.size()) != total_n)
    throw ValidationError("cls_loss: label/frame count mismatch");
  const int n = loss_detail::resolve_valid(total_n, n_valid, "cls_loss");

  ClsProbsLossOut<S> out;
  out.ce = ce_loss(y, probs, n);
  out.tmse = n >= 2 ? tmse_loss(probs, cfg.tau, n) : 0.0;
  out.total = out.ce + cfg.lambda * out.tmse;

  out.dprobs = Tensor<S>({C, total_n});
  for (int t = 0; t < n; ++t) {
    const int yt = static_cast<int>(y[static_cast<size_t>(t)]);
    out.dprobs(yt, t) = static_cast<S>(
        -1.0 / (n * std::max(static_cast<double>(probs(yt, t)), kProbClamp)));
  }
  if (n >= 2 && cfg.lambda > 0.0) {
    const double w = 2.0 * cfg.lambda / (static_cast<double>(n) * C);
    for (int t = 1; t < n; ++t)
      for (int c = 0; c < C; ++c) {
        const double pc = std::max(static_cast<double>(probs(c, t)), kProbClamp);
        const double cur = std::log(pc);
        const double prev = std::log(std::max(static_cast<double>(probs(c, t - 1)), kProbClamp));
        const double diff = cur - prev;
        if (std::abs(diff) < cfg.tau)
          out.dprobs(c, t) += static_cast<S>(w * diff / pc);
      }
  }
  return out;
}

// ===== Feature alignment =====

// Mean squared element-wise distance; the target is a constant (no gradient
// flows into it).
template <class S>
double align_loss(const Tensor<S>& m_prime, const Tensor<S>& m) {
  if (!m_prime.same_shape(m))
    throw ValidationError("align_loss: shape mismatch " + m_prime.shape_str() +
                          " vs " + m.shape_str());
  double acc = 0.0;
  const S* a = m_prime.data();
  const S* b = m.data();
  for (size_t i = 0; i < m_prime.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / m_prime.size();
}

// Gradient of align_loss with respect to m_prime: 2*(m' - m)/n.
template <class S>
Tensor<S> align_loss_grad(const Tensor<S>& m_prime, const Tensor<S>& m) {
  Tensor<S> g({m_prime.dim(0), m_prime.dim(1)});
  const double inv = 2.0 / m_prime.size();
  S* gd = g.data();
  const S* a = m_prime.data();
  const S* b = m.data();
  for (size_t i = 0; i < g.size(); ++i)
    gd[i] = static_cast<S>(inv * (static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return g;
}

// ===== Adaptation loss: alignment + beta * classification through a frozen head =====

template <class S>
double adaptation_loss(const Tensor<S>& m_prime, const Tensor<S>& m_target,
                       const std::vector<ClassId>& y, Predictor<S>& predictor,
                       const LossConfig& cfg, int n_valid = -1) {
  const double al = align_loss(m_prime, m_target);
  const Tensor<S> p = predictor.probs(m_prime);
  return al + cfg.beta * cls_loss(y, p, cfg, n_valid);
}

// ===== Total objective =====

inline double total_loss(double cls_fuse, double r2i, double i2r) {
  return cls_fuse + r2i + i2r;
}

}  // namespace mmgf
