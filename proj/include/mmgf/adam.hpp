#pragma once

// Adam optimizer over a flat parameter list. Frozen parameters receive no
// updates and hold no optimizer state.

#include <cmath>
#include <vector>

#include "mmgf/nn.hpp"

namespace mmgf {

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
class Adam {
 public:
  Adam(std::vector<Parameter<S>*> params, const AdamConfig& cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      if (params_[i]->frozen) continue;
      m_[i].assign(params_[i]->value.size(), 0.0);
      v_[i].assign(params_[i]->value.size(), 0.0);
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  // grad_scale folds batch averaging into the step (grads are accumulated
  // per window, then scaled by 1/batch here).
  void step(double grad_scale = 1.0) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
      Parameter<S>* p = params_[i];
      if (p->frozen) continue;
      S* val = p->value.data();
      const S* grd = p->grad.data();
      double* m = m_[i].data();
      double* v = v_[i].data();
      for (size_t j = 0; j < p->value.size(); ++j) {
        const double g = static_cast<double>(grd[j]) * grad_scale;
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        val[j] -= static_cast<S>(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  int steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Parameter<S>*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

}  // namespace mmgf
