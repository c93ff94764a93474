#pragma once

// Small layer zoo with explicit forward/backward passes. Layers cache what
// they need during forward; backward returns the input gradient and
// accumulates (+=) into parameter grads, so batch accumulation is free.
// Scalar type S is float for production and double for gradient checks.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/rng.hpp"
#include "mmgf/tensor.hpp"

namespace mmgf {

// ===== Parameters =====

template <class S>
struct Parameter {
  std::string name;
  Tensor<S> value, grad;
  double init_limit = 0.0;  // draw U(-limit, limit); limit 0 means zero-fill
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, const std::vector<int>& shape, double limit)
      : name(std::move(n)), value(shape), grad(shape), init_limit(limit) {}

  void zero_grad() { grad.fill(S(0)); }
};

inline double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

// Each tensor gets its own stream derived from (master seed, tensor name), so
// adding or reordering parameters elsewhere cannot shift its draw.
template <class S>
void init_parameter(Parameter<S>& p, std::uint64_t master_seed,
                    double scale = 1.0) {
  const double limit = p.init_limit * scale;
  if (limit == 0.0) {
    p.value.fill(S(0));
    return;
  }
  Rng rng(derive_seed(master_seed, p.name));
  for (auto& v : p.value.raw()) v = static_cast<S>(rng.uniform(-limit, limit));
}

template <class S>
void init_parameters(const std::vector<Parameter<S>*>& params,
                     std::uint64_t master_seed, double scale = 1.0) {
  for (auto* p : params) init_parameter(*p, master_seed, scale);
}

// ===== Pointwise (1x1 temporal) convolution =====

template <class S>
class PointwiseConv {
 public:
  PointwiseConv(const std::string& name, int in, int out)
      : in_(in), out_(out),
        w(name + ".w", {out, in}, glorot_limit(in, out)),
        b(name + ".b", {out}, 0.0) {}

  // x: [in, N] -> [out, N]
  Tensor<S> forward(const Tensor<S>& x) {
    if (x.rank() != 2 || x.dim(0) != in_)
      throw ValidationError("PointwiseConv " + w.name + ": input shape " +
                            x.shape_str() + ", expected [" +
                            std::to_string(in_) + ", N]");
    x_ = x;
    const int n = x.dim(1);
    Tensor<S> y({out_, n});
    for (int o = 0; o < out_; ++o) {
      S* yo = y.data() + static_cast<size_t>(o) * n;
      const S bo = b.value.data()[o];
      for (int t = 0; t < n; ++t) yo[t] = bo;
      for (int i = 0; i < in_; ++i) {
        const S wv = w.value.data()[static_cast<size_t>(o) * in_ + i];
        const S* xi = x.data() + static_cast<size_t>(i) * n;
        for (int t = 0; t < n; ++t) yo[t] += wv * xi[t];
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    const int n = x_.dim(1);
    Tensor<S> gx({in_, n});
    for (int o = 0; o < out_; ++o) {
      const S* go = gy.data() + static_cast<size_t>(o) * n;
      S gb = 0;
      for (int t = 0; t < n; ++t) gb += go[t];
      b.grad.data()[o] += gb;
      for (int i = 0; i < in_; ++i) {
        const S* xi = x_.data() + static_cast<size_t>(i) * n;
        S* gi = gx.data() + static_cast<size_t>(i) * n;
        const S wv = w.value.data()[static_cast<size_t>(o) * in_ + i];
        S gw = 0;
        for (int t = 0; t < n; ++t) {
          gw += go[t] * xi[t];
          gi[t] += wv * go[t];
        }
        w.grad.data()[static_cast<size_t>(o) * in_ + i] += gw;
      }
    }
    return gx;
  }

  std::vector<Parameter<S>*> params() { return {&w, &b}; }

  int in_ = 0, out_ = 0;
  Parameter<S> w, b;

 private:
  Tensor<S> x_;
};

// ===== Dilated 1-D convolution, length-preserving =====

template <class S>
class Conv1dDilated {
 public:
  Conv1dDilated(const std::string& name, int in, int out, int kernel,
                int dilation, bool causal)
      : in_(in), out_(out), k_(kernel), d_(dilation), causal_(causal),
        w(name + ".w", {out, in, kernel}, glorot_limit(in * kernel, out * kernel)),
        b(name + ".b", {out}, 0.0) {
    if (kernel < 1 || dilation < 1)
      throw ValidationError("Conv1dDilated: kernel and dilation must be >= 1");
    if (!causal && kernel % 2 == 0)
      throw ValidationError("Conv1dDilated: non-causal mode needs an odd kernel");
  }

  // Taps sit at t + (j - offset)*d; offset centers them (non-causal) or pins
  // the newest tap at t (causal). Out-of-range taps read zero.
  int offset() const { return causal_ ? k_ - 1 : (k_ - 1) / 2; }

  Tensor<S> forward(const Tensor<S>& x) {
    if (x.rank() != 2 || x.dim(0) != in_)
      throw ValidationError("Conv1dDilated " + w.name + ": input shape " +
                            x.shape_str() + ", expected [" +
                            std::to_string(in_) + ", N]");
    x_ = x;
    const int n = x.dim(1);
    Tensor<S> y({out_, n});
    for (int o = 0; o < out_; ++o) {
      S* yo = y.data() + static_cast<size_t>(o) * n;
      const S bo = b.value.data()[o];
      for (int t = 0; t < n; ++t) yo[t] = bo;
      for (int i = 0; i < in_; ++i) {
        const S* xi = x.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < k_; ++j) {
          const int shift = (j - offset()) * d_;
          const S wv = w.value.data()[(static_cast<size_t>(o) * in_ + i) * k_ + j];
          const int t_lo = std::max(0, -shift);
          const int t_hi = std::min(n, n - shift);
          for (int t = t_lo; t < t_hi; ++t) yo[t] += wv * xi[t + shift];
        }
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    const int n = x_.dim(1);
    Tensor<S> gx({in_, n});
    for (int o = 0; o < out_; ++o) {
      const S* go = gy.data() + static_cast<size_t>(o) * n;
      S gb = 0;
      for (int t = 0; t < n; ++t) gb += go[t];
      b.grad.data()[o] += gb;
      for (int i = 0; i < in_; ++i) {
        const S* xi = x_.data() + static_cast<size_t>(i) * n;
        S* gi = gx.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < k_; ++j) {
          const int shift = (j - offset()) * d_;
          const size_t widx = (static_cast<size_t>(o) * in_ + i) * k_ + j;
          const S wv = w.value.data()[widx];
          const int t_lo = std::max(0, -shift);
          const int t_hi = std::min(n, n - shift);
          S gw = 0;
          for (int t = t_lo; t < t_hi; ++t) {
            gw += go[t] * xi[t + shift];
            gi[t + shift] += wv * go[t];
          }
          w.grad.data()[widx] += gw;
        }
      }
    }
    return gx;
  }

  std::vector<Parameter<S>*> params() { return {&w, &b}; }

  int in_ = 0, out_ = 0, k_ = 0, d_ = 0;
  bool causal_ = false;
  Parameter<S> w, b;

 private:
  Tensor<S> x_;
};

// ===== ReLU =====

template <class S>
class Relu {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    mask_.assign(x.size(), 0);
    Tensor<S> y = x;
    S* yd = y.data();
    for (size_t i = 0; i < y.size(); ++i) {
      if (yd[i] > S(0))
        mask_[i] = 1;
      else
        yd[i] = S(0);
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    Tensor<S> gx = gy;
    S* gd = gx.data();
    for (size_t i = 0; i < gx.size(); ++i)
      if (!mask_[i]) gd[i] = S(0);
    return gx;
  }

 private:
  std::vector<unsigned char> mask_;
};

// ===== Residual dilated block: conv -> ReLU -> pointwise -> + input =====

template <class S>
class TcnBlock {
 public:
  TcnBlock(const std::string& name, int channels, int kernel, int dilation,
           bool causal)
      : conv_(name + ".dil", channels, channels, kernel, dilation, causal),
        pw_(name + ".pw", channels, channels) {}

  Tensor<S> forward(const Tensor<S>& x) {
    Tensor<S> h = conv_.forward(x);
    h = relu_.forward(h);
    Tensor<S> y = pw_.forward(h);
    S* yd = y.data();
    const S* xd = x.data();
    for (size_t i = 0; i < y.size(); ++i) yd[i] += xd[i];
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    Tensor<S> gh = pw_.backward(gy);
    gh = relu_.backward(gh);
    Tensor<S> gx = conv_.backward(gh);
    S* gd = gx.data();
    const S* gyd = gy.data();
    for (size_t i = 0; i < gx.size(); ++i) gd[i] += gyd[i];
    return gx;
  }

  void collect_params(std::vector<Parameter<S>*>& out) {
    for (auto* p : conv_.params()) out.push_back(p);
    for (auto* p : pw_.params()) out.push_back(p);
  }

 private:
  Conv1dDilated<S> conv_;
  Relu<S> relu_;
  PointwiseConv<S> pw_;
};

// ===== 3-D convolution over [C, R, D, N], same-size output =====

template <class S>
class Conv3d {
 public:
  Conv3d(const std::string& name, int in, int out, int kernel)
      : in_(in), out_(out), k_(kernel),
        w(name + ".w", {out, in, kernel, kernel, kernel},
          glorot_limit(in * kernel * kernel * kernel, out * kernel * kernel * kernel)),
        b(name + ".b", {out}, 0.0) {
    if (kernel % 2 == 0) throw ValidationError("Conv3d: kernel must be odd");
  }

  Tensor<S> forward(const Tensor<S>& x) {
    if (x.rank() != 4 || x.dim(0) != in_)
      throw ValidationError("Conv3d " + w.name + ": input shape " + x.shape_str());
    x_ = x;
    const int R = x.dim(1), D = x.dim(2), N = x.dim(3);
    const int h = k_ / 2;
    Tensor<S> y({out_, R, D, N});
    for (int o = 0; o < out_; ++o) {
      const S bo = b.value.data()[o];
      S* ybase = y.data() + static_cast<size_t>(o) * R * D * N;
      for (size_t i = 0; i < static_cast<size_t>(R) * D * N; ++i) ybase[i] = bo;
      for (int i = 0; i < in_; ++i) {
        const S* xbase = x.data() + static_cast<size_t>(i) * R * D * N;
        for (int kr = 0; kr < k_; ++kr)
          for (int kd = 0; kd < k_; ++kd)
            for (int kt = 0; kt < k_; ++kt) {
              const S wv = w.value.data()[((((static_cast<size_t>(o) * in_ + i) * k_) + kr) * k_ + kd) * k_ + kt];
              const int ts = kt - h;  // temporal shift
              const int t_lo = std::max(0, -ts), t_hi = std::min(N, N - ts);
              if (t_lo >= t_hi) continue;
              for (int r = std::max(0, h - kr); r < std::min(R, R + h - kr); ++r) {
                const int rs = r + kr - h;
                for (int d = std::max(0, h - kd); d < std::min(D, D + h - kd); ++d) {
                  const int ds = d + kd - h;
                  S* yrow = ybase + (static_cast<size_t>(r) * D + d) * N;
                  const S* xrow = xbase + (static_cast<size_t>(rs) * D + ds) * N + ts;
                  for (int t = t_lo; t < t_hi; ++t) yrow[t] += wv * xrow[t];
                }
              }
            }
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    const int R = x_.dim(1), D = x_.dim(2), N = x_.dim(3);
    const int h = k_ / 2;
    Tensor<S> gx({in_, R, D, N});
    for (int o = 0; o < out_; ++o) {
      const S* gbase = gy.data() + static_cast<size_t>(o) * R * D * N;
      S gb = 0;
      for (size_t i = 0; i < static_cast<size_t>(R) * D * N; ++i) gb += gbase[i];
      b.grad.data()[o] += gb;
      for (int i = 0; i < in_; ++i) {
        const S* xbase = x_.data() + static_cast<size_t>(i) * R * D * N;
        S* gxbase = gx.data() + static_cast<size_t>(i) * R * D * N;
        for (int kr = 0; kr < k_; ++kr)
          for (int kd = 0; kd < k_; ++kd)
            for (int kt = 0; kt < k_; ++kt) {
              const size_t widx = ((((static_cast<size_t>(o) * in_ + i) * k_) + kr) * k_ + kd) * k_ + kt;
              const S wv = w.value.data()[widx];
              S gw = 0;
              const int ts = kt - h;
              const int t_lo = std::max(0, -ts), t_hi = std::min(N, N - ts);
              if (t_lo >= t_hi) continue;
              for (int r = std::max(0, h - kr); r < std::min(R, R + h - kr); ++r) {
                const int rs = r + kr - h;
                for (int d = std::max(0, h - kd); d < std::min(D, D + h - kd); ++d) {
                  const int ds = d + kd - h;
                  const S* grow = gbase + (static_cast<size_t>(r) * D + d) * N;
                  const S* xrow = xbase + (static_cast<size_t>(rs) * D + ds) * N + ts;
                  S* gxrow = gxbase + (static_cast<size_t>(rs) * D + ds) * N + ts;
                  for (int t = t_lo; t < t_hi; ++t) {
                    gw += grow[t] * xrow[t];
                    gxrow[t] += wv * grow[t];
                  }
                }
              }
              w.grad.data()[widx] += gw;
            }
      }
    }
    return gx;
  }

  std::vector<Parameter<S>*> params() { return {&w, &b}; }

  int in_ = 0, out_ = 0, k_ = 0;
  Parameter<S> w, b;

 private:
  Tensor<S> x_;
};

// ===== Spatial max-pooling over (range, doppler); time untouched =====

template <class S>
class MaxPool3dSpatial {
 public:
  MaxPool3dSpatial(int pool_r, int pool_d) : pr_(pool_r), pd_(pool_d) {
    if (pool_r < 1 || pool_d < 1)
      throw ValidationError("MaxPool3dSpatial: pool sizes must be >= 1");
  }

  Tensor<S> forward(const Tensor<S>& x) {
    const int C = x.dim(0), R = x.dim(1), D = x.dim(2), N = x.dim(3);
    const int Ro = (R + pr_ - 1) / pr_, Do = (D + pd_ - 1) / pd_;
    in_shape_ = {C, R, D, N};
    Tensor<S> y({C, Ro, Do, N});
    arg_.assign(y.size(), 0);
    for (int c = 0; c < C; ++c)
      for (int ro = 0; ro < Ro; ++ro)
        for (int do_ = 0; do_ < Do; ++do_) {
          const int r0 = ro * pr_, r1 = std::min(R, r0 + pr_);
          const int d0 = do_ * pd_, d1 = std::min(D, d0 + pd_);
          S* yrow = y.data() + ((static_cast<size_t>(c) * Ro + ro) * Do + do_) * N;
          int* arow = arg_.data() + ((static_cast<size_t>(c) * Ro + ro) * Do + do_) * N;
          for (int t = 0; t < N; ++t) {
            S best = x(c, r0, d0, t);
            int besti = r0 * D + d0;
            for (int r = r0; r < r1; ++r)
              for (int d = d0; d < d1; ++d) {
                const S v = x(c, r, d, t);
                if (v > best) {  // first max wins ties
                  best = v;
                  besti = r * D + d;
                }
              }
            yrow[t] = best;
            arow[t] = besti;
          }
        }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    const int C = in_shape_[0], R = in_shape_[1], D = in_shape_[2], N = in_shape_[3];
    const int Ro = gy.dim(1), Do = gy.dim(2);
    Tensor<S> gx({C, R, D, N});
    for (int c = 0; c < C; ++c)
      for (int ro = 0; ro < Ro; ++ro)
        for (int do_ = 0; do_ < Do; ++do_) {
          const S* grow = gy.data() + ((static_cast<size_t>(c) * Ro + ro) * Do + do_) * N;
          const int* arow = arg_.data() + ((static_cast<size_t>(c) * Ro + ro) * Do + do_) * N;
          for (int t = 0; t < N; ++t) {
            const int rd = arow[t];
            gx(c, rd / D, rd % D, t) += grow[t];
          }
        }
    return gx;
  }

 private:
  int pr_ = 1, pd_ = 1;
  std::vector<int> in_shape_;
  std::vector<int> arg_;
};

// ===== Global spatial average: [C, R, D, N] -> [C, N] =====

template <class S>
class GlobalSpatialAvg {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    const int C = x.dim(0), R = x.dim(1), D = x.dim(2), N = x.dim(3);
    in_shape_ = {C, R, D, N};
    Tensor<S> y({C, N});
    const S inv = S(1) / static_cast<S>(R * D);
    for (int c = 0; c < C; ++c) {
      S* yrow = y.data() + static_cast<size_t>(c) * N;
      for (int r = 0; r < R; ++r)
        for (int d = 0; d < D; ++d) {
          const S* xrow = x.data() + ((static_cast<size_t>(c) * R + r) * D + d) * N;
          for (int t = 0; t < N; ++t) yrow[t] += xrow[t];
        }
      for (int t = 0; t < N; ++t) yrow[t] *= inv;
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    const int C = in_shape_[0], R = in_shape_[1], D = in_shape_[2], N = in_shape_[3];
    Tensor<S> gx({C, R, D, N});
    const S inv = S(1) / static_cast<S>(R * D);
    for (int c = 0; c < C; ++c) {
      const S* grow = gy.data() + static_cast<size_t>(c) * N;
      for (int r = 0; r < R; ++r)
        for (int d = 0; d < D; ++d) {
          S* xrow = gx.data() + ((static_cast<size_t>(c) * R + r) * D + d) * N;
          for (int t = 0; t < N; ++t) xrow[t] = grow[t] * inv;
        }
    }
    return gx;
  }

 private:
  std::vector<int> in_shape_;
};

// ===== Per-column softmax (probabilities over classes, one column per frame) =====

template <class S>
Tensor<S> softmax_columns(const Tensor<S>& logits) {
  const int C = logits.dim(0), N = logits.dim(1);
  Tensor<S> p({C, N});
  for (int t = 0; t < N; ++t) {
    S mx = logits(0, t);
    for (int c = 1; c < C; ++c) mx = std::max(mx, logits(c, t));
    S z = 0;
    for (int c = 0; c < C; ++c) {
      const S e = std::exp(logits(c, t) - mx);
      p(c, t) = e;
      z += e;
    }
    for (int c = 0; c < C; ++c) p(c, t) /= z;
  }
  return p;
}

// Chain rule through a per-column softmax: given dL/dp and p, produce dL/dz.
template <class S>
Tensor<S> softmax_backward_columns(const Tensor<S>& p, const Tensor<S>& gp) {
  const int C = p.dim(0), N = p.dim(1);
  Tensor<S> gz({C, N});
  for (int t = 0; t < N; ++t) {
    S dot = 0;
    for (int c = 0; c < C; ++c) dot += p(c, t) * gp(c, t);
    for (int c = 0; c < C; ++c) gz(c, t) = p(c, t) * (gp(c, t) - dot);
  }
  return gz;
}

}  // namespace mmgf
