#pragma once

// Feature-fusion methods: element-wise add, channel concat, decision
// averaging, and symmetric cross-modal attention (see attention.hpp).

#include <string>

#include "mmgf/attention.hpp"
#include "mmgf/errors.hpp"
#include "mmgf/tensor.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

enum class FusionMethod { Add, Concat, Decision, Cma };

inline const char* fusion_method_name(FusionMethod m) {
  switch (m) {
    case FusionMethod::Add: return "add";
    case FusionMethod::Concat: return "concat";
    case FusionMethod::Decision: return "decision";
    case FusionMethod::Cma: return "cma";
  }
  return "?";
}

inline FusionMethod fusion_method_from_name(const std::string& s) {
  if (s == "add") return FusionMethod::Add;
  if (s == "concat") return FusionMethod::Concat;
  if (s == "decision") return FusionMethod::Decision;
  if (s == "cma") return FusionMethod::Cma;
  throw ValidationError("unknown fusion method '" + s +
                        "' (expected add|concat|decision|cma)");
}

// Element-wise sum of equal-shaped feature sequences.
template <class S>
Tensor<S> fuse_add(const Tensor<S>& m_radar, const Tensor<S>& m_imu) {
  if (!m_radar.same_shape(m_imu))
    throw ValidationError("fuse_add: shape mismatch " + m_radar.shape_str() +
                          " vs " + m_imu.shape_str());
  Tensor<S> out = m_radar;
  S* o = out.data();
  const S* b = m_imu.data();
  for (size_t i = 0; i < out.size(); ++i) o[i] += b[i];
  return out;
}

// Channel stack, radar channels first: [C1,N] + [C2,N] -> [C1+C2, N].
template <class S>
Tensor<S> fuse_concat(const Tensor<S>& m_radar, const Tensor<S>& m_imu) {
  if (m_radar.dim(1) != m_imu.dim(1))
    throw ValidationError("fuse_concat: length mismatch " +
                          std::to_string(m_radar.dim(1)) + " vs " +
                          std::to_string(m_imu.dim(1)));
  Tensor<S> out({m_radar.dim(0) + m_imu.dim(0), m_radar.dim(1)});
  std::copy(m_radar.data(), m_radar.data() + m_radar.size(), out.data());
  std::copy(m_imu.data(), m_imu.data() + m_imu.size(),
            out.data() + m_radar.size());
  return out;
}

// Per-frame arithmetic mean of two probability sequences.
template <class S>
Tensor<S> fuse_decision(const Tensor<S>& p_radar, const Tensor<S>& p_imu) {
  if (!p_radar.same_shape(p_imu))
    throw ValidationError("fuse_decision: shape mismatch");
  const int C = p_radar.dim(0), N = p_radar.dim(1);
  for (int t = 0; t < N; ++t) {
    double sa = 0, sb = 0;
    for (int c = 0; c < C; ++c) {
      sa += p_radar(c, t);
      sb += p_imu(c, t);
    }
    if (std::abs(sa - 1.0) > 1e-5 || std::abs(sb - 1.0) > 1e-5)
      throw ValidationError("fuse_decision: inputs must be probabilities "
                            "(column sums within 1e-5 of 1)");
  }
  Tensor<S> out({C, N});
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < N; ++t)
      out(c, t) = static_cast<S>(0.5) * (p_radar(c, t) + p_imu(c, t));
  return out;
}

}  // namespace mmgf
