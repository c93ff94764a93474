#pragma once

// Core data model: frame-aligned streams for one recorded meal session.
//
// All streams of a session run at the same frame rate (25 fps by default)
// and the same length N. Frame t covers seconds [t/fps, (t+1)/fps).

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/tensor.hpp"

namespace mmgf {

constexpr int kNumClasses = 3;
constexpr double kDefaultFrameRate = 25.0;

enum class ClassId : uint8_t { Other = 0, Eating = 1, Drinking = 2 };

inline const char* class_name(ClassId c) {
  switch (c) {
    case ClassId::Other: return "other";
    case ClassId::Eating: return "eating";
    case ClassId::Drinking: return "drinking";
  }
  return "?";
}

inline std::optional<ClassId> class_from_name(const std::string& s) {
  if (s == "other") return ClassId::Other;
  if (s == "eating") return ClassId::Eating;
  if (s == "drinking") return ClassId::Drinking;
  return std::nullopt;
}

// ===== Streams =====

// Range-Doppler-time cube, shape [n_range, n_doppler, n_frames], dimensionless
// magnitude. The stock sensor geometry is 32 range bins over 1.28 m and 64
// Doppler bins over +-1.28 m/s; tests may use smaller cubes.
struct RdtCube {
  Tensor<float> data;  // [R, D, N]
  double frame_rate = kDefaultFrameRate;

  int n_range() const { return data.rank() == 3 ? data.dim(0) : 0; }
  int n_doppler() const { return data.rank() == 3 ? data.dim(1) : 0; }
  int n_frames() const { return data.rank() == 3 ? data.dim(2) : 0; }

  void validate(const std::string& where) const {
    if (data.rank() != 3)
      throw ValidationError(where + ": radar cube must have rank 3, got " +
                            data.shape_str());
    if (n_frames() < 1)
      throw ValidationError(where + ": radar cube has no frames");
    if (frame_rate <= 0.0)
      throw ValidationError(where + ": non-positive frame_rate");
    const float* p = data.data();
    for (size_t i = 0; i < data.size(); ++i)
      if (!std::isfinite(p[i]))
        throw ValidationError(where + ": non-finite value in radar cube");
  }
};

// Wrist IMU stream, shape [n_channels, n_frames]. 12 channels when both
// wrists are present (left acc xyz, left gyro xyz, right acc xyz, right gyro
// xyz), 6 in single-hand mode.
struct ImuSequence {
  Tensor<float> data;  // [C, N]
  double sample_rate = kDefaultFrameRate;
  std::vector<std::string> channel_layout;

  int n_channels() const { return data.rank() == 2 ? data.dim(0) : 0; }
  int n_frames() const { return data.rank() == 2 ? data.dim(1) : 0; }

  static std::vector<std::string> one_hand_layout(const std::string& hand) {
    std::vector<std::string> v;
    for (const char* sensor : {"acc", "gyr"})
      for (const char* axis : {"x", "y", "z"})
        v.push_back(hand + "_" + sensor + "_" + axis);
    return v;
  }

  static std::vector<std::string> two_hand_layout() {
    auto v = one_hand_layout("left");
    const auto r = one_hand_layout("right");
    v.insert(v.end(), r.begin(), r.end());
    return v;
  }

  void validate(const std::string& where) const {
    if (data.rank() != 2)
      throw ValidationError(where + ": IMU stream must have rank 2, got " +
                            data.shape_str());
    if (n_channels() != 6 && n_channels() != 12)
      throw ValidationError(where + ": IMU stream must have 6 or 12 channels, got " +
                            std::to_string(n_channels()));
    if (n_frames() < 1)
      throw ValidationError(where + ": IMU stream has no frames");
    if (sample_rate <= 0.0)
      throw ValidationError(where + ": non-positive sample_rate");
    if (!channel_layout.empty() &&
        channel_layout.size() != static_cast<size_t>(n_channels()))
      throw ValidationError(where + ": channel_layout length mismatch");
    const float* p = data.data();
    for (size_t i = 0; i < data.size(); ++i)
      if (!std::isfinite(p[i]))
        throw ValidationError(where + ": non-finite value in IMU stream");
  }
};

// Per-frame class labels.
struct LabelSequence {
  std::vector<ClassId> labels;
  double frame_rate = kDefaultFrameRate;

  int n_frames() const { return static_cast<int>(labels.size()); }
};

// Per-frame class scores, shape [3, N]. With is_probability set, every column
// must sum to 1 within 1e-5.
struct LogitSequence {
  Tensor<double> values;  // [kNumClasses, N]
  bool is_probability = false;

  int n_frames() const { return values.rank() == 2 ? values.dim(1) : 0; }

  void validate(const std::string& where) const {
    if (values.rank() != 2 || values.dim(0) != kNumClasses)
      throw ValidationError(where + ": score matrix must be [3, N], got " +
                            values.shape_str());
    const double* p = values.data();
    for (size_t i = 0; i < values.size(); ++i)
      if (!std::isfinite(p[i]))
        throw ValidationError(where + ": non-finite score");
    if (is_probability) {
      const int n = n_frames();
      for (int t = 0; t < n; ++t) {
        double s = 0.0;
        for (int c = 0; c < kNumClasses; ++c) s += values(c, t);
        if (std::abs(s - 1.0) > 1e-5)
          throw ValidationError(where + ": probability column " +
                                std::to_string(t) + " sums to " +
                                std::to_string(s));
      }
    }
  }
};

// Half-open frame interval [start_frame, end_frame) of one gesture class.
struct GestureSegment {
  int start_frame = 0;
  int end_frame = 0;
  ClassId class_id = ClassId::Other;

  int length() const { return end_frame - start_frame; }

  bool operator==(const GestureSegment&) const = default;
};

// ===== Session =====

// One meal recording: at least one modality stream plus frame labels and
// free-form metadata. Standard metadata keys: participant, eating_style,
// dominant_hand. The ordered map keeps meta.txt output deterministic.
struct MealSession {
  std::string session_id;
  std::optional<RdtCube> radar;
  std::optional<ImuSequence> imu;
  LabelSequence labels;
  std::map<std::string, std::string> meta;

  int n_frames() const { return labels.n_frames(); }

  std::string meta_or(const std::string& key, const std::string& fallback) const {
    const auto it = meta.find(key);
    return it == meta.end() ? fallback : it->second;
  }

  void validate() const {
    const std::string where = "session '" + session_id + "'";
    if (session_id.empty())
      throw ValidationError("session: empty session_id");
    if (!radar && !imu)
      throw ValidationError(where + ": needs at least one modality stream");
    const int n = n_frames();
    if (n < 1) throw ValidationError(where + ": empty label sequence");
    if (radar) {
      radar->validate(where + " radar");
      if (radar->n_frames() != n)
        throw ValidationError(where + ": radar has " +
                              std::to_string(radar->n_frames()) +
                              " frames but labels have " + std::to_string(n));
    }
    if (imu) {
      imu->validate(where + " imu");
      if (imu->n_frames() != n)
        throw ValidationError(where + ": imu has " +
                              std::to_string(imu->n_frames()) +
                              " frames but labels have " + std::to_string(n));
    }
  }
};

}  // namespace mmgf
