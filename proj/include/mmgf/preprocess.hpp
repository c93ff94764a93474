#pragma once

// Stream preprocessing: rate alignment, channel assembly, clutter removal,
// and fixed-length windowing with a stitch map for reassembly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

// ===== IMU resampling =====

// Downsamples by linear interpolation onto a uniform grid at target_hz.
// Output length floor((n-1) * target / source) + 1, so the resampled stream
// spans the same time extent. With antialias set, a Hamming-windowed-sinc
// low-pass at the target Nyquist runs first (edge frames clamp).
inline ImuSequence resample_imu(const ImuSequence& in, double target_hz,
                                bool antialias = false) {
  in.validate("resample_imu input");
  if (target_hz <= 0.0)
    throw ValidationError("resample_imu: target rate must be positive");
  if (target_hz > in.sample_rate)
    throw ValidationError("resample_imu: upsampling from " +
                          std::to_string(in.sample_rate) + " Hz to " +
                          std::to_string(target_hz) + " Hz is not supported");
  if (target_hz == in.sample_rate) return in;

  const int c = in.n_channels();
  const int n = in.n_frames();
  const double ratio = in.sample_rate / target_hz;

  Tensor<float> src = in.data;
  if (antialias) {
    // Cutoff at the new Nyquist; ~4 zero crossings per side.
    const double fc = 0.5 / ratio;
    const int half = static_cast<int>(std::ceil(4.0 * ratio));
    const int taps = 2 * half + 1;
    std::vector<double> h(static_cast<size_t>(taps));
    double gain = 0.0;
    for (int i = 0; i < taps; ++i) {
      const int k = i - half;
      const double x = 2.0 * 3.14159265358979323846 * fc * k;
      const double sinc = k == 0 ? 2.0 * fc : std::sin(x) / (3.14159265358979323846 * k);
      const double w =
          0.54 - 0.46 * std::cos(2.0 * 3.14159265358979323846 * i / (taps - 1));
      h[static_cast<size_t>(i)] = sinc * w;
      gain += h[static_cast<size_t>(i)];
    }
    for (auto& v : h) v /= gain;  // unit DC gain
    Tensor<float> filtered({c, n});
    for (int ch = 0; ch < c; ++ch)
      for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        for (int i = 0; i < taps; ++i) {
          const int s = std::clamp(t + i - half, 0, n - 1);
          acc += h[static_cast<size_t>(i)] * src(ch, s);
        }
        filtered(ch, t) = static_cast<float>(acc);
      }
    src = std::move(filtered);
  }

  const int m = static_cast<int>(std::floor((n - 1) / ratio)) + 1;
  ImuSequence out;
  out.sample_rate = target_hz;
  out.channel_layout = in.channel_layout;
  out.data = Tensor<float>({c, m});
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < m; ++i) {
      const double pos = i * ratio;
      const int lo = std::min(n - 1, static_cast<int>(pos));
      const int hi = std::min(n - 1, lo + 1);
      const double frac = pos - lo;
      out.data(ch, i) = static_cast<float>((1.0 - frac) * src(ch, lo) +
                                           frac * src(ch, hi));
    }
  return out;
}

// ===== Hand concatenation =====

// Stacks two single-wrist streams into the 12-channel two-hand layout,
// left block first.
inline ImuSequence concat_hands(const ImuSequence& left,
                                const ImuSequence& right) {
  left.validate("concat_hands left");
  right.validate("concat_hands right");
  if (left.n_channels() != 6 || right.n_channels() != 6)
    throw ValidationError("concat_hands: both inputs must have 6 channels");
  if (left.n_frames() != right.n_frames())
    throw ValidationError("concat_hands: frame count mismatch (" +
                          std::to_string(left.n_frames()) + " vs " +
                          std::to_string(right.n_frames()) + ")");
  if (left.sample_rate != right.sample_rate)
    throw ValidationError("concat_hands: sample rate mismatch");
  const int n = left.n_frames();
  ImuSequence out;
  out.sample_rate = left.sample_rate;
  out.channel_layout = ImuSequence::two_hand_layout();
  out.data = Tensor<float>({12, n});
  for (int c = 0; c < 6; ++c)
    for (int t = 0; t < n; ++t) {
      out.data(c, t) = left.data(c, t);
      out.data(c + 6, t) = right.data(c, t);
    }
  return out;
}

// ===== Radar clutter removal =====

// Static-background suppression: subtract each (range, doppler) bin's
// temporal mean, then clip negatives to zero (the cube is a magnitude map).
inline RdtCube remove_clutter(const RdtCube& in) {
  in.validate("remove_clutter input");
  const int R = in.n_range(), D = in.n_doppler(), N = in.n_frames();
  if (N < 2)
    throw ValidationError("remove_clutter: needs at least 2 frames to estimate the background");
  RdtCube out;
  out.frame_rate = in.frame_rate;
  out.data = Tensor<float>({R, D, N});
  for (int r = 0; r < R; ++r)
    for (int d = 0; d < D; ++d) {
      double mean = 0.0;
      for (int t = 0; t < N; ++t) mean += in.data(r, d, t);
      mean /= N;
      for (int t = 0; t < N; ++t)
        out.data(r, d, t) =
            std::max(0.0f, in.data(r, d, t) - static_cast<float>(mean));
    }
  return out;
}

// ===== Windowing =====

enum class PadMode { RepeatEdge };

struct WindowSpec {
  int window_frames = 1000;
  int stride_frames = 0;  // 0 means stride == window (non-overlapping)
  PadMode pad = PadMode::RepeatEdge;

  int stride() const { return stride_frames > 0 ? stride_frames : window_frames; }

  void validate() const {
    if (window_frames < 1)
      throw ValidationError("WindowSpec: window_frames must be >= 1");
    if (stride_frames < 0 || stride() > window_frames)
      throw ValidationError("WindowSpec: stride must be in [1, window_frames]");
  }
};

// One fixed-length slice of a session. Frames past the session end repeat the
// final frame; valid_frames says how many are real.
struct SessionWindow {
  int session_start = 0;
  int valid_frames = 0;
  std::optional<Tensor<float>> radar;  // [R, D, W]
  std::optional<Tensor<float>> imu;    // [C, W]
  std::vector<ClassId> labels;         // length W
};

struct StitchMap {
  int n_frames = 0;
  int window_frames = 0;
  std::vector<std::pair<int, int>> spans;  // (session_start, valid_frames)
};

inline std::pair<std::vector<SessionWindow>, StitchMap> window_session(
    const MealSession& session, const WindowSpec& spec) {
  spec.validate();
  session.validate();
  const int n = session.n_frames();
  const int w = spec.window_frames;
  const int stride = spec.stride();

  std::vector<SessionWindow> windows;
  StitchMap map;
  map.n_frames = n;
  map.window_frames = w;

  for (int start = 0; start < n; start += stride) {
    SessionWindow win;
    win.session_start = start;
    win.valid_frames = std::min(w, n - start);
    win.labels.resize(static_cast<size_t>(w));
    for (int j = 0; j < w; ++j) {
      const int src = std::min(start + j, n - 1);
      win.labels[static_cast<size_t>(j)] = session.labels.labels[static_cast<size_t>(src)];
    }
    if (session.radar) {
      const auto& cube = session.radar->data;
      const int R = cube.dim(0), D = cube.dim(1);
      Tensor<float> slice({R, D, w});
      for (int r = 0; r < R; ++r)
        for (int d = 0; d < D; ++d)
          for (int j = 0; j < w; ++j)
            slice(r, d, j) = cube(r, d, std::min(start + j, n - 1));
      win.radar = std::move(slice);
    }
    if (session.imu) {
      const auto& data = session.imu->data;
      const int C = data.dim(0);
      Tensor<float> slice({C, w});
      for (int c = 0; c < C; ++c)
        for (int j = 0; j < w; ++j)
          slice(c, j) = data(c, std::min(start + j, n - 1));
      win.imu = std::move(slice);
    }
    map.spans.emplace_back(start, win.valid_frames);
    windows.push_back(std::move(win));
  }
  return {std::move(windows), std::move(map)};
}

// Reassembles per-window probability matrices [3, W] into a session-length
// [3, N]. With non-overlapping windows every frame is written exactly once;
// with overlap, covering windows are averaged (a mean of probability columns
// is still a probability column).
inline Tensor<double> stitch_window_probs(
    const std::vector<Tensor<double>>& window_probs, const StitchMap& map) {
  if (window_probs.size() != map.spans.size())
    throw ValidationError("stitch: got " + std::to_string(window_probs.size()) +
                          " windows but the stitch map has " +
                          std::to_string(map.spans.size()));
  Tensor<double> out({kNumClasses, map.n_frames});
  std::vector<int> cover(static_cast<size_t>(map.n_frames), 0);
  for (size_t i = 0; i < window_probs.size(); ++i) {
    const auto& p = window_probs[i];
    if (p.rank() != 2 || p.dim(0) != kNumClasses || p.dim(1) != map.window_frames)
      throw ValidationError("stitch: window " + std::to_string(i) +
                            " has shape " + p.shape_str());
    const auto [start, valid] = map.spans[i];
    for (int j = 0; j < valid; ++j) {
      for (int c = 0; c < kNumClasses; ++c) out(c, start + j) += p(c, j);
      ++cover[static_cast<size_t>(start + j)];
    }
  }
  for (int t = 0; t < map.n_frames; ++t) {
    if (cover[static_cast<size_t>(t)] == 0)
      throw RuntimeFailure("stitch: frame " + std::to_string(t) + " uncovered");
    for (int c = 0; c < kNumClasses; ++c) out(c, t) /= cover[static_cast<size_t>(t)];
  }
  return out;
}

}  // namespace mmgf
