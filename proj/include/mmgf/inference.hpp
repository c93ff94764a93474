#pragma once

// Session-level prediction with modality-complete and modality-incomplete
// routing, window stitching, and label decoding.
//
// The caller hands in a prepared session (see prepare_session); preparation
// is not idempotent, so it must happen exactly once upstream.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mmgf/model.hpp"
#include "mmgf/preprocess.hpp"

namespace mmgf {

// Which sensor streams the deployment actually has. A stream a session
// happens to carry beyond what the mode needs is simply ignored, which is
// how a complete recording simulates a missing-modality deployment.
enum class Availability { Both, ImuOnly, RadarOnly };

inline const char* availability_name(Availability a) {
  switch (a) {
    case Availability::Both: return "both";
    case Availability::ImuOnly: return "imu_only";
    case Availability::RadarOnly: return "radar_only";
  }
  return "?";
}

inline Availability availability_from_name(const std::string& s) {
  if (s == "both") return Availability::Both;
  if (s == "imu_only") return Availability::ImuOnly;
  if (s == "radar_only") return Availability::RadarOnly;
  throw ValidationError("unknown availability '" + s +
                        "' (expected both, imu_only, or radar_only)");
}

// Per-frame argmax; ties break toward the lower class index, so a uniform
// column decodes as Other.
inline LabelSequence decode_labels(const LogitSequence& p) {
  p.validate("decode_labels");
  const int n = p.n_frames();
  LabelSequence out;
  out.labels.resize(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (p.values(c, t) > p.values(best, t)) best = c;
    out.labels[static_cast<size_t>(t)] = static_cast<ClassId>(best);
  }
  return out;
}

struct PredictResult {
  LogitSequence probs;  // [3, N], columns sum to 1
  LabelSequence labels;
};

// Windowed prediction over one prepared session. Routing by availability:
// with both streams the two unimodal encoders feed the fusion directly; with
// one stream missing, that side's features are rebuilt by the corresponding
// adaptation encoder from the stream that is present.
template <class S>
PredictResult predict_session(FullModel<S>& model, const MealSession& session,
                              Availability avail, const WindowSpec& spec) {
  const bool need_imu = avail != Availability::RadarOnly;
  const bool need_radar = avail != Availability::ImuOnly;
  if (need_imu && !session.imu)
    throw ValidationError("predict: availability '" +
                          std::string(availability_name(avail)) +
                          "' needs an IMU stream, but session '" +
                          session.session_id + "' has none");
  if (need_radar && !session.radar)
    throw ValidationError("predict: availability '" +
                          std::string(availability_name(avail)) +
                          "' needs a radar stream, but session '" +
                          session.session_id + "' has none");

  auto [windows, map] = window_session(session, spec);
  std::vector<Tensor<double>> window_probs;
  window_probs.reserve(windows.size());
  for (const auto& w : windows) {
    Tensor<S> m_imu, m_radar;
    switch (avail) {
      case Availability::Both: {
        m_imu = model.imu.encoder.forward(convert<S>(*w.imu));
        m_radar = model.radar.encoder.forward(convert<S>(*w.radar));
        break;
      }
      case Availability::ImuOnly: {
        Tensor<S> x = convert<S>(*w.imu);
        m_imu = model.imu.encoder.forward(x);
        m_radar = model.fusion.mae_i2r.forward(x);
        break;
      }
      case Availability::RadarOnly: {
        Tensor<S> x = convert<S>(*w.radar);
        m_radar = model.radar.encoder.forward(x);
        m_imu = model.fusion.mae_r2i.forward(x);
        break;
      }
    }
    Tensor<S> p = model.fusion.forward_fused_probs(
        m_radar, m_imu, model.radar.predictor, model.imu.predictor);
    window_probs.push_back(convert<double>(p));
  }

  PredictResult out;
  out.probs.values = stitch_window_probs(window_probs, map);
  out.probs.is_probability = true;
  out.labels = decode_labels(out.probs);
  out.labels.frame_rate = session.labels.frame_rate;
  return out;
}

// Unimodal baseline prediction: one branch's encoder + predictor, no fusion.
template <class S>
PredictResult predict_session_unimodal(FullModel<S>& model,
                                       const MealSession& session,
                                       Modality modality,
                                       const WindowSpec& spec) {
  if (modality == Modality::Imu && !session.imu)
    throw ValidationError("predict: session '" + session.session_id +
                          "' has no IMU stream");
  if (modality == Modality::Radar && !session.radar)
    throw ValidationError("predict: session '" + session.session_id +
                          "' has no radar stream");

  auto [windows, map] = window_session(session, spec);
  std::vector<Tensor<double>> window_probs;
  window_probs.reserve(windows.size());
  for (const auto& w : windows) {
    Tensor<S> p;
    if (modality == Modality::Imu) {
      Tensor<S> m = model.imu.encoder.forward(convert<S>(*w.imu));
      p = model.imu.predictor.probs(m);
    } else {
      Tensor<S> m = model.radar.encoder.forward(convert<S>(*w.radar));
      p = model.radar.predictor.probs(m);
    }
    window_probs.push_back(convert<double>(p));
  }

  PredictResult out;
  out.probs.values = stitch_window_probs(window_probs, map);
  out.probs.is_probability = true;
  out.labels = decode_labels(out.probs);
  out.labels.frame_rate = session.labels.frame_rate;
  return out;
}

// ===== predictions.csv =====

inline void write_predictions_csv(const std::filesystem::path& path,
                                  const PredictResult& result) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << "frame,p_other,p_eat,p_drink,label\n";
  const int n = result.probs.n_frames();
  char line[160];
  for (int t = 0; t < n; ++t) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%d\n", t,
                  result.probs.values(0, t), result.probs.values(1, t),
                  result.probs.values(2, t),
                  static_cast<int>(result.labels.labels[static_cast<size_t>(t)]));
    out << line;
  }
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

inline PredictResult read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "frame,p_other,p_eat,p_drink,label")
    throw ValidationError(path.string() + ": unexpected header '" + header + "'");
  std::vector<double> p0, p1, p2;
  std::vector<ClassId> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int frame = 0, label = 0;
    double a = 0, b = 0, c = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%d", &frame, &a, &b, &c,
                    &label) != 5)
      throw ValidationError(path.string() + ": bad row '" + line + "'");
    if (frame != static_cast<int>(p0.size()))
      throw ValidationError(path.string() + ": frames out of order at '" + line + "'");
    if (label < 0 || label >= kNumClasses)
      throw ValidationError(path.string() + ": bad label in '" + line + "'");
    p0.push_back(a);
    p1.push_back(b);
    p2.push_back(c);
    labels.push_back(static_cast<ClassId>(label));
  }
  if (p0.empty()) throw ValidationError(path.string() + ": no rows");
  PredictResult out;
  out.probs.values = Tensor<double>({kNumClasses, static_cast<int>(p0.size())});
  for (size_t t = 0; t < p0.size(); ++t) {
    out.probs.values(0, static_cast<int>(t)) = p0[t];
    out.probs.values(1, static_cast<int>(t)) = p1[t];
    out.probs.values(2, static_cast<int>(t)) = p2[t];
  }
  out.probs.is_probability = true;
  out.labels.labels = std::move(labels);
  return out;
}

}  // namespace mmgf
