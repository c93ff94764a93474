#pragma once

// Synthetic meal-session generator.
//
// Gestures are placed by a renewal process: exponential gaps between events,
// lognormal durations moment-matched to the configured mean/stddev, class
// drawn proportionally to the configured per-minute rates. Each scheduled
// gesture is rendered consistently into both modalities:
//
//   IMU    raise-hold-lower bump on the acting wrist's accelerometer plus
//          gyro transients at the raise and lower edges; drinking adds a
//          slow roll during the hold.
//   radar  Gaussian range-Doppler blob migrating from ~0.55 m to ~0.32 m
//          and back, Doppler positive on approach and negative on retreat;
//          drinking holds near zero Doppler at close range mid-gesture.
//
// On top of that: static zero-Doppler clutter (constant over time, removable
// by mean subtraction), additive Gaussian sensor noise, and low-amplitude
// colored-noise bursts standing in for non-intake micro-movements (labeled
// Other). The complementary-noise preset degrades radar during Drinking and
// blinds the non-dominant wrist while routing a share of eating gestures to
// it, so neither modality alone can see everything.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/rng.hpp"
#include "mmgf/segments.hpp"
#include "mmgf/session_io.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

enum class Hand { Left, Right };

inline const char* hand_name(Hand h) {
  return h == Hand::Left ? "left" : "right";
}

constexpr const char* kEatingStyles[] = {"fork_knife", "spoon", "chopsticks",
                                         "hand"};

struct ModalityDegradation {
  // SNR multipliers indexed by ClassId; 1.0 means undegraded.
  std::array<double, 3> radar_snr{1.0, 1.0, 1.0};
  std::array<double, 3> imu_snr{1.0, 1.0, 1.0};
};

struct SynthConfig {
  uint64_t seed = 0;
  double duration_s = 40.0;
  double frame_rate = kDefaultFrameRate;

  // Gesture schedule. Rates are events per minute; durations in seconds are
  // drawn lognormal with the given mean/stddev, clamped to the given range.
  // Eating pacing follows observed meal statistics; the drinking rate is
  // raised well above real-meal pacing so that short sessions still contain
  // enough drinking instances for both classes to be learnable.
  double eat_rate_per_min = 3.4;
  double drink_rate_per_min = 2.4;
  double eat_duration_mean_s = 3.07;
  double eat_duration_std_s = 1.42;
  double eat_duration_min_s = 1.00;
  double eat_duration_max_s = 17.08;
  double drink_duration_mean_s = 5.32;
  double drink_duration_std_s = 2.42;
  double drink_duration_min_s = 2.36;
  double drink_duration_max_s = 24.56;
  double min_gap_s = 0.6;

  // Rendering scales.
  double imu_gesture_amplitude = 2.0;
  double imu_noise_std = 0.15;
  double radar_gesture_amplitude = 2.5;
  double radar_noise_std = 0.25;
  double clutter_amplitude = 1.0;
  double other_activity_rate_per_min = 1.5;
  double other_activity_amplitude = 0.5;

  // Sensor geometry.
  int n_range = 32;
  int n_doppler = 64;
  double max_range_m = 1.28;
  double max_speed_mps = 1.28;

  // Subject metadata and hand routing.
  std::string eating_style = "fork_knife";
  Hand dominant_hand = Hand::Right;
  double offhand_eating_fraction = 0.0;
  bool zero_offhand_imu = false;
  bool one_hand_mode = false;  // emit only the dominant wrist (6 channels)

  ModalityDegradation degradation;
};

// Radar sees Drinking poorly, the off wrist is dead, and a share of eating
// gestures happens on that dead wrist: each modality misses something the
// other sees, which is the regime fusion is for. Drinking stays weakly
// visible to radar rather than invisible — a zero-information stream would
// make cross-modal feature reconstruction of that class ill-posed instead
// of merely hard, and the off-wrist dropout already covers the
// "one modality fully blind" case for eating.
inline void apply_complementary_preset(SynthConfig& cfg) {
  cfg.offhand_eating_fraction = 0.4;
  cfg.zero_offhand_imu = true;
  cfg.degradation.radar_snr[static_cast<int>(ClassId::Drinking)] = 0.35;
}

namespace synth_detail {

struct Scheduled {
  double start_s = 0.0;
  double dur_s = 0.0;
  ClassId cls = ClassId::Eating;
  Hand hand = Hand::Right;
  double amp_jitter = 1.0;
  double range_far = 0.55;
  double range_near = 0.32;
};

inline double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Raise-hold-lower envelope; drinking holds longer at the top.
inline double gesture_envelope(double u, ClassId cls) {
  const double ramp = cls == ClassId::Drinking ? 0.2 : 0.3;
  if (u < ramp) return smoothstep(u / ramp);
  if (u > 1.0 - ramp) return smoothstep((1.0 - u) / ramp);
  return 1.0;
}

inline double edge_bump(double u, double center, double width) {
  const double x = (u - center) / width;
  return std::exp(-0.5 * x * x);
}

// Normalized range trajectory: 0 = far position, 1 = at the mouth.
inline double range_progress(double u, ClassId cls) {
  if (cls == ClassId::Drinking) {
    if (u < 0.25) return smoothstep(u / 0.25);
    if (u > 0.75) return smoothstep((1.0 - u) / 0.25);
    return 1.0;
  }
  return u < 0.5 ? smoothstep(u / 0.5) : smoothstep((1.0 - u) / 0.5);
}

inline std::vector<Scheduled> draw_schedule(const SynthConfig& cfg, Rng& rng,
                                            std::vector<std::string>* warnings) {
  std::vector<Scheduled> out;
  const double total_rate = (cfg.eat_rate_per_min + cfg.drink_rate_per_min) / 60.0;
  if (total_rate <= 0.0) return out;
  const double p_eat = cfg.eat_rate_per_min / 60.0 / total_rate;
  double t = cfg.min_gap_s + rng.exponential(total_rate);
  while (true) {
    Scheduled g;
    g.cls = rng.uniform() < p_eat ? ClassId::Eating : ClassId::Drinking;
    const bool eat = g.cls == ClassId::Eating;
    g.dur_s = rng.lognormal_matched(
        eat ? cfg.eat_duration_mean_s : cfg.drink_duration_mean_s,
        eat ? cfg.eat_duration_std_s : cfg.drink_duration_std_s);
    g.dur_s = std::clamp(g.dur_s,
                         eat ? cfg.eat_duration_min_s : cfg.drink_duration_min_s,
                         eat ? cfg.eat_duration_max_s : cfg.drink_duration_max_s);
    g.hand = cfg.dominant_hand;
    if (eat && rng.uniform() < cfg.offhand_eating_fraction)
      g.hand = cfg.dominant_hand == Hand::Right ? Hand::Left : Hand::Right;
    g.amp_jitter = rng.uniform(0.85, 1.15);
    g.range_far = 0.55 + rng.uniform(-0.05, 0.05);
    g.range_near = 0.32 + rng.uniform(-0.03, 0.03);
    g.start_s = t;
    if (t + g.dur_s >= cfg.duration_s - cfg.min_gap_s) break;
    out.push_back(g);
    t += g.dur_s + cfg.min_gap_s + rng.exponential(total_rate);
  }
  if (out.empty() && warnings)
    warnings->push_back("synthgen: no gesture fits in " +
                        std::to_string(cfg.duration_s) + " s at the requested rates");
  return out;
}

inline void render_imu(const SynthConfig& cfg,
                       const std::vector<Scheduled>& schedule, Rng& rng,
                       Tensor<float>& imu) {
  const int n = imu.dim(1);
  const double fps = cfg.frame_rate;
  const int dominant_base = cfg.dominant_hand == Hand::Left ? 0 : 6;

  double style_amp = 1.0;
  if (cfg.eating_style == "spoon") style_amp = 0.9;
  if (cfg.eating_style == "chopsticks") style_amp = 0.8;
  if (cfg.eating_style == "hand") style_amp = 1.1;

  for (const auto& g : schedule) {
    const int hand_base = cfg.one_hand_mode
                              ? (g.hand == cfg.dominant_hand ? 0 : -1)
                              : (g.hand == Hand::Left ? 0 : 6);
    if (hand_base < 0) continue;  // off-wrist gesture with no off-wrist sensor
    const double snr =
        cfg.degradation.imu_snr[static_cast<size_t>(g.cls)] * g.amp_jitter;
    const double amp = cfg.imu_gesture_amplitude * style_amp * snr;
    const int t0 = std::max(0, static_cast<int>(std::floor(g.start_s * fps)));
    const int t1 = std::min(n, static_cast<int>(std::ceil((g.start_s + g.dur_s) * fps)));
    const double ramp = g.cls == ClassId::Drinking ? 0.2 : 0.3;
    for (int t = t0; t < t1; ++t) {
      const double u = (t / fps - g.start_s) / g.dur_s;
      const double e = gesture_envelope(u, g.cls);
      imu(hand_base + 2, t) += static_cast<float>(amp * e);                   // acc z: lift
      imu(hand_base + 0, t) += static_cast<float>(0.4 * amp * std::sin(3.14159265358979 * u));
      const double gy = edge_bump(u, ramp * 0.5, ramp * 0.4) -
                        edge_bump(u, 1.0 - ramp * 0.5, ramp * 0.4);
      imu(hand_base + 4, t) += static_cast<float>(0.9 * amp * gy);            // gyr y: pitch
      if (g.cls == ClassId::Drinking && u > 0.2 && u < 0.8)
        imu(hand_base + 3, t) += static_cast<float>(
            0.5 * amp * std::sin(3.14159265358979 * (u - 0.2) / 0.6));        // gyr x: tilt
    }
  }

  // Non-intake micro-movements: short AR(1) bursts on a random wrist,
  // Hann-windowed, well below gesture amplitude. Labels stay Other.
  const double burst_rate = cfg.other_activity_rate_per_min / 60.0;
  if (burst_rate > 0.0) {
    double t = rng.exponential(burst_rate);
    while (t < cfg.duration_s) {
      const double dur = rng.uniform(1.0, 3.0);
      const int base = cfg.one_hand_mode ? 0 : (rng.uniform() < 0.5 ? 0 : 6);
      const int ch_a = base + rng.uniform_int(6);
      const int ch_b = base + rng.uniform_int(6);
      const int t0 = std::max(0, static_cast<int>(std::floor(t * fps)));
      const int t1 = std::min(n, static_cast<int>(std::ceil((t + dur) * fps)));
      double ar = 0.0;
      for (int f = t0; f < t1; ++f) {
        ar = 0.9 * ar + 0.435 * rng.normal();  // unit stationary variance
        const double u = (f - t0) / std::max(1.0, double(t1 - t0 - 1));
        const double w = 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979 * u);
        const float v = static_cast<float>(cfg.other_activity_amplitude * w * ar);
        imu(ch_a, f) += v;
        if (ch_b != ch_a) imu(ch_b, f) += 0.6f * v;
      }
      t += dur + rng.exponential(burst_rate);
    }
  }

  for (size_t i = 0; i < imu.size(); ++i)
    imu.data()[i] += static_cast<float>(cfg.imu_noise_std * rng.normal());

  if (cfg.zero_offhand_imu && !cfg.one_hand_mode) {
    const int off_base = dominant_base == 0 ? 6 : 0;
    for (int c = off_base; c < off_base + 6; ++c)
      for (int t = 0; t < n; ++t) imu(c, t) = 0.0f;
  }
}

inline void add_blob(Tensor<float>& cube, double range_bin, double doppler_bin,
                     double amp, int t) {
  const int R = cube.dim(0), D = cube.dim(1);
  const double sr = 1.3, sd = 1.8;
  const int r0 = std::max(0, static_cast<int>(range_bin - 3 * sr));
  const int r1 = std::min(R - 1, static_cast<int>(range_bin + 3 * sr));
  const int d0 = std::max(0, static_cast<int>(doppler_bin - 3 * sd));
  const int d1 = std::min(D - 1, static_cast<int>(doppler_bin + 3 * sd));
  for (int r = r0; r <= r1; ++r) {
    const double dr = (r - range_bin) / sr;
    for (int d = d0; d <= d1; ++d) {
      const double dd = (d - doppler_bin) / sd;
      cube(r, d, t) += static_cast<float>(amp * std::exp(-0.5 * (dr * dr + dd * dd)));
    }
  }
}

inline void render_radar(const SynthConfig& cfg,
                         const std::vector<Scheduled>& schedule, Rng& rng,
                         Tensor<float>& cube) {
  const int R = cube.dim(0), D = cube.dim(1), n = cube.dim(2);
  const double fps = cfg.frame_rate;
  const double zero_doppler = D / 2.0;

  // Static clutter: a zero-Doppler ridge with per-range-bin amplitude plus a
  // faint speckle field, both constant over time so mean subtraction removes
  // them exactly.
  std::vector<double> ridge(static_cast<size_t>(R));
  for (auto& a : ridge) a = cfg.clutter_amplitude * rng.uniform(0.4, 1.0);
  std::vector<float> speckle(static_cast<size_t>(R) * static_cast<size_t>(D));
  for (auto& s : speckle)
    s = static_cast<float>(0.15 * cfg.clutter_amplitude * std::abs(rng.normal()));
  for (int r = 0; r < R; ++r)
    for (int d = 0; d < D; ++d) {
      const double dd = (d - zero_doppler) / 1.5;
      const float v = static_cast<float>(ridge[static_cast<size_t>(r)] *
                                         std::exp(-0.5 * dd * dd)) +
                      speckle[static_cast<size_t>(r * D + d)];
      if (v == 0.0f) continue;
      for (int t = 0; t < n; ++t) cube(r, d, t) += v;
    }

  for (const auto& g : schedule) {
    const double snr =
        cfg.degradation.radar_snr[static_cast<size_t>(g.cls)] * g.amp_jitter;
    const double amp = cfg.radar_gesture_amplitude * snr;
    const int t0 = std::max(0, static_cast<int>(std::floor(g.start_s * fps)));
    const int t1 = std::min(n, static_cast<int>(std::ceil((g.start_s + g.dur_s) * fps)));
    for (int t = t0; t < t1; ++t) {
      const double u = (t / fps - g.start_s) / g.dur_s;
      const double prog = range_progress(u, g.cls);
      const double range_m = g.range_far - (g.range_far - g.range_near) * prog;
      // Approach (range shrinking) shows positive Doppler, retreat negative.
      const double dt = 1.0 / fps;
      const double prog_next = range_progress(std::min(1.0, u + dt / g.dur_s), g.cls);
      double speed = (prog_next - prog) / dt * (g.range_far - g.range_near);
      speed = std::clamp(speed, -0.4, 0.4);
      const double range_bin = range_m / cfg.max_range_m * R;
      const double doppler_bin =
          (speed + cfg.max_speed_mps) / (2.0 * cfg.max_speed_mps) * D;
      const double env = 0.35 + 0.65 * std::sin(3.14159265358979 * std::clamp(u, 0.0, 1.0));
      add_blob(cube, range_bin, doppler_bin, amp * env, t);
    }
  }

  // Micro-movement bursts: a flickering low blob at a random cell.
  const double burst_rate = cfg.other_activity_rate_per_min / 60.0;
  if (burst_rate > 0.0) {
    double t = rng.exponential(burst_rate);
    while (t < cfg.duration_s) {
      const double dur = rng.uniform(1.0, 3.0);
      const double rb = rng.uniform(0.3, 0.9) * R;
      const double db = zero_doppler + rng.uniform(-3.0, 3.0);
      const int t0 = std::max(0, static_cast<int>(std::floor(t * fps)));
      const int t1 = std::min(n, static_cast<int>(std::ceil((t + dur) * fps)));
      double ar = 0.0;
      for (int f = t0; f < t1; ++f) {
        ar = 0.9 * ar + 0.435 * rng.normal();
        add_blob(cube, rb, db,
                 cfg.other_activity_amplitude * cfg.radar_gesture_amplitude *
                     0.25 * std::abs(ar),
                 f);
      }
      t += dur + rng.exponential(burst_rate);
    }
  }

  // Sensor noise; the cube is a magnitude map, so clip at zero.
  for (size_t i = 0; i < cube.size(); ++i) {
    float& v = cube.data()[i];
    v = std::max(0.0f, v + static_cast<float>(cfg.radar_noise_std * rng.normal()));
  }
}

}  // namespace synth_detail

inline MealSession generate_session(const SynthConfig& cfg,
                                    const std::string& session_id,
                                    std::vector<std::string>* warnings = nullptr) {
  if (cfg.duration_s <= 0.0)
    throw ValidationError("synthgen: duration_s must be positive");
  if (cfg.eat_rate_per_min < 0.0 || cfg.drink_rate_per_min < 0.0)
    throw ValidationError("synthgen: negative gesture rate");
  const int n = static_cast<int>(std::lround(cfg.duration_s * cfg.frame_rate));
  if (n < 1) throw ValidationError("synthgen: duration shorter than one frame");

  Rng rng(derive_seed(cfg.seed, "synth_session"));
  const auto schedule = synth_detail::draw_schedule(cfg, rng, warnings);

  MealSession s;
  s.session_id = session_id;
  s.labels.frame_rate = cfg.frame_rate;
  s.labels.labels.assign(static_cast<size_t>(n), ClassId::Other);
  for (const auto& g : schedule) {
    const int t0 = std::max(0, static_cast<int>(std::floor(g.start_s * cfg.frame_rate)));
    const int t1 = std::min(
        n, static_cast<int>(std::ceil((g.start_s + g.dur_s) * cfg.frame_rate)));
    for (int t = t0; t < t1; ++t)
      s.labels.labels[static_cast<size_t>(t)] = g.cls;
  }

  ImuSequence imu;
  imu.data = Tensor<float>({cfg.one_hand_mode ? 6 : 12, n});
  imu.sample_rate = cfg.frame_rate;
  imu.channel_layout = cfg.one_hand_mode
                           ? ImuSequence::one_hand_layout(hand_name(cfg.dominant_hand))
                           : ImuSequence::two_hand_layout();
  synth_detail::render_imu(cfg, schedule, rng, imu.data);
  s.imu = std::move(imu);

  RdtCube cube;
  cube.data = Tensor<float>({cfg.n_range, cfg.n_doppler, n});
  cube.frame_rate = cfg.frame_rate;
  synth_detail::render_radar(cfg, schedule, rng, cube.data);
  s.radar = std::move(cube);

  s.meta["participant"] = "p_synth";
  s.meta["eating_style"] = cfg.eating_style;
  s.meta["dominant_hand"] = hand_name(cfg.dominant_hand);
  s.validate();
  return s;
}

// Writes n_sessions session directories plus a manifest under out_dir.
// Session i gets its own seed derived from the master seed, and metadata
// cycles through eating styles and alternates dominant hands.
inline std::vector<std::filesystem::path> generate_dataset(
    const SynthConfig& cfg_template, int n_sessions, uint64_t master_seed,
    const std::filesystem::path& out_dir,
    std::vector<std::string>* warnings = nullptr) {
  if (n_sessions < 1)
    throw ValidationError("synthgen: n_sessions must be >= 1");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> dirs;
  std::ofstream manifest(out_dir / "dataset_manifest.txt");
  if (!manifest)
    throw RuntimeFailure((out_dir / "dataset_manifest.txt").string() +
                         ": cannot open for writing");
  manifest << "master_seed=" << master_seed << "\n";
  manifest << "n_sessions=" << n_sessions << "\n";
  for (int i = 0; i < n_sessions; ++i) {
    SynthConfig cfg = cfg_template;
    cfg.seed = derive_seed(master_seed, "session", static_cast<uint64_t>(i));
    cfg.eating_style = kEatingStyles[i % 4];
    cfg.dominant_hand = (i % 3 == 2) ? Hand::Left : Hand::Right;
    char name[32];
    std::snprintf(name, sizeof(name), "session_%03d", i);
    auto session = generate_session(cfg, name, warnings);
    session.meta["participant"] = "p" + std::to_string(i);
    const auto dir = out_dir / name;
    save_session(session, dir);
    dirs.push_back(dir);
    manifest << name << ",style=" << cfg.eating_style
             << ",hand=" << hand_name(cfg.dominant_hand)
             << ",seed=" << cfg.seed << "\n";
  }
  if (!manifest) throw RuntimeFailure("dataset manifest: write failed");
  return dirs;
}

}  // namespace mmgf
