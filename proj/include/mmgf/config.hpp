#pragma once

// Experiment configuration: plain key=value files with named profiles and
// command-line overrides. Unknown keys are rejected by name so typos surface
// immediately instead of silently running defaults.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/model.hpp"
#include "mmgf/session_io.hpp"
#include "mmgf/synthgen.hpp"
#include "mmgf/trainer.hpp"

namespace mmgf {

// ===== Model profiles =====

// Compact model sized for minute-scale CPU runs: same 64-wide fused core as
// the full profile, fewer stages and blocks.
inline ModelConfig smoke_model_config() {
  ModelConfig m;
  m.imu_channels = 12;
  m.imu_tcn = {2, 3, 64, {1, 2}, false};
  m.radar.stages = {{2, 3, 4, 4}, {4, 3, 4, 4}};
  m.radar.tcn = {2, 3, 64, {1, 2}, false};
  m.cma = {8, 8, 64};
  m.fusion = FusionMethod::Cma;
  return m;
}

// Desk-scale model: deep enough to separate the synthetic classes, small
// enough to train a full cross-validation on one CPU core inside an hour.
inline ModelConfig desk_model_config() {
  ModelConfig m;
  m.imu_channels = 12;
  m.imu_tcn = {3, 3, 64, {1, 2, 4}, false};
  m.radar.stages = {{2, 3, 4, 4}, {4, 3, 4, 4}, {8, 3, 2, 2}, {16, 3, 1, 1}};
  m.radar.tcn = {3, 3, 64, {1, 2, 4}, false};
  m.cma = {8, 8, 64};
  m.fusion = FusionMethod::Cma;
  return m;
}

// ===== Experiment configuration =====

struct ExperimentConfig {
  std::string profile = "desk";

  // dataset generation
  int n_sessions = 52;
  double duration_s = 40.0;
  bool complementary = true;

  // cross-validation and training
  int n_folds = 2;
  int epochs_unimodal = 30;
  int epochs_fusion = 30;
  double lr = 5e-4;
  int batch_size = 4;
  int window_frames = 1000;
  uint64_t seed = 1;
  bool end_to_end = false;

  ModelConfig model = desk_model_config();

  SynthConfig synth() const {
    SynthConfig s;
    s.duration_s = duration_s;
    if (complementary) apply_complementary_preset(s);
    return s;
  }

  TrainConfig train(int epochs) const {
    TrainConfig t;
    t.lr = lr;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.window.window_frames = window_frames;
    t.window.stride_frames = 0;  // non-overlapping
    t.seed = seed;
    t.end_to_end = end_to_end;
    return t;
  }

  void validate() const {
    if (n_sessions < 1)
      throw ValidationError("config: n_sessions must be >= 1");
    if (duration_s <= 0) throw ValidationError("config: duration_s must be > 0");
    if (n_folds < 2) throw ValidationError("config: n_folds must be >= 2");
    if (epochs_unimodal < 1 || epochs_fusion < 1)
      throw ValidationError("config: epochs must be >= 1");
    if (!(lr > 0)) throw ValidationError("config: lr must be > 0");
    if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
    if (window_frames < 1)
      throw ValidationError("config: window_frames must be >= 1");
    model.validate();
  }
};

namespace config_detail {

inline int to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key + "': not an integer: '" + v +
                          "'");
  }
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key + "': not a number: '" + v +
                          "'");
  }
}

inline uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key +
                          "': not an unsigned integer: '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ValidationError("config: key '" + key + "': expected 0/1/true/false, got '" +
                        v + "'");
}

}  // namespace config_detail

inline void apply_profile(ExperimentConfig& cfg, const std::string& name) {
  if (name == "desk") {
    cfg = ExperimentConfig{};  // desk is the baseline
  } else if (name == "smoke") {
    cfg = ExperimentConfig{};
    cfg.n_sessions = 6;
    cfg.n_folds = 2;
    cfg.epochs_unimodal = 3;
    cfg.epochs_fusion = 3;
    cfg.model = smoke_model_config();
  } else {
    throw ValidationError("config: unknown profile '" + name +
                          "' (expected desk or smoke)");
  }
  cfg.profile = name;
}

// Applies one key=value assignment. The profile key resets the whole config,
// so callers apply it before everything else.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  using namespace config_detail;
  if (key == "profile") apply_profile(cfg, value);
  else if (key == "n_sessions") cfg.n_sessions = to_int(key, value);
  else if (key == "duration_s") cfg.duration_s = to_double(key, value);
  else if (key == "complementary") cfg.complementary = to_bool(key, value);
  else if (key == "n_folds") cfg.n_folds = to_int(key, value);
  else if (key == "epochs_unimodal") cfg.epochs_unimodal = to_int(key, value);
  else if (key == "epochs_fusion") cfg.epochs_fusion = to_int(key, value);
  else if (key == "lr") cfg.lr = to_double(key, value);
  else if (key == "batch_size") cfg.batch_size = to_int(key, value);
  else if (key == "window_frames") cfg.window_frames = to_int(key, value);
  else if (key == "seed") cfg.seed = to_u64(key, value);
  else if (key == "end_to_end") cfg.end_to_end = to_bool(key, value);
  else
    throw ValidationError("config: unknown key '" + key + "'");
}

// Loads a config file (optional) and applies key=value overrides on top.
// A profile named anywhere resets to that profile's baseline first; all
// other keys then apply in order, overrides last.
inline ExperimentConfig load_experiment_config(
    const std::filesystem::path& path,
    const std::vector<std::string>& overrides = {}) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  if (!path.empty()) kv = read_kv_lines(path);

  const auto split = [](const std::string& s) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: override '" + s + "': expected key=value");
    return std::pair<std::string, std::string>(s.substr(0, eq),
                                               s.substr(eq + 1));
  };

  // profile first, wherever it appears
  if (kv.count("profile")) apply_profile(cfg, kv.at("profile"));
  for (const auto& o : overrides) {
    const auto [k, v] = split(o);
    if (k == "profile") apply_profile(cfg, v);
  }
  for (const auto& [k, v] : kv)
    if (k != "profile") apply_config_key(cfg, k, v);
  for (const auto& o : overrides) {
    const auto [k, v] = split(o);
    if (k != "profile") apply_config_key(cfg, k, v);
  }
  cfg.validate();
  return cfg;
}

// Canonical echo of every effective setting; reloading the echo reproduces
// the run.
inline void write_config_echo(const std::filesystem::path& path,
                              const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure(path.string() + ": cannot open for writing");
  char buf[64];
  out << "profile=" << cfg.profile << "\n";
  out << "n_sessions=" << cfg.n_sessions << "\n";
  std::snprintf(buf, sizeof(buf), "%.9g", cfg.duration_s);
  out << "duration_s=" << buf << "\n";
  out << "complementary=" << (cfg.complementary ? 1 : 0) << "\n";
  out << "n_folds=" << cfg.n_folds << "\n";
  out << "epochs_unimodal=" << cfg.epochs_unimodal << "\n";
  out << "epochs_fusion=" << cfg.epochs_fusion << "\n";
  std::snprintf(buf, sizeof(buf), "%.9g", cfg.lr);
  out << "lr=" << buf << "\n";
  out << "batch_size=" << cfg.batch_size << "\n";
  out << "window_frames=" << cfg.window_frames << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "end_to_end=" << (cfg.end_to_end ? 1 : 0) << "\n";
  if (!out) throw RuntimeFailure(path.string() + ": write failed");
}

}  // namespace mmgf
