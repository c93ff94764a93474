#pragma once

// Session directory layout:
//   radar.rdt   MMGF f32 tensor [R, D, N]         (optional)
//   imu.bin     MMGF f32 tensor [C, N]            (optional)
//   labels.csv  start_s,end_s,label; one gesture segment per row
//   meta.txt    key=value lines; needs n_frames and frame_rate
//
// labels.csv stores second-resolution intervals the way annotation tools
// export them, with three decimals. Segment frames map via
// floor(start_s * fps) / ceil(end_s * fps); a small epsilon absorbs the
// decimal round-trip so segment boundaries written by save_session come back
// bit-exact.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/format.hpp"
#include "mmgf/rng.hpp"
#include "mmgf/segments.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

namespace detail {

inline std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

inline int seconds_to_start_frame(double s, double fps) {
  return static_cast<int>(std::floor(s * fps + 1e-6));
}

inline int seconds_to_end_frame(double s, double fps) {
  return static_cast<int>(std::ceil(s * fps - 1e-6));
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline void write_labels_csv(const std::filesystem::path& path,
                             const LabelSequence& labels) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure(path.string() + ": cannot open for writing");
  out << "start_s,end_s,label\n";
  const double fps = labels.frame_rate;
  for (const auto& seg : labels_to_segments(labels)) {
    out << detail::format_seconds(seg.start_frame / fps) << ","
        << detail::format_seconds(seg.end_frame / fps) << ","
        << class_name(seg.class_id) << "\n";
  }
  if (!out) throw RuntimeFailure(path.string() + ": write failed");
}

inline LabelSequence read_labels_csv(const std::filesystem::path& path,
                                     int n_frames, double frame_rate,
                                     std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open");
  LabelSequence seq;
  seq.frame_rate = frame_rate;
  seq.labels.assign(static_cast<size_t>(n_frames), ClassId::Other);

  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path.string() + ": missing header row");
  if (detail::trim(line) != "start_s,end_s,label")
    throw ValidationError(path.string() + ": unexpected header '" + line + "'");

  std::vector<GestureSegment> segments;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    std::istringstream ss(t);
    std::string start_s, end_s, label;
    if (!std::getline(ss, start_s, ',') || !std::getline(ss, end_s, ',') ||
        !std::getline(ss, label))
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            ": expected start_s,end_s,label");
    double s0, s1;
    try {
      s0 = std::stod(start_s);
      s1 = std::stod(end_s);
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            ": non-numeric interval");
    }
    const auto cls = class_from_name(detail::trim(label));
    if (!cls || *cls == ClassId::Other)
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            ": unknown label '" + label + "'");
    if (!(s0 < s1))
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            ": start_s must be < end_s");
    GestureSegment seg;
    seg.start_frame = detail::seconds_to_start_frame(s0, frame_rate);
    seg.end_frame =
        std::min(n_frames, detail::seconds_to_end_frame(s1, frame_rate));
    seg.class_id = *cls;
    if (seg.start_frame < 0 || seg.start_frame >= seg.end_frame)
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            ": interval maps to no frames");
    segments.push_back(seg);
  }

  // Same-class overlap is a corrupt annotation; cross-class overlap happens
  // with real annotation tools and is only surfaced as a warning. Later rows
  // win where classes collide.
  std::sort(segments.begin(), segments.end(),
            [](const GestureSegment& a, const GestureSegment& b) {
              return a.start_frame < b.start_frame;
            });
  for (size_t i = 1; i < segments.size(); ++i) {
    const auto& a = segments[i - 1];
    const auto& b = segments[i];
    if (b.start_frame < a.end_frame) {
      if (a.class_id == b.class_id)
        throw ValidationError(path.string() +
                              ": overlapping segments of class '" +
                              class_name(a.class_id) + "' at frame " +
                              std::to_string(b.start_frame));
      if (warnings)
        warnings->push_back(path.string() + ": cross-class overlap at frame " +
                            std::to_string(b.start_frame));
    }
  }
  for (const auto& seg : segments)
    for (int t = seg.start_frame; t < seg.end_frame; ++t)
      seq.labels[static_cast<size_t>(t)] = seg.class_id;
  return seq;
}

inline void write_meta_txt(const std::filesystem::path& path,
                           const MealSession& session) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure(path.string() + ": cannot open for writing");
  out << "session_id=" << session.session_id << "\n";
  out << "n_frames=" << session.n_frames() << "\n";
  char fps[32];
  std::snprintf(fps, sizeof(fps), "%.6g", session.labels.frame_rate);
  out << "frame_rate=" << fps << "\n";
  for (const auto& [k, v] : session.meta) {
    if (k == "session_id" || k == "n_frames" || k == "frame_rate") continue;
    out << k << "=" << v << "\n";
  }
  if (!out) throw RuntimeFailure(path.string() + ": write failed");
}

inline std::map<std::string, std::string> read_kv_lines(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open");
  std::map<std::string, std::string> kv;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ": line " + std::to_string(row) +
                            ": expected key=value");
    kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }
  return kv;
}

inline void save_session(const MealSession& session,
                         const std::filesystem::path& dir) {
  session.validate();
  std::filesystem::create_directories(dir);
  if (session.radar) write_tensor_file(dir / "radar.rdt", session.radar->data);
  if (session.imu) write_tensor_file(dir / "imu.bin", session.imu->data);
  write_labels_csv(dir / "labels.csv", session.labels);
  write_meta_txt(dir / "meta.txt", session);
}

inline MealSession load_session(const std::filesystem::path& dir,
                                std::vector<std::string>* warnings = nullptr) {
  if (!std::filesystem::is_directory(dir))
    throw ValidationError(dir.string() + ": not a session directory");
  auto meta = read_kv_lines(dir / "meta.txt");
  const auto need = [&](const char* key) -> std::string {
    const auto it = meta.find(key);
    if (it == meta.end())
      throw ValidationError((dir / "meta.txt").string() + ": missing key '" +
                            std::string(key) + "'");
    return it->second;
  };
  MealSession s;
  s.session_id = meta.count("session_id") ? meta["session_id"]
                                          : dir.filename().string();
  int n_frames;
  double frame_rate;
  try {
    n_frames = std::stoi(need("n_frames"));
    frame_rate = std::stod(need("frame_rate"));
  } catch (const std::exception&) {
    throw ValidationError((dir / "meta.txt").string() +
                          ": bad n_frames/frame_rate");
  }
  for (const auto& [k, v] : meta)
    if (k != "session_id" && k != "n_frames" && k != "frame_rate")
      s.meta[k] = v;

  if (std::filesystem::exists(dir / "radar.rdt")) {
    RdtCube cube;
    cube.data = read_tensor_file<float>(dir / "radar.rdt");
    cube.frame_rate = frame_rate;
    s.radar = std::move(cube);
  }
  if (std::filesystem::exists(dir / "imu.bin")) {
    ImuSequence imu;
    imu.data = read_tensor_file<float>(dir / "imu.bin");
    imu.sample_rate = frame_rate;
    imu.channel_layout = imu.data.dim(0) == 12
                             ? ImuSequence::two_hand_layout()
                             : std::vector<std::string>{};
    s.imu = std::move(imu);
  }
  s.labels = read_labels_csv(dir / "labels.csv", n_frames, frame_rate, warnings);
  s.validate();
  return s;
}

// Order-independent content hash of a directory tree: FNV-1a over each
// regular file's relative path and bytes, visited in sorted path order.
inline uint64_t hash_directory(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::vector<std::string> rel;
  rel.reserve(files.size());
  for (const auto& p : files)
    rel.push_back(std::filesystem::relative(p, root).generic_string());
  std::sort(rel.begin(), rel.end());
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& r : rel) {
    h = fnv1a64(r, h);
    h = fnv1a64("\0", 1, h);
    const auto bytes = read_file_bytes(root / r);
    h = fnv1a64(bytes.data(), bytes.size(), h);
  }
  return h;
}

}  // namespace mmgf
