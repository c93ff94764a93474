#pragma once

// Conversions between per-frame labels and gesture segments. A segment is a
// maximal run of consecutive frames sharing a non-Other class, so
// labels -> segments -> paint is the identity on any label sequence.

#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

inline std::vector<GestureSegment> labels_to_segments(
    const LabelSequence& seq) {
  std::vector<GestureSegment> out;
  const int n = seq.n_frames();
  int t = 0;
  while (t < n) {
    const ClassId c = seq.labels[static_cast<size_t>(t)];
    if (c == ClassId::Other) {
      ++t;
      continue;
    }
    int e = t + 1;
    while (e < n && seq.labels[static_cast<size_t>(e)] == c) ++e;
    out.push_back({t, e, c});
    t = e;
  }
  return out;
}

inline LabelSequence paint_segments(const std::vector<GestureSegment>& segments,
                                    int n_frames,
                                    double frame_rate = kDefaultFrameRate) {
  LabelSequence seq;
  seq.frame_rate = frame_rate;
  seq.labels.assign(static_cast<size_t>(n_frames), ClassId::Other);
  for (const auto& s : segments) {
    if (s.start_frame < 0 || s.end_frame > n_frames ||
        s.start_frame >= s.end_frame)
      throw ValidationError("paint_segments: segment [" +
                            std::to_string(s.start_frame) + ", " +
                            std::to_string(s.end_frame) +
                            ") out of range for " + std::to_string(n_frames) +
                            " frames");
    for (int t = s.start_frame; t < s.end_frame; ++t)
      seq.labels[static_cast<size_t>(t)] = s.class_id;
  }
  return seq;
}

}  // namespace mmgf
