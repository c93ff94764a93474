#pragma once

// Independent oracle for segment matching: maximum one-to-one matching via
// augmenting paths, plus generators for random within-list-disjoint segment
// instances. Shared by the unit and acceptance suites.

#include <vector>

#include "mmgf/evaluation.hpp"
#include "mmgf/rng.hpp"
#include "mmgf/types.hpp"

namespace mmgf_test {

// ===== Maximum-cardinality matching oracle =====

namespace oracle_detail {

inline bool try_augment(int p, const std::vector<std::vector<int>>& adj,
                        std::vector<bool>& visited, std::vector<int>& match_gt) {
  for (int g : adj[static_cast<size_t>(p)]) {
    if (visited[static_cast<size_t>(g)]) continue;
    visited[static_cast<size_t>(g)] = true;
    if (match_gt[static_cast<size_t>(g)] < 0 ||
        try_augment(match_gt[static_cast<size_t>(g)], adj, visited, match_gt)) {
      match_gt[static_cast<size_t>(g)] = p;
      return true;
    }
  }
  return false;
}

}  // namespace oracle_detail

// Exhaustive maximum one-to-one matching between predictions and ground
// truth, where a pair is admissible when classes agree and IoU >= k.
// Independent of the greedy matcher under test.
inline int max_matching_tp(const std::vector<mmgf::GestureSegment>& gt,
                           const std::vector<mmgf::GestureSegment>& pred,
                           double k) {
  std::vector<std::vector<int>> adj(pred.size());
  for (size_t p = 0; p < pred.size(); ++p)
    for (size_t g = 0; g < gt.size(); ++g)
      if (pred[p].class_id == gt[g].class_id &&
          mmgf::iou(gt[g], pred[p]) >= k)
        adj[p].push_back(static_cast<int>(g));

  std::vector<int> match_gt(gt.size(), -1);
  int matched = 0;
  for (size_t p = 0; p < pred.size(); ++p) {
    std::vector<bool> visited(gt.size(), false);
    if (oracle_detail::try_augment(static_cast<int>(p), adj, visited, match_gt))
      ++matched;
  }
  return matched;
}

// ===== Instance generators =====

// Random sorted, pairwise-disjoint segments of one class — the shape
// labels_to_segments always produces (maximal runs cannot overlap).
inline std::vector<mmgf::GestureSegment> random_disjoint_segments(
    mmgf::Rng& rng, int max_segments, mmgf::ClassId cls) {
  const int n = rng.uniform_int(max_segments + 1);  // 0..max_segments
  std::vector<mmgf::GestureSegment> out;
  int cursor = rng.uniform_int(10);
  for (int i = 0; i < n; ++i) {
    const int gap = 1 + rng.uniform_int(12);
    const int len = 1 + rng.uniform_int(15);
    mmgf::GestureSegment s;
    s.start_frame = cursor + gap;
    s.end_frame = s.start_frame + len;
    s.class_id = cls;
    out.push_back(s);
    cursor = s.end_frame;
  }
  return out;
}

// Detection-style predictions derived from a ground-truth list: per-segment
// boundary jitter bounded below the inter-segment gap (so each jittered
// prediction overlaps only its source), occasional drops, splits of one
// segment into two, merges bridging two neighbours, and spurious detections
// in empty space. Output stays sorted and pairwise disjoint.
inline std::vector<mmgf::GestureSegment> detection_style_predictions(
    mmgf::Rng& rng, const std::vector<mmgf::GestureSegment>& gt) {
  std::vector<mmgf::GestureSegment> out;
  const auto jitter = [&](int bound) {
    if (bound <= 0) return 0;
    return rng.uniform_int(2 * bound + 1) - bound;  // [-bound, bound]
  };

  size_t i = 0;
  while (i < gt.size()) {
    const auto& g = gt[i];
    const int prev_end = out.empty() ? 0 : out.back().end_frame;
    const int lead_gap = g.start_frame - prev_end;
    const double roll = rng.uniform();

    if (roll < 0.12) {  // drop: missed detection
      ++i;
      continue;
    }
    if (roll < 0.24 && g.length() >= 4) {  // split into two inside the span
      const int cut = g.start_frame + 1 + rng.uniform_int(g.length() - 2);
      mmgf::GestureSegment a = g, b = g;
      a.end_frame = cut;
      b.start_frame = std::min(cut + rng.uniform_int(2), g.end_frame - 1);
      out.push_back(a);
      if (b.length() > 0) out.push_back(b);
      ++i;
      continue;
    }
    if (roll < 0.34 && i + 1 < gt.size()) {  // merge with the next segment
      mmgf::GestureSegment m = g;
      m.end_frame = gt[i + 1].end_frame;
      out.push_back(m);
      i += 2;
      continue;
    }
    // jitter: keep each boundary shift strictly below the adjacent gap so
    // the prediction cannot reach a neighbouring ground-truth segment
    const int next_gap =
        i + 1 < gt.size() ? gt[i + 1].start_frame - g.end_frame : 8;
    const int max_shift =
        std::max(0, std::min({g.length() / 3, lead_gap - 1, next_gap - 1}));
    mmgf::GestureSegment p = g;
    p.start_frame = g.start_frame + jitter(max_shift);
    p.end_frame = g.end_frame + jitter(std::max(0, std::min(g.length() / 3,
                                                            next_gap - 1)));
    if (p.end_frame <= p.start_frame) p.end_frame = p.start_frame + 1;
    if (p.start_frame < prev_end) p.start_frame = prev_end;
    if (p.end_frame <= p.start_frame) {
      ++i;
      continue;
    }
    out.push_back(p);
    ++i;
  }

  // spurious detection in the space after everything else
  if (rng.uniform() < 0.25) {
    mmgf::GestureSegment sp;
    sp.start_frame = (out.empty() ? 4 : out.back().end_frame) + 2 +
                     rng.uniform_int(8);
    sp.end_frame = sp.start_frame + 1 + rng.uniform_int(6);
    sp.class_id = gt.empty() ? mmgf::ClassId::Eating : gt[0].class_id;
    out.push_back(sp);
  }
  for (auto& s : out)
    if (!gt.empty()) s.class_id = gt[0].class_id;
  return out;
}

}  // namespace mmgf_test
