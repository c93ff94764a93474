// ===== Segment-level scoring walkthrough =====
//
// Shows how frame labels become gesture segments and how the segment metrics
// respond to typical detector mistakes: boundary jitter, a dropped gesture,
// an hallucinated one, and over-segmentation. Runs instantly with no files.

#include <cstdio>

#include "mmgf/evaluation.hpp"
#include "mmgf/segments.hpp"

using namespace mmgf;

namespace {

LabelSequence paint(std::initializer_list<GestureSegment> segs, int n) {
  return paint_segments(std::vector<GestureSegment>(segs), n);
}

GestureSegment seg(int start, int end, ClassId cls) {
  GestureSegment g;
  g.start_frame = start;
  g.end_frame = end;
  g.class_id = cls;
  return g;
}

void score(const char* what, const LabelSequence& truth,
           const LabelSequence& pred) {
  std::printf("--- %s ---\n", what);
  std::printf("frame agreement (chance-corrected): %.3f\n",
              cohen_kappa(truth, pred));

  const auto gt_segs = labels_to_segments(truth);
  const auto pr_segs = labels_to_segments(pred);
  for (const ClassId cls : {ClassId::Eating, ClassId::Drinking}) {
    std::vector<GestureSegment> g, p;
    for (const auto& s : gt_segs)
      if (s.class_id == cls) g.push_back(s);
    for (const auto& s : pr_segs)
      if (s.class_id == cls) p.push_back(s);
    for (const double k : {0.1, 0.5}) {
      const SegmentCounts c = match_segments(g, p, k);
      std::printf("%-8s k=%.1f  tp=%d fp=%d fn=%d  f1=%.3f\n",
                  class_name(cls), k, c.tp, c.fp, c.fn, segmental_f1(c));
    }
  }
}

}  // namespace

int main() {
  const int n = 400;
  const auto truth = paint({seg(40, 90, ClassId::Eating),
                            seg(150, 200, ClassId::Eating),
                            seg(260, 300, ClassId::Drinking)},
                           n);

  // near-perfect detector: small boundary jitter only
  score("slight jitter",
        truth,
        paint({seg(43, 94, ClassId::Eating), seg(148, 196, ClassId::Eating),
               seg(262, 303, ClassId::Drinking)},
              n));

  // one gesture missed, one invented
  score("drop + hallucination",
        truth,
        paint({seg(41, 89, ClassId::Eating), seg(330, 360, ClassId::Drinking),
               seg(262, 299, ClassId::Drinking)},
              n));

  // over-segmentation: one gesture split in two; only the better-overlapping
  // half can match, the other half counts against precision
  score("over-segmentation",
        truth,
        paint({seg(40, 60, ClassId::Eating), seg(65, 90, ClassId::Eating),
               seg(150, 200, ClassId::Eating), seg(260, 300, ClassId::Drinking)},
              n));
  return 0;
}
