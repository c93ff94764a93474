#pragma once

// Metrics: sample-wise Cohen's kappa, interval IoU, greedy segment matching
// with per-class segmental F1 at multiple IoU thresholds, error breakdowns
// by eating style, and a paired Wilcoxon signed-rank test.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmgf/segments.hpp"
#include "mmgf/types.hpp"

namespace mmgf {

// ===== Config =====

struct EvalConfig {
  std::vector<double> thresholds{0.1, 0.5};

  void validate() const {
    if (thresholds.empty())
      throw ValidationError("EvalConfig: need at least one IoU threshold");
    for (double k : thresholds)
      if (!(k > 0.0) || k > 1.0)
        throw ValidationError("EvalConfig: thresholds must lie in (0, 1]");
  }
};

// ===== Sample-wise agreement =====

// Chance-corrected agreement over the 3-class confusion matrix. Expected
// agreement can only reach 1 for two identical constant sequences, which
// count as perfect agreement.
inline double cohen_kappa(const LabelSequence& y_true, const LabelSequence& y_pred) {
  const size_t n = y_true.labels.size();
  if (n == 0) throw ValidationError("cohen_kappa: empty sequences");
  if (n != y_pred.labels.size())
    throw ValidationError("cohen_kappa: length mismatch " + std::to_string(n) +
                          " vs " + std::to_string(y_pred.labels.size()));
  double conf[kNumClasses][kNumClasses] = {};
  for (size_t i = 0; i < n; ++i)
    conf[static_cast<int>(y_true.labels[i])][static_cast<int>(y_pred.labels[i])] += 1.0;

  double po = 0.0, pe = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    po += conf[c][c];
    double row = 0.0, col = 0.0;
    for (int j = 0; j < kNumClasses; ++j) {
      row += conf[c][j];
      col += conf[j][c];
    }
    pe += (row / n) * (col / n);
  }
  po /= n;
  if (pe >= 1.0 - 1e-15) return po >= 1.0 - 1e-15 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

// ===== Segment-level matching =====

// Intersection over union of two half-open frame intervals; pure geometry,
// classes are not consulted.
inline double iou(const GestureSegment& a, const GestureSegment& b) {
  if (a.length() <= 0 || b.length() <= 0)
    throw ValidationError("iou: degenerate segment");
  const int inter = std::max(0, std::min(a.end_frame, b.end_frame) -
                                    std::max(a.start_frame, b.start_frame));
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct SegmentCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

namespace eval_detail {

inline void check_single_class_sorted(const std::vector<GestureSegment>& segs,
                                      const char* who) {
  for (size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].length() <= 0)
      throw ValidationError(std::string(who) + ": degenerate segment");
    if (segs[i].class_id == ClassId::Other)
      throw ValidationError(std::string(who) + ": Other is not a gesture class");
    if (i > 0) {
      if (segs[i].start_frame < segs[i - 1].start_frame)
        throw ValidationError(std::string(who) + ": segments not sorted by start");
      if (segs[i].class_id != segs[0].class_id)
        throw ValidationError(std::string(who) + ": mixed classes in one list");
    }
  }
}

}  // namespace eval_detail

// One-to-one greedy matching for a single gesture class: walk predictions in
// temporal order, match each to its best-IoU not-yet-consumed ground-truth
// segment if that IoU clears k (earliest ground truth wins IoU ties),
// otherwise count a false positive; leftover ground truth becomes false
// negatives. Both lists must be sorted by start frame and single-class.
inline SegmentCounts match_segments(const std::vector<GestureSegment>& gt,
                                    const std::vector<GestureSegment>& pred,
                                    double k) {
  if (!(k > 0.0) || k > 1.0)
    throw ValidationError("match_segments: k must lie in (0, 1]");
  eval_detail::check_single_class_sorted(gt, "match_segments gt");
  eval_detail::check_single_class_sorted(pred, "match_segments pred");
  if (!gt.empty() && !pred.empty() && gt[0].class_id != pred[0].class_id)
    throw ValidationError("match_segments: gt and pred hold different classes");

  SegmentCounts out;
  std::vector<bool> used(gt.size(), false);
  for (const auto& p : pred) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gt.size(); ++g) {
      if (used[g]) continue;
      const double v = iou(gt[g], p);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= k) {
      used[static_cast<size_t>(best)] = true;
      ++out.tp;
    } else {
      ++out.fp;
    }
  }
  out.fn = static_cast<int>(gt.size()) - out.tp;
  return out;
}

// 2tp / (2tp + fp + fn). No gestures and none predicted counts as perfect.
inline double segmental_f1(const SegmentCounts& c) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) return 1.0;
  return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
}

inline double precision_of(const SegmentCounts& c) {
  if (c.tp + c.fp == 0) return 1.0;
  return static_cast<double>(c.tp) / (c.tp + c.fp);
}

inline double recall_of(const SegmentCounts& c) {
  if (c.tp + c.fn == 0) return 1.0;
  return static_cast<double>(c.tp) / (c.tp + c.fn);
}

// ===== Fold-level evaluation =====

struct SessionPrediction {
  std::string session_id;
  LabelSequence labels;
};

struct ClassThresholdStat {
  ClassId class_id = ClassId::Eating;
  double k = 0.0;
  SegmentCounts counts;  // pooled over the fold's sessions
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PerSessionF1 {
  std::string session_id;
  ClassId class_id = ClassId::Eating;
  double k = 0.0;
  double f1 = 0.0;
};

struct StyleErrors {
  std::string style;
  double k = 0.0;
  int fp = 0;  // pooled over both gesture classes
  int fn = 0;
};

struct FoldReport {
  double kappa = 0.0;  // pooled over every frame of the fold
  std::vector<double> per_session_kappa;
  std::vector<ClassThresholdStat> class_stats;  // classes x thresholds
  std::vector<PerSessionF1> per_session_f1;
  std::vector<StyleErrors> style_errors;  // per threshold, partitioned by style
};

// Pools frames and segment counts over all test sessions of one fold.
// Predictions are matched to ground-truth sessions by position and must agree
// on session_id and length.
inline FoldReport evaluate_fold(const std::vector<MealSession>& gt_sessions,
                                const std::vector<SessionPrediction>& predictions,
                                const EvalConfig& cfg = {}) {
  cfg.validate();
  if (gt_sessions.empty())
    throw ValidationError("evaluate_fold: no sessions");
  if (gt_sessions.size() != predictions.size())
    throw ValidationError("evaluate_fold: " + std::to_string(gt_sessions.size()) +
                          " sessions but " + std::to_string(predictions.size()) +
                          " predictions");

  LabelSequence pooled_true, pooled_pred;
  FoldReport report;

  std::map<std::pair<int, int>, SegmentCounts> pooled;  // (class, k index)
  std::map<std::pair<std::string, int>, SegmentCounts> by_style;  // (style, k index)

  const ClassId gesture_classes[2] = {ClassId::Eating, ClassId::Drinking};

  for (size_t s = 0; s < gt_sessions.size(); ++s) {
    const auto& gt = gt_sessions[s];
    const auto& pred = predictions[s];
    if (gt.session_id != pred.session_id)
      throw ValidationError("evaluate_fold: session order mismatch, '" +
                            gt.session_id + "' vs '" + pred.session_id + "'");
    if (gt.n_frames() != pred.labels.n_frames())
      throw ValidationError("evaluate_fold: '" + gt.session_id + "' has " +
                            std::to_string(gt.n_frames()) + " frames, prediction " +
                            std::to_string(pred.labels.n_frames()));

    pooled_true.labels.insert(pooled_true.labels.end(), gt.labels.labels.begin(),
                              gt.labels.labels.end());
    pooled_pred.labels.insert(pooled_pred.labels.end(), pred.labels.labels.begin(),
                              pred.labels.labels.end());
    report.per_session_kappa.push_back(cohen_kappa(gt.labels, pred.labels));

    const auto gt_segments = labels_to_segments(gt.labels);
    const auto pred_segments = labels_to_segments(pred.labels);
    const std::string style = gt.meta_or("eating_style", "unknown");

    for (const ClassId cls : gesture_classes) {
      std::vector<GestureSegment> gt_c, pred_c;
      for (const auto& g : gt_segments)
        if (g.class_id == cls) gt_c.push_back(g);
      for (const auto& g : pred_segments)
        if (g.class_id == cls) pred_c.push_back(g);
      for (size_t ki = 0; ki < cfg.thresholds.size(); ++ki) {
        const auto counts = match_segments(gt_c, pred_c, cfg.thresholds[ki]);
        auto& pool = pooled[{static_cast<int>(cls), static_cast<int>(ki)}];
        pool.tp += counts.tp;
        pool.fp += counts.fp;
        pool.fn += counts.fn;
        auto& sty = by_style[{style, static_cast<int>(ki)}];
        sty.fp += counts.fp;
        sty.fn += counts.fn;
        report.per_session_f1.push_back(
            {gt.session_id, cls, cfg.thresholds[ki], segmental_f1(counts)});
      }
    }
  }

  report.kappa = cohen_kappa(pooled_true, pooled_pred);
  for (const ClassId cls : gesture_classes) {
    for (size_t ki = 0; ki < cfg.thresholds.size(); ++ki) {
      ClassThresholdStat stat;
      stat.class_id = cls;
      stat.k = cfg.thresholds[ki];
      stat.counts = pooled[{static_cast<int>(cls), static_cast<int>(ki)}];
      stat.precision = precision_of(stat.counts);
      stat.recall = recall_of(stat.counts);
      stat.f1 = segmental_f1(stat.counts);
      report.class_stats.push_back(stat);
    }
  }
  for (const auto& [key, counts] : by_style)
    report.style_errors.push_back(
        {key.first, cfg.thresholds[static_cast<size_t>(key.second)], counts.fp,
         counts.fn});
  return report;
}

// ===== Paired significance test =====

// Two-sided Wilcoxon signed-rank test via the normal approximation with tie
// correction (no continuity correction). Zero differences are dropped; at
// least six nonzero differences are required for the approximation.
inline double wilcoxon_signed_rank(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ValidationError("wilcoxon: length mismatch");
  std::vector<double> diffs;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const size_t n = diffs.size();
  if (n < 6)
    throw ValidationError("wilcoxon: need at least 6 nonzero differences, got " +
                          std::to_string(n));

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });

  std::vector<double> ranks(n, 0.0);
  double tie_term = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]]))
      ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    for (size_t m = i; m <= j; ++m) ranks[order[m]] = avg_rank;
    i = j + 1;
  }

  double w_plus = 0.0;
  for (size_t m = 0; m < n; ++m)
    if (diffs[m] > 0.0) w_plus += ranks[m];

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0)
    throw ValidationError("wilcoxon: zero variance (all differences tied away)");
  const double z = (w_plus - mean) / std::sqrt(var);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// ===== Report serialization =====

inline nlohmann::json to_json(const FoldReport& r) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : r.class_stats)
    stats.push_back({{"class", class_name(s.class_id)},
                     {"k", s.k},
                     {"tp", s.counts.tp},
                     {"fp", s.counts.fp},
                     {"fn", s.counts.fn},
                     {"precision", s.precision},
                     {"recall", s.recall},
                     {"f1", s.f1}});
  nlohmann::json per_session = nlohmann::json::array();
  for (const auto& s : r.per_session_f1)
    per_session.push_back({{"session", s.session_id},
                           {"class", class_name(s.class_id)},
                           {"k", s.k},
                           {"f1", s.f1}});
  nlohmann::json style = nlohmann::json::array();
  for (const auto& s : r.style_errors)
    style.push_back({{"style", s.style}, {"k", s.k}, {"fp", s.fp}, {"fn", s.fn}});
  return {{"kappa", r.kappa},
          {"per_session_kappa", r.per_session_kappa},
          {"class_stats", stats},
          {"per_session_f1", per_session},
          {"style_errors", style}};
}

// One line per class/threshold pair, tagged with fold and availability so
// rows from many folds can share a file.
inline void append_report_csv_rows(std::string& out, int fold,
                                   const std::string& availability,
                                   const FoldReport& r) {
  char line[256];
  for (const auto& s : r.class_stats) {
    std::snprintf(line, sizeof(line), "%d,%s,%s,%.2f,%.6f,%.6f,%.6f,%.6f\n",
                  fold, availability.c_str(), class_name(s.class_id), s.k,
                  s.precision, s.recall, s.f1, r.kappa);
    out += line;
  }
}

inline constexpr const char* kReportCsvHeader =
    "fold,availability,class,k,precision,recall,f1,kappa\n";

inline void write_report_csv(const std::filesystem::path& path,
                             const std::string& rows) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << kReportCsvHeader << rows;
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

inline constexpr const char* kStyleCsvHeader = "fold,availability,style,k,fp,fn\n";

inline void append_style_csv_rows(std::string& out, int fold,
                                  const std::string& availability,
                                  const FoldReport& r) {
  char line[192];
  for (const auto& s : r.style_errors) {
    std::snprintf(line, sizeof(line), "%d,%s,%s,%.2f,%d,%d\n", fold,
                  availability.c_str(), s.style.c_str(), s.k, s.fp, s.fn);
    out += line;
  }
}

inline void write_style_csv(const std::filesystem::path& path,
                            const std::string& rows) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << kStyleCsvHeader << rows;
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

}  // namespace mmgf
