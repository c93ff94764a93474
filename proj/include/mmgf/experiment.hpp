#pragma once

// Cross-validated experiment orchestration: generate or load a dataset,
// train per fold (unimodal branches, then adaptation + fusion), predict the
// fold's test sessions under five availability conditions, and consolidate
// metrics, significance tests, and plot files under one output directory.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mmgf/checkpoint.hpp"
#include "mmgf/config.hpp"
#include "mmgf/evaluation.hpp"
#include "mmgf/inference.hpp"
#include "mmgf/svg_plot.hpp"
#include "mmgf/trainer.hpp"

namespace mmgf {

// ===== Conditions =====

// The five evaluation conditions: each unimodal branch on its own stream,
// the fused model with both streams, and the fused model with one stream
// absent for the whole session (routed through the adaptation encoders).
enum class Condition {
  UniImu,
  UniRadar,
  Fusion,
  FusionMissingImu,
  FusionMissingRadar,
};

inline constexpr std::array<Condition, 5> kAllConditions = {
    Condition::UniImu, Condition::UniRadar, Condition::Fusion,
    Condition::FusionMissingImu, Condition::FusionMissingRadar};

inline const char* condition_name(Condition c) {
  switch (c) {
    case Condition::UniImu: return "uni_imu";
    case Condition::UniRadar: return "uni_radar";
    case Condition::Fusion: return "fusion";
    case Condition::FusionMissingImu: return "fusion_missing_imu";
    case Condition::FusionMissingRadar: return "fusion_missing_radar";
  }
  return "?";
}

// ===== Result types =====

struct FoldConditionReport {
  int fold = 0;
  Condition condition = Condition::Fusion;
  FoldReport report;
};

struct SummaryRow {
  std::string condition;
  ClassId class_id = ClassId::Eating;
  double k = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
  double kappa_mean = 0.0;
  double kappa_std = 0.0;
};

struct ExperimentResult {
  FoldPlan plan;
  std::vector<FoldConditionReport> reports;  // folds x conditions
  std::vector<SummaryRow> table;             // conditions x classes x k
  double wall_seconds = 0.0;
  std::filesystem::path out_dir;

  const FoldReport& report(int fold, Condition c) const {
    for (const auto& r : reports)
      if (r.fold == fold && r.condition == c) return r.report;
    throw ValidationError("experiment: no report for fold " +
                          std::to_string(fold));
  }

  const SummaryRow& row(const std::string& condition, ClassId cls,
                        double k) const {
    for (const auto& r : table)
      if (r.condition == condition && r.class_id == cls && r.k == k) return r;
    throw ValidationError("experiment: no summary row for " + condition);
  }
};

namespace exp_detail {

inline std::vector<std::string> list_session_ids(
    const std::filesystem::path& dataset_dir) {
  if (!std::filesystem::is_directory(dataset_dir))
    throw ValidationError(dataset_dir.string() + ": not a dataset directory");
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dataset_dir))
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "meta.txt"))
      ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty())
    throw ValidationError(dataset_dir.string() +
                          ": no session directories found");
  return ids;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline void log_line(std::ostream* log, const std::string& line) {
  if (log) *log << line << "\n" << std::flush;
}

inline double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure(path.string() + ": cannot open for writing");
  out << body;
  if (!out) throw RuntimeFailure(path.string() + ": write failed");
}

// Ground-truth copy without the sensor streams: evaluation needs only
// labels and metadata, and the streams dominate memory.
inline MealSession strip_streams(const MealSession& s) {
  MealSession g;
  g.session_id = s.session_id;
  g.labels = s.labels;
  g.meta = s.meta;
  return g;
}

}  // namespace exp_detail

// ===== Per-fold training =====

// Trains all three phases on one fold's training sessions, or reuses the
// fold checkpoint when permitted. Returns true when the checkpoint was
// reused.
template <class S>
bool train_fold(FullModel<S>& model, const std::filesystem::path& dataset_dir,
                const std::vector<std::string>& train_ids,
                const std::filesystem::path& fold_dir,
                const ExperimentConfig& cfg, bool resume,
                std::ostream* log = nullptr) {
  using exp_detail::log_line;
  const auto ckpt_dir = fold_dir / "checkpoint";
  std::vector<Parameter<S>*> params;
  model.imu.collect_params(params);
  model.radar.collect_params(params);
  model.fusion.collect_params(params);

  if (std::filesystem::exists(ckpt_dir / "manifest.json")) {
    if (!resume)
      throw ValidationError(
          "experiment: checkpoint already exists at " + ckpt_dir.string() +
          "; enable resume to reuse it or remove the directory");
    load_checkpoint(ckpt_dir, params);
    log_line(log, "  reusing checkpoint " + ckpt_dir.string());
    return true;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<MealSession> train_sessions;
  train_sessions.reserve(train_ids.size());
  for (const auto& id : train_ids)
    train_sessions.push_back(prepare_session(load_session(dataset_dir / id)));
  const auto windows = build_training_windows<S>(
      train_sessions, cfg.train(1).window, /*need_imu=*/true,
      /*need_radar=*/true);
  train_sessions.clear();
  log_line(log, "  " + std::to_string(windows.size()) + " training windows (" +
                    std::to_string(exp_detail::seconds_since(t0)) + " s load)");

  nlohmann::json history;
  {
    const auto t = std::chrono::steady_clock::now();
    const auto h =
        train_unimodal(model, Modality::Imu, windows, cfg.train(cfg.epochs_unimodal));
    history["imu"] = to_json(h);
    log_line(log, "  imu branch trained: loss " +
                      std::to_string(h.initial.loss) + " -> " +
                      std::to_string(h.epochs.back().loss) + " (" +
                      std::to_string(exp_detail::seconds_since(t)) + " s)");
  }
  {
    const auto t = std::chrono::steady_clock::now();
    const auto h = train_unimodal(model, Modality::Radar, windows,
                                  cfg.train(cfg.epochs_unimodal));
    history["radar"] = to_json(h);
    log_line(log, "  radar branch trained: loss " +
                      std::to_string(h.initial.loss) + " -> " +
                      std::to_string(h.epochs.back().loss) + " (" +
                      std::to_string(exp_detail::seconds_since(t)) + " s)");
  }
  {
    const auto t = std::chrono::steady_clock::now();
    const auto h = train_fusion(model, windows, cfg.train(cfg.epochs_fusion));
    history["fusion"] = to_json(h);
    log_line(log, "  fusion head trained: total " +
                      std::to_string(h.initial.total) + " -> " +
                      std::to_string(h.epochs.back().total) + " (" +
                      std::to_string(exp_detail::seconds_since(t)) + " s)");
  }
  exp_detail::write_text(fold_dir / "training_history.json", history.dump(2));

  nlohmann::json extra;
  extra["epochs_unimodal"] = cfg.epochs_unimodal;
  extra["epochs_fusion"] = cfg.epochs_fusion;
  extra["seed"] = cfg.seed;
  save_checkpoint(ckpt_dir, "full", to_json(model.config), params, extra);
  return false;
}

// ===== Experiment driver =====

template <class S>
ExperimentResult run_experiment(const std::filesystem::path& dataset_dir,
                                const std::filesystem::path& out_dir,
                                const ExperimentConfig& cfg,
                                bool resume = false,
                                std::ostream* log = nullptr) {
  using exp_detail::log_line;
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const auto ids = exp_detail::list_session_ids(dataset_dir);
  ExperimentResult result;
  result.out_dir = out_dir;
  result.plan = make_folds(ids, cfg.n_folds, cfg.seed);
  std::filesystem::create_directories(out_dir);
  write_config_echo(out_dir / "config_echo.txt", cfg);

  std::string report_rows, style_rows, per_session_rows;
  // per-session F1 pooled across folds, for significance and box plots:
  // (condition, class, k) -> session id -> f1
  std::map<std::tuple<std::string, int, double>, std::map<std::string, double>>
      session_f1;

  for (int f = 0; f < result.plan.n_folds(); ++f) {
    const auto& fold = result.plan.folds[static_cast<size_t>(f)];
    const auto fold_dir = out_dir / ("fold_" + std::to_string(f));
    std::filesystem::create_directories(fold_dir);
    log_line(log, "[fold " + std::to_string(f) + "] " +
                      std::to_string(fold.train_ids.size()) + " train / " +
                      std::to_string(fold.test_ids.size()) + " test sessions");

    FullModel<S> model(cfg.model);
    model.init(derive_seed(cfg.seed, "fold_model", static_cast<uint64_t>(f)));
    train_fold(model, dataset_dir, fold.train_ids, fold_dir, cfg, resume, log);

    // predict every test session under all five conditions
    const auto t_pred = std::chrono::steady_clock::now();
    std::vector<MealSession> gt;
    std::map<Condition, std::vector<SessionPrediction>> preds;
    const WindowSpec spec = cfg.train(1).window;
    for (const auto& id : fold.test_ids) {
      const MealSession session = prepare_session(load_session(dataset_dir / id));
      gt.push_back(exp_detail::strip_streams(session));
      preds[Condition::UniImu].push_back(
          {id, predict_session_unimodal(model, session, Modality::Imu, spec).labels});
      preds[Condition::UniRadar].push_back(
          {id,
           predict_session_unimodal(model, session, Modality::Radar, spec).labels});
      preds[Condition::Fusion].push_back(
          {id, predict_session(model, session, Availability::Both, spec).labels});
      preds[Condition::FusionMissingImu].push_back(
          {id,
           predict_session(model, session, Availability::RadarOnly, spec).labels});
      preds[Condition::FusionMissingRadar].push_back(
          {id,
           predict_session(model, session, Availability::ImuOnly, spec).labels});
    }
    log_line(log, "  predicted " + std::to_string(fold.test_ids.size()) +
                      " sessions x 5 conditions (" +
                      std::to_string(exp_detail::seconds_since(t_pred)) + " s)");

    for (const Condition c : kAllConditions) {
      const auto rep = evaluate_fold(gt, preds[c]);
      const std::string cname = condition_name(c);
      exp_detail::write_text(fold_dir / ("report_" + cname + ".json"),
                             to_json(rep).dump(2));
      append_report_csv_rows(report_rows, f, cname, rep);
      append_style_csv_rows(style_rows, f, cname, rep);
      for (const auto& e : rep.per_session_f1) {
        char line[256];
        std::snprintf(line, sizeof(line), "%d,%s,%s,%s,%.2f,%.6f\n", f,
                      cname.c_str(), e.session_id.c_str(),
                      class_name(e.class_id), e.k, e.f1);
        per_session_rows += line;
        session_f1[{cname, static_cast<int>(e.class_id), e.k}][e.session_id] =
            e.f1;
      }
      result.reports.push_back({f, c, rep});
      log_line(log, "  " + cname + ": kappa " + std::to_string(rep.kappa));
    }
  }

  // ----- consolidated outputs -----
  write_report_csv(out_dir / "report.csv", report_rows);
  write_style_csv(out_dir / "style_errors.csv", style_rows);
  exp_detail::write_text(out_dir / "per_session_f1.csv",
                         std::string("fold,condition,session,class,k,f1\n") +
                             per_session_rows);

  const EvalConfig eval_cfg;
  std::string table_csv = "condition,class,k,f1_mean,f1_std,kappa_mean,kappa_std\n";
  for (const Condition c : kAllConditions) {
    const std::string cname = condition_name(c);
    std::vector<double> kappas;
    for (int f = 0; f < result.plan.n_folds(); ++f)
      kappas.push_back(result.report(f, c).kappa);
    for (const ClassId cls : {ClassId::Eating, ClassId::Drinking}) {
      for (const double k : eval_cfg.thresholds) {
        std::vector<double> f1s;
        for (int f = 0; f < result.plan.n_folds(); ++f)
          for (const auto& st : result.report(f, c).class_stats)
            if (st.class_id == cls && st.k == k) f1s.push_back(st.f1);
        SummaryRow row;
        row.condition = cname;
        row.class_id = cls;
        row.k = k;
        row.f1_mean = exp_detail::mean_of(f1s);
        row.f1_std = exp_detail::std_of(f1s);
        row.kappa_mean = exp_detail::mean_of(kappas);
        row.kappa_std = exp_detail::std_of(kappas);
        result.table.push_back(row);
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%s,%.2f,%.6f,%.6f,%.6f,%.6f\n",
                      cname.c_str(), class_name(cls), k, row.f1_mean,
                      row.f1_std, row.kappa_mean, row.kappa_std);
        table_csv += line;
      }
    }
  }
  exp_detail::write_text(out_dir / "conditions_table.csv", table_csv);

  // paired significance: fusion variants against their unimodal baselines,
  // paired per session on F1 (pooled over folds; every session is tested in
  // exactly one fold)
  {
    const std::pair<const char*, const char*> pairs[] = {
        {"fusion", "uni_imu"},
        {"fusion", "uni_radar"},
        {"fusion_missing_imu", "uni_radar"},
        {"fusion_missing_radar", "uni_imu"},
    };
    std::string sig = "condition_a,condition_b,class,k,n_pairs,p_value\n";
    for (const auto& [ca, cb] : pairs) {
      for (const ClassId cls : {ClassId::Eating, ClassId::Drinking}) {
        for (const double k : eval_cfg.thresholds) {
          const auto& fa = session_f1[{ca, static_cast<int>(cls), k}];
          const auto& fb = session_f1[{cb, static_cast<int>(cls), k}];
          std::vector<double> a, b;
          for (const auto& [sid, v] : fa) {
            const auto it = fb.find(sid);
            if (it != fb.end()) {
              a.push_back(v);
              b.push_back(it->second);
            }
          }
          std::string p = "NA";
          try {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6g", wilcoxon_signed_rank(a, b));
            p = buf;
          } catch (const ValidationError&) {
            // fewer than six nonzero paired differences: no test
          }
          char line[192];
          std::snprintf(line, sizeof(line), "%s,%s,%s,%.2f,%zu,%s\n", ca, cb,
                        class_name(cls), k, a.size(), p.c_str());
          sig += line;
        }
      }
    }
    exp_detail::write_text(out_dir / "significance.csv", sig);
  }

  // plot data + rendered figures at the strict threshold
  {
    const double k_plot = 0.5;
    std::string bars_csv = "condition,class,f1_mean\n";
    std::vector<BarGroup> groups;
    for (const Condition c : kAllConditions) {
      const std::string cname = condition_name(c);
      BarGroup g;
      g.label = cname;
      for (const ClassId cls : {ClassId::Eating, ClassId::Drinking}) {
        const auto& row = result.row(cname, cls, k_plot);
        g.values.push_back(row.f1_mean);
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%s,%.6f\n", cname.c_str(),
                      class_name(cls), row.f1_mean);
        bars_csv += line;
      }
      groups.push_back(g);
    }
    exp_detail::write_text(out_dir / "plot_f1_bars.csv", bars_csv);
    write_bar_svg(out_dir / "plot_f1_bars.svg",
                  "Segmental F1 at IoU 0.5 by condition",
                  {"eating", "drinking"}, groups);

    std::string box_csv = "condition,session,class,f1\n";
    std::vector<std::string> labels;
    std::vector<std::vector<double>> samples;
    for (const Condition c : kAllConditions) {
      const std::string cname = condition_name(c);
      std::vector<double> pooled;
      for (const ClassId cls : {ClassId::Eating, ClassId::Drinking})
        for (const auto& [sid, v] :
             session_f1[{cname, static_cast<int>(cls), k_plot}]) {
          pooled.push_back(v);
          char line[192];
          std::snprintf(line, sizeof(line), "%s,%s,%s,%.6f\n", cname.c_str(),
                        sid.c_str(), class_name(cls), v);
          box_csv += line;
        }
      labels.push_back(cname);
      samples.push_back(pooled);
    }
    exp_detail::write_text(out_dir / "plot_f1_box.csv", box_csv);
    write_box_svg(out_dir / "plot_f1_box.svg",
                  "Per-session segmental F1 at IoU 0.5", labels, samples);
  }

  result.wall_seconds = exp_detail::seconds_since(t_start);
  nlohmann::json summary;
  summary["dataset_dir"] = dataset_dir.string();
  summary["dataset_hash"] = hash_directory(dataset_dir);
  summary["n_sessions"] = ids.size();
  summary["wall_seconds"] = result.wall_seconds;
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& fold : result.plan.folds)
    folds.push_back({{"train", fold.train_ids.size()},
                     {"test", fold.test_ids}});
  summary["folds"] = folds;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : result.table)
    table.push_back({{"condition", r.condition},
                     {"class", class_name(r.class_id)},
                     {"k", r.k},
                     {"f1_mean", r.f1_mean},
                     {"f1_std", r.f1_std},
                     {"kappa_mean", r.kappa_mean},
                     {"kappa_std", r.kappa_std}});
  summary["table"] = table;
  exp_detail::write_text(out_dir / "experiment_summary.json", summary.dump(2));
  log_line(log, "experiment complete in " +
                    std::to_string(result.wall_seconds) + " s; outputs in " +
                    out_dir.string());
  return result;
}

}  // namespace mmgf
