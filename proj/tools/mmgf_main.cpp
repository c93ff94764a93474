// ===== mmgf: multimodal intake-gesture toolkit CLI =====
//
// Subcommands cover the full desk-scale workflow: dataset synthesis,
// preprocessing, branch and fusion training, prediction, evaluation, and the
// consolidated cross-validated experiment. Exit codes: 0 success, 1 input or
// config problem, 2 runtime failure. MMGF_DETERMINISTIC=1 switches freshly
// created models to double precision; commands that consume a checkpoint
// follow the checkpoint's stored precision.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmgf/checkpoint.hpp"
#include "mmgf/config.hpp"
#include "mmgf/evaluation.hpp"
#include "mmgf/experiment.hpp"
#include "mmgf/inference.hpp"
#include "mmgf/session_io.hpp"
#include "mmgf/synthgen.hpp"
#include "mmgf/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mmgf;

bool deterministic_mode() {
  const char* env = std::getenv("MMGF_DETERMINISTIC");
  return env != nullptr && std::string(env) == "1";
}

// Shared config plumbing: --config file, then profile, then sugar flags,
// then --set key=value overrides, last one wins.
struct ConfigFlags {
  std::string config_path;
  std::string profile;
  std::vector<std::string> sets;
  int sessions = -1;
  int folds = -1;
  long long seed = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--profile", profile, "config profile: desk or smoke");
    cmd->add_option("--set", sets, "override, e.g. --set lr=0.001")
        ->take_all();
    cmd->add_option("--sessions", sessions, "number of sessions");
    cmd->add_option("--folds", folds, "number of cross-validation folds");
    cmd->add_option("--seed", seed, "master seed (overrides config)");
  }

  ExperimentConfig load() const {
    std::vector<std::string> overrides;
    if (!profile.empty()) overrides.push_back("profile=" + profile);
    if (sessions >= 0) overrides.push_back("n_sessions=" + std::to_string(sessions));
    if (folds >= 0) overrides.push_back("n_folds=" + std::to_string(folds));
    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
    overrides.insert(overrides.end(), sets.begin(), sets.end());
    return load_experiment_config(config_path, overrides);
  }
};

// ----- synth -----

int cmd_synth(const ConfigFlags& flags, const std::string& out_dir) {
  const ExperimentConfig cfg = flags.load();
  std::vector<std::string> warnings;
  const auto dirs = generate_dataset(cfg.synth(), cfg.n_sessions, cfg.seed,
                                     out_dir, &warnings);
  write_config_echo(fs::path(out_dir) / "config_echo.txt", cfg);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("wrote %zu sessions to %s\n", dirs.size(), out_dir.c_str());
  std::printf("dataset_hash=%016llx\n",
              static_cast<unsigned long long>(hash_directory(out_dir)));
  return 0;
}

// ----- preprocess -----

int cmd_preprocess(const std::string& session_dir, const std::string& out_dir) {
  std::vector<std::string> warnings;
  const MealSession prepared =
      prepare_session(load_session(session_dir, &warnings));
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  save_session(prepared, out_dir);
  std::printf("prepared %s: %d frames -> %s\n", prepared.session_id.c_str(),
              prepared.n_frames(), out_dir.c_str());
  return 0;
}

// ----- training helpers -----

std::vector<MealSession> load_prepared_dataset(const fs::path& dataset_dir) {
  const auto ids = exp_detail::list_session_ids(dataset_dir);
  std::vector<MealSession> sessions;
  sessions.reserve(ids.size());
  for (const auto& id : ids)
    sessions.push_back(prepare_session(load_session(dataset_dir / id)));
  return sessions;
}

template <class S>
int train_unimodal_impl(const ExperimentConfig& cfg, const fs::path& dataset_dir,
                        const fs::path& out_dir, const std::string& modality) {
  const bool do_imu = modality == "imu" || modality == "both";
  const bool do_radar = modality == "radar" || modality == "both";
  if (!do_imu && !do_radar)
    throw ValidationError("train-unimodal: --modality must be imu, radar, or both");

  const auto sessions = load_prepared_dataset(dataset_dir);
  const auto windows = build_training_windows<S>(sessions, cfg.train(1).window,
                                                 do_imu, do_radar);
  FullModel<S> model(cfg.model);
  model.init(derive_seed(cfg.seed, "model_init"));

  fs::create_directories(out_dir);
  nlohmann::json history;
  if (do_imu) {
    const auto h = train_unimodal(model, Modality::Imu, windows,
                                  cfg.train(cfg.epochs_unimodal));
    history["imu"] = to_json(h);
    std::printf("imu branch: loss %.6f -> %.6f over %d epochs\n",
                h.initial.loss, h.epochs.back().loss, cfg.epochs_unimodal);
  }
  if (do_radar) {
    const auto h = train_unimodal(model, Modality::Radar, windows,
                                  cfg.train(cfg.epochs_unimodal));
    history["radar"] = to_json(h);
    std::printf("radar branch: loss %.6f -> %.6f over %d epochs\n",
                h.initial.loss, h.epochs.back().loss, cfg.epochs_unimodal);
  }
  exp_detail::write_text(out_dir / "training_history.json", history.dump(2));
  write_config_echo(out_dir / "config_echo.txt", cfg);

  std::vector<Parameter<S>*> params;
  model.imu.collect_params(params);
  model.radar.collect_params(params);
  model.fusion.collect_params(params);
  nlohmann::json extra;
  extra["trained"] = modality;
  save_checkpoint(out_dir / "checkpoint", "unimodal", to_json(cfg.model),
                  params, extra);
  std::printf("checkpoint written to %s\n",
              (out_dir / "checkpoint").string().c_str());
  return 0;
}

template <class S>
int train_fusion_impl(const ExperimentConfig& cfg, const fs::path& dataset_dir,
                      const fs::path& ckpt_dir, const fs::path& out_dir) {
  FullModel<S> model(cfg.model);
  model.init(derive_seed(cfg.seed, "model_init"));
  std::vector<Parameter<S>*> params;
  model.imu.collect_params(params);
  model.radar.collect_params(params);
  model.fusion.collect_params(params);
  load_checkpoint(ckpt_dir, params);

  const auto sessions = load_prepared_dataset(dataset_dir);
  const auto windows =
      build_training_windows<S>(sessions, cfg.train(1).window, true, true);
  const auto h = train_fusion(model, windows, cfg.train(cfg.epochs_fusion));
  std::printf("fusion: total %.6f -> %.6f over %d epochs\n", h.initial.total,
              h.epochs.back().total, cfg.epochs_fusion);

  fs::create_directories(out_dir);
  nlohmann::json history;
  history["fusion"] = to_json(h);
  exp_detail::write_text(out_dir / "training_history.json", history.dump(2));
  write_config_echo(out_dir / "config_echo.txt", cfg);
  save_checkpoint(out_dir / "checkpoint", "full", to_json(cfg.model), params);
  std::printf("checkpoint written to %s\n",
              (out_dir / "checkpoint").string().c_str());
  return 0;
}

// Model config comes from the checkpoint manifest so a checkpoint is
// self-describing; precision follows its stored dtype.
template <class S>
int predict_impl(const nlohmann::json& manifest, const fs::path& ckpt_dir,
                 const fs::path& session_dir, const fs::path& out_csv,
                 const std::string& availability, const std::string& unimodal,
                 int window_frames) {
  const ModelConfig mc = model_config_from_json(manifest.at("config"));
  FullModel<S> model(mc);
  std::vector<Parameter<S>*> params;
  model.imu.collect_params(params);
  model.radar.collect_params(params);
  model.fusion.collect_params(params);
  load_checkpoint(ckpt_dir, params);

  const MealSession session = prepare_session(load_session(session_dir));
  WindowSpec spec;
  spec.window_frames = window_frames;

  PredictResult result;
  if (!unimodal.empty()) {
    const Modality m = unimodal == "imu" ? Modality::Imu : Modality::Radar;
    if (unimodal != "imu" && unimodal != "radar")
      throw ValidationError("predict: --unimodal must be imu or radar");
    result = predict_session_unimodal(model, session, m, spec);
  } else {
    result = predict_session(model, session,
                             availability_from_name(availability), spec);
  }
  write_predictions_csv(out_csv, result);
  std::printf("wrote %d frames to %s\n", result.labels.n_frames(),
              out_csv.string().c_str());
  return 0;
}

int cmd_predict(const fs::path& ckpt_dir, const fs::path& session_dir,
                const fs::path& out_csv, const std::string& availability,
                const std::string& unimodal, int window_frames) {
  const auto manifest = load_checkpoint_manifest(ckpt_dir);
  const std::string dtype = manifest.at("dtype").get<std::string>();
  if (dtype == "f64")
    return predict_impl<double>(manifest, ckpt_dir, session_dir, out_csv,
                                availability, unimodal, window_frames);
  return predict_impl<float>(manifest, ckpt_dir, session_dir, out_csv,
                             availability, unimodal, window_frames);
}

// ----- evaluate -----

int cmd_evaluate(const fs::path& dataset_dir, const fs::path& predictions_dir,
                 const fs::path& out_dir, const std::string& availability,
                 int fold) {
  const auto ids = exp_detail::list_session_ids(dataset_dir);
  std::vector<MealSession> gt;
  std::vector<SessionPrediction> preds;
  for (const auto& id : ids) {
    const fs::path csv = predictions_dir / (id + ".csv");
    if (!fs::exists(csv)) continue;
    gt.push_back(exp_detail::strip_streams(load_session(dataset_dir / id)));
    preds.push_back({id, read_predictions_csv(csv).labels});
  }
  if (gt.empty())
    throw ValidationError("evaluate: no <session>.csv files in " +
                          predictions_dir.string() + " match sessions in " +
                          dataset_dir.string());

  const auto rep = evaluate_fold(gt, preds);
  fs::create_directories(out_dir);
  exp_detail::write_text(out_dir / "report.json", to_json(rep).dump(2));
  std::string rows;
  append_report_csv_rows(rows, fold, availability, rep);
  write_report_csv(out_dir / "report.csv", rows);
  std::string style_rows;
  append_style_csv_rows(style_rows, fold, availability, rep);
  write_style_csv(out_dir / "style_errors.csv", style_rows);

  std::printf("sessions evaluated: %zu\n", gt.size());
  std::printf("kappa=%.6f\n", rep.kappa);
  for (const auto& st : rep.class_stats)
    std::printf("%s f1@%.2f=%.6f\n", class_name(st.class_id), st.k, st.f1);
  return 0;
}

// ----- run-experiment / report -----

int cmd_run_experiment(const ConfigFlags& flags, const fs::path& dataset_dir,
                       const fs::path& out_dir, bool resume) {
  const ExperimentConfig cfg = flags.load();
  if (deterministic_mode())
    run_experiment<double>(dataset_dir, out_dir, cfg, resume, &std::cout);
  else
    run_experiment<float>(dataset_dir, out_dir, cfg, resume, &std::cout);
  return 0;
}

int cmd_report(const fs::path& experiment_dir) {
  const fs::path summary_path = experiment_dir / "experiment_summary.json";
  std::ifstream in(summary_path);
  if (!in)
    throw ValidationError("report: " + summary_path.string() +
                          " not found (run-experiment writes it)");
  nlohmann::json summary;
  try {
    in >> summary;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("report: cannot parse " + summary_path.string() +
                          ": " + e.what());
  }
  std::printf("experiment: %s\n", experiment_dir.string().c_str());
  std::printf("dataset: %s (hash %016llx, %d sessions)\n",
              summary.at("dataset_dir").get<std::string>().c_str(),
              static_cast<unsigned long long>(
                  summary.at("dataset_hash").get<uint64_t>()),
              summary.at("n_sessions").get<int>());
  std::printf("wall time: %.1f s\n", summary.at("wall_seconds").get<double>());
  std::printf("%-22s %-9s %-5s %-9s %-9s %s\n", "condition", "class", "k",
              "f1_mean", "f1_std", "kappa");
  for (const auto& row : summary.at("table"))
    std::printf("%-22s %-9s %-5.2f %-9.4f %-9.4f %.4f\n",
                row.at("condition").get<std::string>().c_str(),
                row.at("class").get<std::string>().c_str(),
                row.at("k").get<double>(), row.at("f1_mean").get<double>(),
                row.at("f1_std").get<double>(),
                row.at("kappa_mean").get<double>());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{
      "mmgf: radar+IMU intake-gesture detection — synth, train, fuse, "
      "predict, evaluate"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  ConfigFlags synth_flags;
  std::string synth_out;
  synth_flags.attach(synth);
  synth->add_option("--out", synth_out, "output dataset directory")->required();

  // preprocess
  auto* preprocess =
      app.add_subcommand("preprocess", "resample + clutter-remove one session");
  std::string pre_session, pre_out;
  preprocess->add_option("--session", pre_session, "session directory")
      ->required();
  preprocess->add_option("--out", pre_out, "output session directory")
      ->required();

  // train-unimodal
  auto* train_uni = app.add_subcommand(
      "train-unimodal", "train modality branches on a dataset");
  ConfigFlags train_uni_flags;
  std::string train_uni_dataset, train_uni_out, train_uni_modality = "both";
  train_uni_flags.attach(train_uni);
  train_uni->add_option("--dataset", train_uni_dataset, "dataset directory")
      ->required();
  train_uni->add_option("--out", train_uni_out, "output directory")->required();
  train_uni->add_option("--modality", train_uni_modality, "imu, radar, or both");

  // train-fusion
  auto* train_fus = app.add_subcommand(
      "train-fusion", "train adaptation + fusion on frozen branches");
  ConfigFlags train_fus_flags;
  std::string train_fus_dataset, train_fus_ckpt, train_fus_out;
  train_fus_flags.attach(train_fus);
  train_fus->add_option("--dataset", train_fus_dataset, "dataset directory")
      ->required();
  train_fus->add_option("--checkpoint", train_fus_ckpt,
                        "checkpoint directory from train-unimodal")
      ->required();
  train_fus->add_option("--out", train_fus_out, "output directory")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "predict one session");
  std::string pred_ckpt, pred_session, pred_out, pred_avail = "both",
                                                 pred_unimodal;
  int pred_window = 1000;
  predict->add_option("--checkpoint", pred_ckpt, "checkpoint directory")
      ->required();
  predict->add_option("--session", pred_session, "session directory")
      ->required();
  predict->add_option("--out", pred_out, "output predictions.csv")->required();
  predict->add_option("--availability", pred_avail,
                      "both, imu_only, or radar_only");
  predict->add_option("--unimodal", pred_unimodal,
                      "use one branch predictor: imu or radar");
  predict->add_option("--window", pred_window, "inference window frames");

  // evaluate
  auto* evaluate =
      app.add_subcommand("evaluate", "score predictions against labels");
  std::string eval_dataset, eval_preds, eval_out, eval_avail = "both";
  int eval_fold = 0;
  evaluate->add_option("--dataset", eval_dataset, "dataset directory")
      ->required();
  evaluate
      ->add_option("--predictions", eval_preds,
                   "directory of <session>.csv prediction files")
      ->required();
  evaluate->add_option("--out", eval_out, "output report directory")
      ->required();
  evaluate->add_option("--availability", eval_avail,
                       "label for the report rows");
  evaluate->add_option("--fold", eval_fold, "fold number for the report rows");

  // run-experiment
  auto* runexp = app.add_subcommand(
      "run-experiment", "cross-validated training + 5-condition evaluation");
  ConfigFlags runexp_flags;
  std::string runexp_dataset, runexp_out;
  bool runexp_resume = false;
  runexp_flags.attach(runexp);
  runexp->add_option("--dataset", runexp_dataset, "dataset directory")
      ->required();
  runexp->add_option("--out", runexp_out, "output directory")->required();
  runexp->add_flag("--resume", runexp_resume,
                   "reuse existing fold checkpoints instead of failing");

  // report
  auto* report =
      app.add_subcommand("report", "print the consolidated experiment table");
  std::string report_dir;
  report->add_option("--experiment", report_dir, "experiment output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // flag/usage problems are validation errors
  }

  if (synth->parsed()) return cmd_synth(synth_flags, synth_out);
  if (preprocess->parsed()) return cmd_preprocess(pre_session, pre_out);
  if (train_uni->parsed()) {
    const ExperimentConfig cfg = train_uni_flags.load();
    if (deterministic_mode())
      return train_unimodal_impl<double>(cfg, train_uni_dataset, train_uni_out,
                                         train_uni_modality);
    return train_unimodal_impl<float>(cfg, train_uni_dataset, train_uni_out,
                                      train_uni_modality);
  }
  if (train_fus->parsed()) {
    const ExperimentConfig cfg = train_fus_flags.load();
    const auto manifest = load_checkpoint_manifest(train_fus_ckpt);
    if (manifest.at("dtype").get<std::string>() == "f64")
      return train_fusion_impl<double>(cfg, train_fus_dataset, train_fus_ckpt,
                                       train_fus_out);
    return train_fusion_impl<float>(cfg, train_fus_dataset, train_fus_ckpt,
                                    train_fus_out);
  }
  if (predict->parsed())
    return cmd_predict(pred_ckpt, pred_session, pred_out, pred_avail,
                       pred_unimodal, pred_window);
  if (evaluate->parsed())
    return cmd_evaluate(eval_dataset, eval_preds, eval_out, eval_avail,
                        eval_fold);
  if (runexp->parsed())
    return cmd_run_experiment(runexp_flags, runexp_dataset, runexp_out,
                              runexp_resume);
  if (report->parsed()) return cmd_report(report_dir);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mmgf::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const mmgf::RuntimeFailure& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}
