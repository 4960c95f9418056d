#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "afrg/dataset.hpp"
#include "afrg/errors.hpp"
#include "afrg/experiments.hpp"
#include "afrg/metrics.hpp"
#include "afrg/report.hpp"
#include "afrg/selftest.hpp"
#include "afrg/simloop.hpp"

namespace fs = std::filesystem;
using namespace afrg;

namespace {

Config load_config(const std::string& path) {
  return path.empty() ? Config() : Config::from_file(path);
}

int cmd_synth_data(const std::string& config_path, std::uint64_t seed, const std::string& out,
                   double duration) {
  Config cfg = load_config(config_path);
  DatasetSpec spec = dataset_spec_from_config(cfg);
  spec.seed = seed;
  if (duration > 0) spec.total_duration = duration;
  const auto recordings = generate_dataset(cfg, spec, out);
  std::cout << "wrote " << recordings.size() << " recordings (" << spec.total_duration
            << " s total) to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, std::uint64_t seed, const std::string& data,
              const std::string& out, const std::string& history_path) {
  Config cfg = load_config(config_path);
  std::cout << "loading dataset from " << data << "...\n";
  const TrainingDataset ds = load_dataset(cfg, data);
  std::cout << "  " << ds.items.size() << " windows\n";

  TrainSettings settings;
  settings.epochs = cfg.get_int("train.epochs", settings.epochs);
  settings.batch_size = cfg.get_int("train.batch_size", settings.batch_size);
  settings.learning_rate = cfg.get_double("train.learning_rate", settings.learning_rate);
  settings.weight_decay = cfg.get_double("train.weight_decay", settings.weight_decay);
  settings.scheduler_factor = cfg.get_double("train.scheduler_factor", settings.scheduler_factor);
  settings.scheduler_patience = cfg.get_int("train.scheduler_patience", settings.scheduler_patience);
  settings.validation_fraction =
      cfg.get_double("train.validation_fraction", settings.validation_fraction);

  std::vector<EpochStats> history;
  PsdRegNet model = train(ds, settings, seed, &history);
  for (const auto& e : history)
    std::cout << "epoch " << e.epoch << ": train " << e.train_loss << "  val " << e.val_loss
              << "  lr " << e.lr << "\n";
  save_checkpoint(model, out);
  if (!history_path.empty()) write_history_csv(history, history_path);
  std::cout << "checkpoint written to " << out << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& feedback,
            const std::string& scenario, const std::string& profile, double target,
            double duration, int trials, bool wear, bool no_noise,
            const std::string& model_path, const std::string& out) {
  Config cfg = load_config(config_path);
  SessionConfig session = session_from_config(cfg);
  session.feedback = feedback_from_string(feedback);
  session.scenario = scenario_from_string(scenario);
  session.profile = profile_from_string(profile);
  session.force_target = target;
  if (duration > 0) session.trial_duration = duration;
  session.trials = trials;
  session.trial_positions.clear();
  session.wear = wear;
  session.noise = !no_noise;
  session.seed = seed;

  PsdRegNet model;
  PsdRegNet* model_ptr = nullptr;
  if (!model_path.empty()) {
    model = load_checkpoint(model_path);
    model_ptr = &model;
  } else if (session.feedback == FeedbackSource::afrg) {
    throw ConfigError("run: feedback afrg requires --model <checkpoint>");
  }

  PeakTracker* tracker_ptr = nullptr;
  std::optional<PeakTracker> tracker;
  if (session.feedback == FeedbackSource::baseline) {
    std::cout << "calibrating the peak-frequency baseline on clean audio...\n";
    const PeakCalibration cal = calibrate_baseline(cfg, seed);
    std::cout << "  force = " << cal.slope << " * f + " << cal.intercept << "  (residual "
              << cal.fit_residual << " N)\n";
    tracker.emplace(cal, encoder_config_from_config(cfg));
    tracker_ptr = &*tracker;
  }

  GrindingSession sim(cfg, session, model_ptr, tracker_ptr);
  const ExperimentLog log = sim.run();
  write_log(log, out);
  std::cout << "wrote " << log.records.size() << " control steps to " << out << "\n";
  for (const auto& trial : log.trials)
    std::cout << "  trial " << trial.index + 1 << ": depth " << trial.depth * 1000
              << " mm, mean F_n " << trial.mean_force << " N\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& log_path,
             const std::string& kind, const std::string& out) {
  Config cfg = load_config(config_path);
  const ExperimentLog log = read_log(log_path);
  std::vector<std::pair<std::string, double>> rows;

  if (kind == "estimation") {
    const auto pairs = estimation_pairs(log);
    const EstimationMetrics m = eval_estimation(pairs);
    rows = {{"pairs", static_cast<double>(m.count)},
            {"rmse_n", m.rmse},
            {"residual_mean_n", m.residual_mean},
            {"residual_std_n", m.residual_std},
            {"outliers_3sigma", static_cast<double>(m.outliers)}};
  } else if (kind == "control") {
    const ControlMetrics m = eval_control(log);
    rows = {{"target_n", m.target},
            {"rise_time_s", m.rise_time},
            {"overshoot_pct", m.overshoot_pct},
            {"sse_n", m.sse},
            {"steady_std_n", m.steady_std}};
  } else if (kind == "mrr") {
    const MrrMetrics m = eval_mrr(log, workpiece_from_config(cfg));
    for (size_t i = 0; i < m.trial_depths.size(); ++i) {
      rows.emplace_back("trial" + std::to_string(i + 1) + "_depth_m", m.trial_depths[i]);
      rows.emplace_back("trial" + std::to_string(i + 1) + "_mrr_m3s", m.trial_mrr[i]);
    }
    rows.emplace_back("depth_max_m", m.depth_max);
    rows.emplace_back("depth_min_m", m.depth_min);
    rows.emplace_back("depth_range_m", m.depth_range);
    if (!std::isnan(m.line_linearity_residual))
      rows.emplace_back("line_linearity_residual", m.line_linearity_residual);
  } else {
    throw ConfigError("eval: unknown kind " + kind + " (estimation|control|mrr)");
  }

  for (const auto& [name, value] : rows) std::cout << name << " = " << value << "\n";
  if (!out.empty()) {
    write_metrics_csv(out, rows);
    std::cout << "metrics written to " << out << "\n";
  }
  return 0;
}

int cmd_report(const std::string& config_path, const std::string& log_path,
               const std::string& out_dir) {
  Config cfg = load_config(config_path);
  const ExperimentLog log = read_log(log_path);
  write_report(log, cfg, out_dir);
  std::cout << "report written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic-feedback robotic grinding: simulation, training, experiments"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out, model_path, history_path, log_path, kind;
  std::string feedback = "ft", scenario = "fixed_point", profile = "intermittent";
  std::uint64_t seed = 0;
  double duration = 0.0, target = 3.0;
  int trials = 1;
  bool wear = false, no_noise = false;

  auto* synth = app.add_subcommand("synth-data", "generate the synthetic training dataset");
  synth->add_option("--config", config_path, "flat key/value config file");
  synth->add_option("--seed", seed, "master seed");
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--duration", duration, "total seconds of audio (default 280)");

  auto* train_cmd = app.add_subcommand("train", "train the force estimator on a dataset");
  train_cmd->add_option("--config", config_path, "flat key/value config file");
  train_cmd->add_option("--seed", seed, "training seed");
  train_cmd->add_option("--data", data_dir, "dataset directory")->required();
  train_cmd->add_option("--out", out, "checkpoint path")->required();
  train_cmd->add_option("--history", history_path, "training history CSV");

  auto* run_cmd = app.add_subcommand("run", "closed-loop grinding run");
  run_cmd->add_option("--config", config_path, "flat key/value config file");
  run_cmd->add_option("--seed", seed, "session seed");
  run_cmd->add_option("--feedback", feedback, "ft | afrg | baseline");
  run_cmd->add_option("--scenario", scenario, "fixed_point | straight_line");
  run_cmd->add_option("--profile", profile, "intermittent | continuous");
  run_cmd->add_option("--target", target, "force target, N");
  run_cmd->add_option("--duration", duration, "engaged seconds per trial");
  run_cmd->add_option("--trials", trials, "number of consecutive trials");
  run_cmd->add_flag("--wear", wear, "enable disc wear");
  run_cmd->add_flag("--no-noise", no_noise, "disable ambient noise");
  run_cmd->add_option("--model", model_path, "estimator checkpoint (required for afrg)");
  run_cmd->add_option("--out", out, "log path (JSON Lines)")->required();

  auto* eval_cmd = app.add_subcommand("eval", "compute metrics from a run log");
  eval_cmd->add_option("--config", config_path, "flat key/value config file");
  eval_cmd->add_option("--log", log_path, "run log")->required();
  eval_cmd->add_option("--kind", kind, "estimation | control | mrr")->required();
  eval_cmd->add_option("--out", out, "metrics CSV path");

  auto* report_cmd = app.add_subcommand("report", "render plots and a summary from a run log");
  report_cmd->add_option("--config", config_path, "flat key/value config file");
  report_cmd->add_option("--log", log_path, "run log")->required();
  report_cmd->add_option("--out", out, "output directory")->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "run the oracle/gradient/shape suites");
  selftest_cmd->add_option("--config", config_path, "unused; accepted for uniformity");
  selftest_cmd->add_option("--seed", seed, "unused; accepted for uniformity");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth_data(config_path, seed, out, duration);
    if (train_cmd->parsed()) return cmd_train(config_path, seed, data_dir, out, history_path);
    if (run_cmd->parsed())
      return cmd_run(config_path, seed, feedback, scenario, profile, target, duration, trials,
                     wear, no_noise, model_path, out);
    if (eval_cmd->parsed()) return cmd_eval(config_path, log_path, kind, out);
    if (report_cmd->parsed()) return cmd_report(config_path, log_path, out);
    if (selftest_cmd->parsed()) return run_selftest(std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
