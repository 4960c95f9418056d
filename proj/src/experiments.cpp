#include "afrg/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "afrg/errors.hpp"
#include "afrg/rng.hpp"

namespace afrg {

Config with_material(const Config& cfg, const std::string& material) {
  Config out = cfg;
  out.set("workpiece.material", material);
  return out;
}

EstimationEvalResult run_estimation_eval(const Config& cfg, PsdRegNet& model, std::uint64_t seed,
                                         const std::vector<double>& targets, double duration,
                                         bool noise) {
  EstimationEvalResult result;
  result.targets = targets;
  Rng master(seed ^ 0x657374ULL);
  std::vector<std::pair<double, double>> pooled;

  for (double target : targets) {
    SessionConfig session;
    session.scenario = Scenario::fixed_point;
    session.feedback = FeedbackSource::ft;
    session.profile = ForceProfileMode::intermittent;
    session.force_target = target;
    session.trials = 1;
    session.trial_duration = duration;
    session.noise = noise;
    session.wear = false;
    session.seed = master.next_u64();

    GrindingSession sim(cfg, session, &model, nullptr);
    ExperimentLog log = sim.run();

    const auto pairs = estimation_pairs(log);
    double mean = 0.0;
    for (const auto& [truth, est] : pairs) mean += est;
    result.level_mean_estimates.push_back(pairs.empty() ? std::nan("") : mean / pairs.size());
    pooled.insert(pooled.end(), pairs.begin(), pairs.end());
    result.logs.push_back(std::move(log));
  }
  result.metrics = eval_estimation(pooled);
  return result;
}

ControlExperimentResult run_control_experiment(const Config& cfg, PsdRegNet& model,
                                               std::uint64_t seed, double target,
                                               double duration) {
  SessionConfig session;
  session.scenario = Scenario::straight_line;
  session.feedback = FeedbackSource::afrg;
  session.profile = ForceProfileMode::intermittent;
  session.force_target = target;
  session.trials = 1;
  session.trial_positions = {0.02};  // pass starts near the left edge
  session.trial_duration = duration;
  session.noise = true;
  session.wear = false;
  session.seed = seed ^ 0x636f6eULL;

  GrindingSession sim(cfg, session, &model, nullptr);
  ControlExperimentResult result;
  result.log = sim.run();
  result.metrics = eval_control(result.log, /*steady_after=*/5.0);
  return result;
}

WearExperimentResult run_wear_experiment(const Config& cfg, PsdRegNet& model, int repetitions,
                                         std::uint64_t seed, double target,
                                         double trial_duration) {
  const Config steel = with_material(cfg, "steel");
  WearExperimentResult result;
  Rng master(seed ^ 0x77656172ULL);

  for (int rep = 0; rep < repetitions; ++rep) {
    for (const FeedbackSource feedback : {FeedbackSource::ft, FeedbackSource::afrg}) {
      SessionConfig session;
      session.scenario = Scenario::fixed_point;
      session.feedback = feedback;
      session.profile = ForceProfileMode::intermittent;
      session.force_target = target;
      session.trials = 5;
      session.trial_duration = trial_duration;
      session.noise = true;
      session.wear = true;  // fresh disc at trial 1, wear accumulates across trials
      session.seed = master.next_u64();

      GrindingSession sim(steel, session, &model, nullptr);
      const ExperimentLog log = sim.run();

      WearRepetition wr;
      for (const auto& trial : log.trials) wr.trial_depths.push_back(trial.depth);
      const auto [lo, hi] = std::minmax_element(wr.trial_depths.begin(), wr.trial_depths.end());
      wr.depth_range = *hi - *lo;
      (feedback == FeedbackSource::ft ? result.ft : result.afrg).push_back(std::move(wr));
    }
  }
  return result;
}

NoiseRobustnessResult run_noise_robustness(const Config& cfg, PsdRegNet& model,
                                           const PeakCalibration& calibration,
                                           std::uint64_t seed,
                                           const std::vector<double>& targets, double duration) {
  const EncoderConfig encoder_cfg = encoder_config_from_config(cfg);
  NoiseRobustnessResult result;

  for (const bool noisy : {false, true}) {
    std::vector<std::pair<double, double>> net_pairs, baseline_pairs;
    Rng master(seed ^ 0x6e6f6973ULL);  // same per-target seeds for both passes
    for (double target : targets) {
      SessionConfig session;
      session.scenario = Scenario::fixed_point;
      session.feedback = FeedbackSource::ft;
      session.profile = ForceProfileMode::intermittent;
      session.force_target = target;
      session.trials = 1;
      session.trial_duration = duration;
      session.noise = noisy;
      session.wear = false;
      session.seed = master.next_u64();

      PeakTracker tracker(calibration, encoder_cfg);
      GrindingSession sim(cfg, session, &model, &tracker);
      const ExperimentLog log = sim.run();
      const auto net = estimation_pairs(log, /*use_baseline=*/false);
      const auto base = estimation_pairs(log, /*use_baseline=*/true);
      net_pairs.insert(net_pairs.end(), net.begin(), net.end());
      baseline_pairs.insert(baseline_pairs.end(), base.begin(), base.end());
    }
    const double net_rmse = eval_estimation(net_pairs).rmse;
    const double base_rmse = eval_estimation(baseline_pairs).rmse;
    if (noisy) {
      result.net_noisy = net_rmse;
      result.baseline_noisy = base_rmse;
    } else {
      result.net_clean = net_rmse;
      result.baseline_clean = base_rmse;
    }
  }
  return result;
}

}  // namespace afrg
