#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afrg/baseline.hpp"
#include "afrg/config.hpp"
#include "afrg/dataset.hpp"
#include "afrg/metrics.hpp"
#include "afrg/psdregnet.hpp"
#include "afrg/simloop.hpp"

namespace afrg {

// Sensor-feedback grinding with the network estimating in parallel; one run
// per target force.
struct EstimationEvalResult {
  EstimationMetrics metrics;            // pooled over all targets
  std::vector<double> targets;
  std::vector<double> level_mean_estimates;  // mean estimate per target
  std::vector<ExperimentLog> logs;
};

EstimationEvalResult run_estimation_eval(const Config& cfg, PsdRegNet& model,
                                         std::uint64_t seed,
                                         const std::vector<double>& targets = {2.0, 3.0, 4.0},
                                         double duration = 30.0, bool noise = true);

// Acoustic-feedback straight-line pass at one target.
struct ControlExperimentResult {
  ControlMetrics metrics;
  ExperimentLog log;
};

ControlExperimentResult run_control_experiment(const Config& cfg, PsdRegNet& model,
                                               std::uint64_t seed, double target = 3.0,
                                               double duration = 30.0);

// Five consecutive fixed-point trials on the steel preset with wear on,
// repeated for both feedback sources.
struct WearRepetition {
  std::vector<double> trial_depths;
  double depth_range = 0.0;
};

struct WearExperimentResult {
  std::vector<WearRepetition> ft, afrg;
};

WearExperimentResult run_wear_experiment(const Config& cfg, PsdRegNet& model, int repetitions,
                                         std::uint64_t seed, double target = 4.0,
                                         double trial_duration = 30.0);

// Same trajectories with and without ambient noise; RMSE of the network and
// of the dominant-peak baseline on each.
struct NoiseRobustnessResult {
  double net_clean = 0.0, net_noisy = 0.0;
  double baseline_clean = 0.0, baseline_noisy = 0.0;
  double net_degradation() const { return net_noisy - net_clean; }
  double baseline_degradation() const { return baseline_noisy - baseline_clean; }
};

NoiseRobustnessResult run_noise_robustness(const Config& cfg, PsdRegNet& model,
                                           const PeakCalibration& calibration,
                                           std::uint64_t seed,
                                           const std::vector<double>& targets = {2.0, 3.0, 4.0},
                                           double duration = 20.0);

// Config with the steel preset applied (wear experiment material).
Config with_material(const Config& cfg, const std::string& material);

}  // namespace afrg
