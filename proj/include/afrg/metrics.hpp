#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "afrg/simloop.hpp"

namespace afrg {

struct EstimationMetrics {
  double rmse = 0.0;
  double residual_mean = 0.0;
  double residual_std = 0.0;
  int outliers = 0;  // |residual| > 3 sigma
  int count = 0;
};

// Pairs are (measured F_n, estimate). Throws DomainError when empty.
EstimationMetrics eval_estimation(const std::vector<std::pair<double, double>>& pairs);

// Paired samples from a log's engaged records; pick the network estimate or
// the peak-tracker estimate.
std::vector<std::pair<double, double>> estimation_pairs(const ExperimentLog& log,
                                                        bool use_baseline = false);

struct ControlMetrics {
  double target = 0.0;
  double rise_time = std::nan("");  // 10% -> 90%, s
  double overshoot_pct = 0.0;
  double sse = 0.0;        // |mean steady-state error|, N
  double steady_std = 0.0;  // within-window std, N
};

// Step-response analysis of a measured force series. engage_time marks the
// step; the steady window is [engage_time + steady_after, end].
ControlMetrics eval_control_series(const std::vector<double>& time,
                                   const std::vector<double>& force, double target,
                                   double engage_time, double steady_after);

// Convenience over a log's first trial.
ControlMetrics eval_control(const ExperimentLog& log, double steady_after = 5.0);

struct MrrMetrics {
  std::vector<double> trial_depths;   // m
  std::vector<double> trial_volumes;  // m^3
  std::vector<double> trial_mrr;      // m^3/s
  double depth_max = 0.0, depth_min = 0.0, depth_range = 0.0;
  double line_linearity_residual = std::nan("");  // rms/mean over the ground span
};

MrrMetrics eval_mrr(const ExperimentLog& log, const Workpiece& workpiece);

void write_metrics_csv(const std::string& path, const std::vector<std::pair<std::string, double>>& rows);

}  // namespace afrg
