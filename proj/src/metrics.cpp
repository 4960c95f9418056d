#include "afrg/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "afrg/errors.hpp"

namespace afrg {

EstimationMetrics eval_estimation(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw DomainError("eval_estimation: no (measured, estimated) pairs");
  EstimationMetrics m;
  m.count = static_cast<int>(pairs.size());
  double sq = 0.0, sum = 0.0;
  for (const auto& [truth, est] : pairs) {
    const double r = est - truth;
    sq += r * r;
    sum += r;
  }
  m.rmse = std::sqrt(sq / m.count);
  m.residual_mean = sum / m.count;
  double var = 0.0;
  for (const auto& [truth, est] : pairs) {
    const double d = (est - truth) - m.residual_mean;
    var += d * d;
  }
  m.residual_std = std::sqrt(var / m.count);
  const double limit = 3.0 * m.residual_std;
  for (const auto& [truth, est] : pairs)
    if (std::abs((est - truth) - m.residual_mean) > limit) ++m.outliers;
  return m;
}

std::vector<std::pair<double, double>> estimation_pairs(const ExperimentLog& log,
                                                        bool use_baseline) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& r : log.records) {
    if (!r.active) continue;
    const double est = use_baseline ? r.baseline_force : r.estimated_force;
    if (std::isnan(est)) continue;
    pairs.emplace_back(r.normal_force, est);
  }
  return pairs;
}

ControlMetrics eval_control_series(const std::vector<double>& time,
                                   const std::vector<double>& force, double target,
                                   double engage_time, double steady_after) {
  if (time.size() != force.size() || time.empty())
    throw DomainError("eval_control_series: empty or mismatched series");
  ControlMetrics m;
  m.target = target;

  double t10 = std::nan(""), t90 = std::nan("");
  double peak = -1e300;
  double steady_sum = 0.0, steady_sq = 0.0;
  int steady_count = 0;
  for (size_t i = 0; i < time.size(); ++i) {
    if (time[i] < engage_time) continue;
    const double f = force[i];
    peak = std::max(peak, f);
    if (std::isnan(t10) && f >= 0.1 * target) t10 = time[i];
    if (!std::isnan(t10) && std::isnan(t90) && f >= 0.9 * target) t90 = time[i];
    if (time[i] >= engage_time + steady_after) {
      steady_sum += f;
      steady_sq += f * f;
      ++steady_count;
    }
  }
  if (!std::isnan(t10) && !std::isnan(t90)) m.rise_time = t90 - t10;
  m.overshoot_pct = std::max(0.0, (peak - target) / target * 100.0);
  if (steady_count == 0) throw DomainError("eval_control_series: steady window is empty");
  const double mean = steady_sum / steady_count;
  m.sse = std::abs(mean - target);
  m.steady_std = std::sqrt(std::max(0.0, steady_sq / steady_count - mean * mean));
  return m;
}

ControlMetrics eval_control(const ExperimentLog& log, double steady_after) {
  std::vector<double> t, f;
  double engage = std::nan("");
  for (const auto& r : log.records) {
    if (r.trial != 0) break;
    t.push_back(r.t);
    f.push_back(r.normal_force);
    if (std::isnan(engage) && r.active) engage = r.t;
  }
  if (std::isnan(engage)) throw DomainError("eval_control: log has no engaged records");
  return eval_control_series(t, f, log.force_target, engage, steady_after);
}

MrrMetrics eval_mrr(const ExperimentLog& log, const Workpiece& workpiece) {
  MrrMetrics m;
  for (const auto& trial : log.trials) {
    m.trial_depths.push_back(trial.depth);
    m.trial_volumes.push_back(trial.removed_volume);
    const double duration = trial.end_time - trial.start_time;
    m.trial_mrr.push_back(duration > 0 ? trial.removed_volume / duration : 0.0);
  }
  if (!m.trial_depths.empty()) {
    m.depth_max = *std::max_element(m.trial_depths.begin(), m.trial_depths.end());
    m.depth_min = *std::min_element(m.trial_depths.begin(), m.trial_depths.end());
    m.depth_range = m.depth_max - m.depth_min;
  }

  if (log.scenario == "straight_line" && log.depth_field.size() > 0) {
    // Linearity of the ground profile: affine fit over the plateau cells.
    const double max_depth = log.depth_field.maxCoeff();
    if (max_depth > 0) {
      std::vector<double> xs, ds;
      for (Eigen::Index i = 0; i < log.depth_field.size(); ++i)
        if (log.depth_field[i] > 0.5 * max_depth) {
          xs.push_back((static_cast<double>(i) + 0.5) * log.grid_resolution);
          ds.push_back(log.depth_field[i]);
        }
      if (xs.size() >= 3) {
        const double n = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
          sx += xs[i];
          sy += ds[i];
          sxx += xs[i] * xs[i];
          sxy += xs[i] * ds[i];
        }
        const double denom = n * sxx - sx * sx;
        const double b = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
        const double a = (sy - b * sx) / n;
        double ss = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
          const double r = ds[i] - (a + b * xs[i]);
          ss += r * r;
        }
        const double mean_depth = sy / n;
        m.line_linearity_residual = std::sqrt(ss / n) / mean_depth;
      }
    }
  }
  (void)workpiece;
  return m;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write metrics CSV: " + path);
  out << "metric,value\n";
  for (const auto& [name, value] : rows) out << name << "," << format_double(value) << "\n";
}

}  // namespace afrg
