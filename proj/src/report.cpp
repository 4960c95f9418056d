#include "afrg/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "afrg/errors.hpp"
#include "afrg/svg.hpp"

namespace afrg {

namespace fs = std::filesystem;

ReportAnchors anchors_from_config(const Config& cfg) {
  ReportAnchors a;
  a.rmse = cfg.get_double("report.anchor_rmse", a.rmse);
  a.sse = cfg.get_double("report.anchor_sse", a.sse);
  a.steady_std = cfg.get_double("report.anchor_steady_std", a.steady_std);
  a.depth_range_ft = cfg.get_double("report.anchor_depth_range_ft", a.depth_range_ft);
  a.depth_range_afrg = cfg.get_double("report.anchor_depth_range_afrg", a.depth_range_afrg);
  return a;
}

namespace {

void plot_spectrogram(const ExperimentLog& log, const std::string& path) {
  if (log.frames.empty()) return;
  const int bins = static_cast<int>(log.frames.front().values.size());
  const double t0 = log.frames.front().frame_time;
  const double t1 = log.frames.back().frame_time;

  SvgPlot plot(900, 360, "Encoded PSD frames with measured force");
  plot.set_axes(t0, t1, 0, bins, "time [s]", "band bin");

  // Downsample columns so the SVG stays manageable.
  const size_t max_cols = 400;
  const size_t stride = std::max<size_t>(1, log.frames.size() / max_cols);
  for (size_t i = 0; i < log.frames.size(); i += stride) {
    const auto& f = log.frames[i];
    const size_t next = std::min(i + stride, log.frames.size() - 1);
    const double ta = f.frame_time;
    const double tb = log.frames[next].frame_time + (next == i ? 0.05 : 0.0);
    for (int b = 0; b < bins; ++b)
      plot.cell(ta, tb, b, b + 1, SvgPlot::heat_color(f.values[b]));
  }

  // Force overlay, rescaled onto the bin axis.
  double f_max = 1e-9;
  for (const auto& r : log.records) f_max = std::max(f_max, r.normal_force);
  std::vector<double> t, f;
  for (const auto& r : log.records) {
    t.push_back(r.t);
    f.push_back(r.normal_force / f_max * bins * 0.9);
  }
  plot.polyline(t, f, "#ff2222", 1.2);
  plot.label(t0 + 0.02 * (t1 - t0), bins * 0.95,
             "red: measured F_n (peak " + std::to_string(f_max).substr(0, 4) + " N)", "#aa0000");
  plot.write(path);
}

void plot_force_trace(const ExperimentLog& log, const ControlMetrics* metrics,
                      const std::string& path) {
  std::vector<double> t, fn, fhat, target;
  bool any_hat = false;
  for (const auto& r : log.records) {
    t.push_back(r.t);
    fn.push_back(r.normal_force);
    target.push_back(r.force_target);
    fhat.push_back(r.estimated_force);
    if (!std::isnan(r.estimated_force)) any_hat = true;
  }
  if (t.empty()) return;
  double top = log.force_target;
  for (double v : fn) top = std::max(top, v);

  SvgPlot plot(900, 360, "Force control trace");
  plot.set_axes(t.front(), t.back(), 0, 1.15 * top, "time [s]", "force [N]");
  plot.polyline(t, target, "#888888", 1.0, "4,3");
  plot.polyline(t, fn, "#1f77b4", 1.5);
  if (any_hat) {
    std::vector<double> th, fh;
    for (size_t i = 0; i < t.size(); ++i)
      if (!std::isnan(fhat[i])) {
        th.push_back(t[i]);
        fh.push_back(fhat[i]);
      }
    plot.polyline(th, fh, "#ff7f0e", 1.2);
  }
  plot.legend({{"measured F_n", "#1f77b4"},
               {"estimate", "#ff7f0e"},
               {"target", "#888888"}});
  if (metrics) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "rise %.2f s | overshoot %.1f%% | SSE %.3f N | std %.3f N",
                  metrics->rise_time, metrics->overshoot_pct, metrics->sse, metrics->steady_std);
    plot.label(t.front() + 0.03 * (t.back() - t.front()), 1.08 * top, buf, "#333");
  }
  plot.write(path);
}

void plot_scatter(const std::vector<std::pair<double, double>>& pairs,
                  const EstimationMetrics& m, const std::string& path) {
  if (pairs.empty()) return;
  double lo = 1e300, hi = -1e300;
  for (const auto& [a, b] : pairs) {
    lo = std::min({lo, a, b});
    hi = std::max({hi, a, b});
  }
  const double pad = 0.05 * (hi - lo + 1e-9);
  SvgPlot plot(500, 480, "Estimated vs measured force");
  plot.set_axes(lo - pad, hi + pad, lo - pad, hi + pad, "measured F_n [N]", "estimated [N]");
  std::vector<double> xs, ys, ox, oy;
  const double limit = 3.0 * m.residual_std;
  for (const auto& [truth, est] : pairs) {
    if (std::abs((est - truth) - m.residual_mean) > limit) {
      ox.push_back(truth);
      oy.push_back(est);
    } else {
      xs.push_back(truth);
      ys.push_back(est);
    }
  }
  plot.line(lo - pad, lo - pad, hi + pad, hi + pad, "#444444", 1.0, "5,4");  // x = y
  plot.scatter(xs, ys, "#1f77b4", 2.0);
  plot.scatter(ox, oy, "#ff7f0e", 2.6);  // outliers highlighted
  plot.legend({{"inliers", "#1f77b4"}, {"outliers (3 sigma)", "#ff7f0e"}});
  plot.write(path);
}

void plot_residual_hist(const std::vector<std::pair<double, double>>& pairs,
                        const std::string& path) {
  if (pairs.empty()) return;
  std::vector<double> residuals;
  double lo = 1e300, hi = -1e300;
  for (const auto& [truth, est] : pairs) {
    residuals.push_back(est - truth);
    lo = std::min(lo, residuals.back());
    hi = std::max(hi, residuals.back());
  }
  const int bins = 41;
  const double width = (hi - lo + 1e-12) / bins;
  std::vector<int> counts(bins, 0);
  for (double r : residuals)
    ++counts[std::min(bins - 1, static_cast<int>((r - lo) / width))];
  const int peak = *std::max_element(counts.begin(), counts.end());

  SvgPlot plot(520, 360, "Residual distribution");
  plot.set_axes(lo, hi, 0, 1.1 * peak, "residual [N]", "count");
  for (int i = 0; i < bins; ++i)
    plot.bar(lo + (i + 0.5) * width, width * 0.92, counts[i], "#1f77b4");
  plot.line(0, 0, 0, 1.1 * peak, "#444", 1.0, "4,3");
  plot.write(path);
}

void plot_depth(const ExperimentLog& log, const std::string& path) {
  if (log.depth_field.size() == 0) return;
  std::vector<double> x, d;
  for (Eigen::Index i = 0; i < log.depth_field.size(); ++i) {
    x.push_back((static_cast<double>(i) + 0.5) * log.grid_resolution * 1000.0);
    d.push_back(log.depth_field[i] * 1000.0);
  }
  const double dmax = *std::max_element(d.begin(), d.end());
  SvgPlot plot(900, 320, "Workpiece depth profile");
  plot.set_axes(x.front(), x.back(), 0, std::max(1e-6, 1.15 * dmax), "position [mm]",
                "removed depth [mm]");
  plot.polyline(x, d, "#2ca02c", 1.6);
  for (const auto& trial : log.trials)
    plot.label(trial.position * 1000.0, 1.05 * dmax, "t" + std::to_string(trial.index + 1),
               "#555");
  plot.write(path);
}

}  // namespace

void write_report(const ExperimentLog& log, const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ReportAnchors anchors = anchors_from_config(cfg);

  const auto pairs = estimation_pairs(log);
  EstimationMetrics est{};
  const bool have_estimates = !pairs.empty();
  if (have_estimates) est = eval_estimation(pairs);

  ControlMetrics control{};
  bool have_control = false;
  try {
    control = eval_control(log);
    have_control = true;
  } catch (const DomainError&) {
  }

  Workpiece wp = workpiece_from_config(cfg);
  const MrrMetrics mrr = eval_mrr(log, wp);

  plot_spectrogram(log, (fs::path(out_dir) / "spectrogram.svg").string());
  plot_force_trace(log, have_control ? &control : nullptr,
                   (fs::path(out_dir) / "force_trace.svg").string());
  if (have_estimates) {
    plot_scatter(pairs, est, (fs::path(out_dir) / "estimation_scatter.svg").string());
    plot_residual_hist(pairs, (fs::path(out_dir) / "residual_hist.svg").string());
  }
  plot_depth(log, (fs::path(out_dir) / "depth_profile.svg").string());

  std::ofstream summary(fs::path(out_dir) / "summary.txt");
  if (!summary) throw FormatError("cannot write summary in " + out_dir);
  summary << "run summary\n===========\n";
  summary << "scenario: " << log.scenario << "\nfeedback: " << log.feedback
          << "\nprofile: " << log.profile << "\nforce target: " << log.force_target
          << " N\nseed: " << log.seed << "\nrecords: " << log.records.size() << "\n\n";

  if (have_estimates) {
    summary << "force estimation\n----------------\n";
    summary << "pairs: " << est.count << "\nrmse: " << format_double(est.rmse)
            << " N   (hardware reference anchor: " << format_double(anchors.rmse) << " N)\n";
    summary << "residual mean: " << format_double(est.residual_mean)
            << " N\nresidual std: " << format_double(est.residual_std)
            << " N\noutliers (3 sigma): " << est.outliers << "\n\n";
  }
  if (have_control) {
    summary << "force control\n-------------\n";
    summary << "rise time (10-90%): " << format_double(control.rise_time) << " s\n";
    summary << "overshoot: " << format_double(control.overshoot_pct) << " %\n";
    summary << "steady-state error: " << format_double(control.sse)
            << " N   (hardware reference anchor: " << format_double(anchors.sse) << " N)\n";
    summary << "steady std: " << format_double(control.steady_std)
            << " N   (hardware reference anchor: " << format_double(anchors.steady_std)
            << " N)\n\n";
  }
  if (!mrr.trial_depths.empty()) {
    summary << "material removal\n----------------\n";
    for (size_t i = 0; i < mrr.trial_depths.size(); ++i)
      summary << "trial " << i + 1 << ": depth " << format_double(mrr.trial_depths[i] * 1000)
              << " mm, volume " << format_double(mrr.trial_volumes[i] * 1e9) << " mm^3, mean MRR "
              << format_double(mrr.trial_mrr[i] * 1e9) << " mm^3/s\n";
    summary << "depth range: " << format_double(mrr.depth_range * 1000)
            << " mm   (hardware anchors: force-sensor control "
            << format_double(anchors.depth_range_ft * 1000) << " mm, acoustic control "
            << format_double(anchors.depth_range_afrg * 1000) << " mm)\n";
    if (!std::isnan(mrr.line_linearity_residual))
      summary << "line-scan depth linearity residual: "
              << format_double(mrr.line_linearity_residual) << " (rms/mean)\n";
    summary << "\n";
  }
  summary << "effective configuration\n-----------------------\n" << log.config_echo;
}

}  // namespace afrg
