#pragma once

#include <string>

#include "afrg/config.hpp"
#include "afrg/metrics.hpp"
#include "afrg/simloop.hpp"

namespace afrg {

// Reference numbers from the hardware system this simulation mirrors; echoed
// in every summary next to the measured values.
struct ReportAnchors {
  double rmse = 0.23;          // N
  double sse = 0.05;           // N
  double steady_std = 0.07;    // N
  double depth_range_ft = 0.38e-3;    // m
  double depth_range_afrg = 0.09e-3;  // m
};

ReportAnchors anchors_from_config(const Config& cfg);

// Renders the applicable plots (spectrogram + force overlay, residual
// histogram, estimate-vs-measured scatter, annotated force trace, depth
// profile) and a summary.txt with metrics and the full config echo.
void write_report(const ExperimentLog& log, const Config& cfg, const std::string& out_dir);

}  // namespace afrg
