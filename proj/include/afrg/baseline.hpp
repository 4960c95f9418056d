#pragma once

#include <vector>

#include "afrg/psd.hpp"

namespace afrg {

// Affine map from dominant-peak frequency to force, fitted on clean audio.
struct PeakCalibration {
  double slope = 0.0;      // N per Hz
  double intercept = 0.0;  // N
  double fit_residual = 0.0;
};

// Least-squares fit of force = slope * frequency + intercept.
PeakCalibration fit_peak_calibration(const std::vector<std::pair<double, double>>& freq_force);

// Dominant-spectral-peak force estimator: per frame, argmax bin -> centre
// frequency -> calibrated affine map. A new peak bin must persist for two
// consecutive frames before the tracker switches (one-frame hysteresis);
// an all-zero frame holds the previous estimate and raises a flag.
class PeakTracker {
 public:
  PeakTracker(const PeakCalibration& calibration, const EncoderConfig& encoder);

  double estimate(const PsdFrame& frame);

  bool held_degenerate() const { return held_degenerate_; }
  int current_bin() const { return held_bin_; }
  double bin_frequency(int band_bin) const;
  void reset();

 private:
  PeakCalibration calibration_;
  EncoderConfig encoder_;
  int held_bin_ = -1;
  int previous_argmax_ = -1;
  double previous_estimate_ = 0.0;
  bool held_degenerate_ = false;
};

}  // namespace afrg
