#include "afrg/baseline.hpp"

#include <cmath>

#include "afrg/errors.hpp"

namespace afrg {

PeakCalibration fit_peak_calibration(const std::vector<std::pair<double, double>>& freq_force) {
  if (freq_force.size() < 2)
    throw DomainError("fit_peak_calibration: need at least two (frequency, force) pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(freq_force.size());
  for (const auto& [f, y] : freq_force) {
    sx += f;
    sy += y;
    sxx += f * f;
    sxy += f * y;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw DomainError("fit_peak_calibration: degenerate fit (constant frequency)");
  PeakCalibration cal;
  cal.slope = (n * sxy - sx * sy) / denom;
  cal.intercept = (sy - cal.slope * sx) / n;
  double ss = 0;
  for (const auto& [f, y] : freq_force) {
    const double r = y - (cal.slope * f + cal.intercept);
    ss += r * r;
  }
  cal.fit_residual = std::sqrt(ss / n);
  return cal;
}

PeakTracker::PeakTracker(const PeakCalibration& calibration, const EncoderConfig& encoder)
    : calibration_(calibration), encoder_(encoder) {
  encoder_.validate();
}

double PeakTracker::bin_frequency(int band_bin) const {
  return (encoder_.first_bin() + band_bin) * encoder_.bin_width();
}

void PeakTracker::reset() {
  held_bin_ = -1;
  previous_argmax_ = -1;
  previous_estimate_ = 0.0;
  held_degenerate_ = false;
}

double PeakTracker::estimate(const PsdFrame& frame) {
  if (frame.values.size() != encoder_.band_bins())
    throw DomainError("peak tracker: frame size does not match the encoder band");

  if (frame.values.maxCoeff() <= 0.0) {
    // Degenerate all-zero frame: hold the previous estimate, flag it.
    held_degenerate_ = true;
    return previous_estimate_;
  }
  held_degenerate_ = false;

  int argmax = 0;
  frame.values.maxCoeff(&argmax);
  if (held_bin_ < 0) {
    held_bin_ = argmax;
  } else if (argmax != held_bin_ && argmax == previous_argmax_) {
    held_bin_ = argmax;  // confirmed for two consecutive frames
  }
  previous_argmax_ = argmax;

  previous_estimate_ = calibration_.slope * bin_frequency(held_bin_) + calibration_.intercept;
  return previous_estimate_;
}

}  // namespace afrg
