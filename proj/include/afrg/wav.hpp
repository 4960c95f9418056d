#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace afrg {

// 16-bit PCM mono RIFF/WAVE io. Samples are exchanged as doubles in [-1, 1];
// writing quantises with round-half-away, reading maps back via /32767.
struct WavData {
  double sample_rate = 0.0;
  Eigen::ArrayXd samples;
};

void write_wav(const std::string& path, const Eigen::ArrayXd& samples, double sample_rate);
WavData read_wav(const std::string& path);

std::int16_t quantize_sample(double v);

}  // namespace afrg
