#pragma once

#include <Eigen/Dense>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "afrg/audio.hpp"
#include "afrg/config.hpp"

namespace afrg {

struct EncoderConfig {
  double sample_rate = 16000.0;  // fs, Hz
  double window_seconds = 0.1;   // t_ws
  double control_rate = 20.0;    // f_c, Hz
  double band_low = 230.0;       // f_lo, Hz (inclusive)
  double band_high = 580.0;      // f_hi, Hz (exclusive)
  int frames = 40;               // n stacked frames

  int window_samples() const;  // N = round(t_ws * fs)
  double bin_width() const;    // fs / N == 1 / t_ws
  int hop_samples() const;     // fs / f_c
  int first_bin() const;       // lowest retained FFT bin
  int band_bins() const;       // F
  void validate() const;       // throws ConfigError
};

struct PsdFrame {
  Eigen::ArrayXd values;  // F normalized powers in [0, 1]
  double frame_time = 0.0;  // trailing-edge timestamp, s
};

struct PsdWindow {
  Eigen::MatrixXd values;  // F x n, columns oldest -> newest
  double end_time = 0.0;
  bool warming_up = true;  // set while older columns are zero-filled
};

// Symmetric Hann window, w[k] = 0.5 (1 - cos(2 pi k / (N-1))).
Eigen::ArrayXd hann_window(int n);

// One-sided Hann periodogram: PSD_k = |X_k|^2 / (fs * sum w^2), doubled for
// 0 < k < N/2. Length N/2 + 1.
Eigen::ArrayXd power_spectral_density(const Eigen::ArrayXd& samples, double fs);

// PSD, band crop to [f_lo, f_hi), then per-frame min-max normalization
// (all-equal input maps to all zeros).
PsdFrame encode_frame(const Eigen::ArrayXd& samples, const EncoderConfig& config);

// Streaming encoder: ring buffer over the audio stream, one frame per 1/f_c
// once the first full window is available.
class StreamingEncoder {
 public:
  explicit StreamingEncoder(const EncoderConfig& config);
  StreamingEncoder(const StreamingEncoder& other);
  StreamingEncoder& operator=(const StreamingEncoder&) = delete;
  ~StreamingEncoder();

  // Blocks must be contiguous in time; a timestamp gap raises StreamError.
  std::vector<PsdFrame> push_audio(const AudioBlock& block);

  // Latest n frames, oldest columns zero-filled until n frames exist.
  PsdWindow current_input() const;

  const EncoderConfig& config() const { return config_; }
  std::uint64_t frames_emitted() const { return next_frame_; }

  void dump_frames_csv(const std::string& path) const;  // retained frames only

 private:
  PsdFrame encode_window_at(std::uint64_t start_sample);

  EncoderConfig config_;
  std::vector<double> tail_;        // most recent samples
  std::uint64_t tail_start_ = 0;    // absolute index of tail_[0]
  std::uint64_t total_samples_ = 0;
  std::uint64_t next_frame_ = 0;
  std::deque<PsdFrame> recent_;     // last n frames
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

// X_i dump: 16-byte header (magic "PSDX", u32 F, u32 n, f32 end_time), then
// F*n float32 values, row-major.
void dump_window_binary(const PsdWindow& window, const std::string& path);
PsdWindow load_window_binary(const std::string& path);

EncoderConfig encoder_config_from_config(const Config& cfg);

}  // namespace afrg
