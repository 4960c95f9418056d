#include "afrg/psd.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>

#include "afrg/errors.hpp"

namespace afrg {

int EncoderConfig::window_samples() const {
  return static_cast<int>(std::lround(window_seconds * sample_rate));
}

double EncoderConfig::bin_width() const { return sample_rate / window_samples(); }

int EncoderConfig::hop_samples() const {
  return static_cast<int>(std::lround(sample_rate / control_rate));
}

int EncoderConfig::first_bin() const {
  return static_cast<int>(std::ceil(band_low / bin_width() - 1e-9));
}

int EncoderConfig::band_bins() const {
  const int last = static_cast<int>(std::floor(band_high / bin_width() - 1e-9));
  return last - first_bin() + 1;
}

void EncoderConfig::validate() const {
  if (sample_rate <= 0 || control_rate <= 0 || window_seconds <= 0)
    throw ConfigError("encoder: rates and window length must be > 0");
  const int n = window_samples();
  if (n < 2) throw ConfigError("encoder: window too short");
  if (std::abs(window_seconds * sample_rate - n) > 1e-6)
    throw ConfigError("encoder: window_seconds * sample_rate must be an integer");
  if (std::abs(sample_rate / control_rate - hop_samples()) > 1e-6)
    throw ConfigError("encoder: sample_rate / control_rate must be an integer");
  if (!(0 <= band_low && band_low < band_high && band_high <= sample_rate / 2))
    throw ConfigError("encoder: need 0 <= band_low < band_high <= fs/2");
  if (frames < 1) throw ConfigError("encoder: frames must be >= 1");
  const int expected = static_cast<int>(std::lround((band_high - band_low) / bin_width()));
  if (band_bins() != expected)
    throw ConfigError("encoder: band [" + format_double(band_low) + ", " +
                      format_double(band_high) + ") yields " + std::to_string(band_bins()) +
                      " bins, expected " + std::to_string(expected));
}

Eigen::ArrayXd hann_window(int n) {
  if (n < 2) throw DomainError("hann_window: N must be >= 2");
  Eigen::ArrayXd w(n);
  for (int k = 0; k < n; ++k)
    w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / (n - 1)));
  return w;
}

struct StreamingEncoder::Fft {
  Eigen::FFT<double> fft;
};

namespace {

Eigen::ArrayXd psd_impl(const Eigen::ArrayXd& samples, double fs, Eigen::FFT<double>& fft) {
  const int n = static_cast<int>(samples.size());
  const Eigen::ArrayXd w = hann_window(n);
  const double wsum2 = (w * w).sum();

  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = samples[i] * w[i];
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);

  const int half = n / 2;
  Eigen::ArrayXd psd(half + 1);
  const double scale = 1.0 / (fs * wsum2);
  for (int k = 0; k <= half; ++k) {
    double p = std::norm(spec[static_cast<size_t>(k)]) * scale;
    const bool interior = k > 0 && !(n % 2 == 0 && k == half);
    if (interior) p *= 2.0;
    psd[k] = p;
  }
  return psd;
}

}  // namespace

Eigen::ArrayXd power_spectral_density(const Eigen::ArrayXd& samples, double fs) {
  if (samples.size() < 2) throw DomainError("power_spectral_density: need at least 2 samples");
  Eigen::FFT<double> fft;
  return psd_impl(samples, fs, fft);
}

namespace {

PsdFrame crop_and_normalize(const Eigen::ArrayXd& psd, const EncoderConfig& config) {
  PsdFrame frame;
  frame.values = psd.segment(config.first_bin(), config.band_bins());
  const double lo = frame.values.minCoeff();
  const double hi = frame.values.maxCoeff();
  if (hi > lo)
    frame.values = (frame.values - lo) / (hi - lo);
  else
    frame.values.setZero();
  return frame;
}

}  // namespace

PsdFrame encode_frame(const Eigen::ArrayXd& samples, const EncoderConfig& config) {
  config.validate();
  if (samples.size() != config.window_samples())
    throw DomainError("encode_frame: expected " + std::to_string(config.window_samples()) +
                      " samples, got " + std::to_string(samples.size()));
  return crop_and_normalize(power_spectral_density(samples, config.sample_rate), config);
}

StreamingEncoder::StreamingEncoder(const EncoderConfig& config)
    : config_(config), fft_(std::make_unique<Fft>()) {
  config_.validate();
}

StreamingEncoder::StreamingEncoder(const StreamingEncoder& other)
    : config_(other.config_),
      tail_(other.tail_),
      tail_start_(other.tail_start_),
      total_samples_(other.total_samples_),
      next_frame_(other.next_frame_),
      recent_(other.recent_),
      fft_(std::make_unique<Fft>()) {}

StreamingEncoder::~StreamingEncoder() = default;

PsdFrame StreamingEncoder::encode_window_at(std::uint64_t start_sample) {
  const int n = config_.window_samples();
  Eigen::ArrayXd window(n);
  const std::uint64_t offset = start_sample - tail_start_;
  for (int i = 0; i < n; ++i) window[i] = tail_[static_cast<size_t>(offset) + i];
  PsdFrame frame = crop_and_normalize(psd_impl(window, config_.sample_rate, fft_->fft), config_);
  frame.frame_time = static_cast<double>(start_sample + n) / config_.sample_rate;
  return frame;
}

std::vector<PsdFrame> StreamingEncoder::push_audio(const AudioBlock& block) {
  if (std::abs(block.sample_rate - config_.sample_rate) > 1e-9)
    throw StreamError("push_audio: block sample rate " + format_double(block.sample_rate) +
                          " does not match encoder " + format_double(config_.sample_rate),
                      0.0);
  const double expected = static_cast<double>(total_samples_) / config_.sample_rate;
  const double gap = block.start_time - expected;
  if (std::abs(gap) > 0.5 / config_.sample_rate)
    throw StreamError("push_audio: stream gap of " + format_double(gap) + " s", gap);

  tail_.insert(tail_.end(), block.samples.data(), block.samples.data() + block.samples.size());
  total_samples_ += static_cast<std::uint64_t>(block.samples.size());

  const int n = config_.window_samples();
  const int hop = config_.hop_samples();
  std::vector<PsdFrame> emitted;
  while (next_frame_ * hop + static_cast<std::uint64_t>(n) <= total_samples_) {
    PsdFrame frame = encode_window_at(next_frame_ * hop);
    recent_.push_back(frame);
    while (recent_.size() > static_cast<size_t>(config_.frames)) recent_.pop_front();
    emitted.push_back(std::move(frame));
    ++next_frame_;
  }

  // Drop samples no future window can touch.
  const std::uint64_t needed_from = next_frame_ * hop;
  if (needed_from > tail_start_) {
    const std::uint64_t drop = needed_from - tail_start_;
    tail_.erase(tail_.begin(), tail_.begin() + static_cast<std::ptrdiff_t>(drop));
    tail_start_ = needed_from;
  }
  return emitted;
}

PsdWindow StreamingEncoder::current_input() const {
  PsdWindow window;
  const int f = config_.band_bins();
  const int n = config_.frames;
  window.values = Eigen::MatrixXd::Zero(f, n);
  const int have = static_cast<int>(recent_.size());
  for (int j = 0; j < have; ++j)
    window.values.col(n - have + j) = recent_[static_cast<size_t>(j)].values.matrix();
  window.warming_up = have < n;
  window.end_time = have > 0 ? recent_.back().frame_time : 0.0;
  return window;
}

void StreamingEncoder::dump_frames_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write frames CSV: " + path);
  out << "t_s";
  for (int i = 0; i < config_.band_bins(); ++i)
    out << ",bin" << static_cast<int>(std::lround((config_.first_bin() + i) * config_.bin_width()));
  out << "\n";
  for (const auto& frame : recent_) {
    out << format_double(frame.frame_time);
    for (Eigen::Index i = 0; i < frame.values.size(); ++i)
      out << "," << format_double(frame.values[i]);
    out << "\n";
  }
}

void dump_window_binary(const PsdWindow& window, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write window binary: " + path);
  const char magic[4] = {'P', 'S', 'D', 'X'};
  const std::uint32_t f = static_cast<std::uint32_t>(window.values.rows());
  const std::uint32_t n = static_cast<std::uint32_t>(window.values.cols());
  const float t = static_cast<float>(window.end_time);
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&f), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&t), 4);
  for (std::uint32_t r = 0; r < f; ++r)
    for (std::uint32_t c = 0; c < n; ++c) {
      const float v = static_cast<float>(window.values(r, c));
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
}

PsdWindow load_window_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open window binary: " + path);
  char magic[4];
  std::uint32_t f = 0, n = 0;
  float t = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&f), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&t), 4);
  if (!in || std::memcmp(magic, "PSDX", 4) != 0)
    throw FormatError("bad window binary header: " + path);
  PsdWindow window;
  window.values.resize(f, n);
  for (std::uint32_t r = 0; r < f; ++r)
    for (std::uint32_t c = 0; c < n; ++c) {
      float v = 0;
      in.read(reinterpret_cast<char*>(&v), 4);
      window.values(r, c) = v;
    }
  if (!in) throw FormatError("truncated window binary: " + path);
  window.end_time = t;
  window.warming_up = false;
  return window;
}

EncoderConfig encoder_config_from_config(const Config& cfg) {
  EncoderConfig e;
  e.sample_rate = cfg.get_double("audio.sample_rate", e.sample_rate);
  e.window_seconds = cfg.get_double("encoder.window_seconds", e.window_seconds);
  e.control_rate = cfg.get_double("encoder.control_rate", e.control_rate);
  e.band_low = cfg.get_double("encoder.band_low", e.band_low);
  e.band_high = cfg.get_double("encoder.band_high", e.band_high);
  e.frames = cfg.get_int("encoder.frames", e.frames);
  e.validate();
  return e;
}

}  // namespace afrg
