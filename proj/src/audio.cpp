#include "afrg/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "afrg/errors.hpp"

namespace afrg {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void AcousticModel::validate() const {
  if (sample_rate <= 0) throw ConfigError("audio: sample_rate must be > 0");
  if (harmonic_amplitudes.empty()) throw ConfigError("audio: need at least one harmonic");
  for (double a : harmonic_amplitudes)
    if (a < 0) throw ConfigError("audio: harmonic amplitudes must be >= 0");
  if (fundamental_multiplier <= 0) throw ConfigError("audio: fundamental_multiplier must be > 0");

  double highest = harmonic_count() * fundamental_multiplier * max_fundamental_hz;
  for (const auto& line : resonance_lines) {
    if (line.amplitude < 0 || line.frequency <= 0 || line.bandwidth <= 0)
      throw ConfigError("audio: malformed resonance line");
    highest = std::max(highest, line.frequency);
  }
  for (const auto& b : noise.bursts) {
    if (b.amplitude < 0 || b.frequency <= 0 || b.duty < 0 || b.duty > 1)
      throw ConfigError("audio: malformed tonal burst");
    highest = std::max(highest, b.frequency);
  }
  if (sample_rate < 4.0 * highest)
    throw ConfigError("audio: sample_rate " + format_double(sample_rate) +
                      " is below 4x the highest synthesized frequency " + format_double(highest));
  if (!(0 < mic_bandpass.low_cut && mic_bandpass.low_cut < mic_bandpass.high_cut &&
        mic_bandpass.high_cut < sample_rate / 2))
    throw ConfigError("audio: mic band-pass cutoffs must satisfy 0 < low < high < fs/2");
  if (mic_bandpass.order < 2 || mic_bandpass.order % 2 != 0)
    throw ConfigError("audio: mic band-pass order must be a positive even number");
}

std::complex<double> BiquadSection::response(double freq, double fs) const {
  const std::complex<double> z = std::polar(1.0, -kTwoPi * freq / fs);
  return (b0 + b1 * z + b2 * z * z) / (1.0 + a1 * z + a2 * z * z);
}

void BiquadCascade::process_inplace(Eigen::ArrayXd& samples) {
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    double v = samples[i];
    for (auto& s : sections_) v = s.process(v);
    samples[i] = v;
  }
}

std::complex<double> BiquadCascade::response(double freq, double fs) const {
  std::complex<double> h(1.0, 0.0);
  for (const auto& s : sections_) h *= s.response(freq, fs);
  return h;
}

void BiquadCascade::reset() {
  for (auto& s : sections_) s.s1 = s.s2 = 0.0;
}

namespace {

BiquadSection rbj_section(double freq, double fs, double q, bool highpass) {
  const double w0 = kTwoPi * freq / fs;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  BiquadSection s;
  if (highpass) {
    s.b0 = (1.0 + cw) / 2.0 / a0;
    s.b1 = -(1.0 + cw) / a0;
    s.b2 = s.b0;
  } else {
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
  }
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

}  // namespace

BiquadCascade design_mic_bandpass(const MicBandpass& spec, double fs) {
  if (!(0 < spec.low_cut && spec.low_cut < spec.high_cut && spec.high_cut < fs / 2))
    throw ConfigError("mic band-pass: cutoffs must satisfy 0 < low < high < fs/2");
  if (spec.order < 2 || spec.order % 2 != 0)
    throw ConfigError("mic band-pass: order must be a positive even number");

  std::vector<BiquadSection> sections;
  const int pairs = spec.order / 2;
  for (int k = 0; k < pairs; ++k) {
    // Butterworth section Q values for a cascade of biquads.
    const double q = 1.0 / (2.0 * std::sin(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * spec.order)));
    sections.push_back(rbj_section(spec.low_cut, fs, q, /*highpass=*/true));
  }
  for (int k = 0; k < pairs; ++k) {
    const double q = 1.0 / (2.0 * std::sin(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * spec.order)));
    sections.push_back(rbj_section(spec.high_cut, fs, q, /*highpass=*/false));
  }
  return BiquadCascade(std::move(sections));
}

Eigen::ArrayXd mic_filter(const Eigen::ArrayXd& samples, BiquadCascade& filter) {
  Eigen::ArrayXd out = samples;
  filter.process_inplace(out);
  return out;
}

NoiseSynth::NoiseSynth(const NoiseProfile& profile, double fs, std::uint64_t seed)
    : profile_(profile), fs_(fs), rng_(seed) {
  // Pink shaping: a bank of one-pole low-passes at geometrically staggered
  // cutoffs, each weighted 1/sqrt(f), summed. Gives ~-10 dB/decade across
  // the audible range at these sample rates.
  const std::vector<double> cutoffs = {10.0, 40.0, 160.0, 640.0, 2560.0};
  double var = 0.0;
  std::vector<double> one_minus;
  for (double f : cutoffs) {
    const double a = std::exp(-kTwoPi * f / fs);
    pole_coeff_.push_back(a);
    pole_gain_.push_back(1.0 / std::sqrt(f));
    pole_state_.push_back(0.0);
    one_minus.push_back(1.0 - a);
  }
  // Exact output variance for the summed bank under unit white input:
  // E[y_i y_j] = (1-a_i)(1-a_j) / (1 - a_i a_j).
  for (size_t i = 0; i < pole_coeff_.size(); ++i)
    for (size_t j = 0; j < pole_coeff_.size(); ++j)
      var += pole_gain_[i] * pole_gain_[j] * one_minus[i] * one_minus[j] /
             (1.0 - pole_coeff_[i] * pole_coeff_[j]);
  pink_scale_ = profile_.pink_level > 0 ? profile_.pink_level / std::sqrt(var) : 0.0;

  burst_phase_.resize(profile_.bursts.size());
  for (auto& p : burst_phase_) p = kTwoPi * rng_.uniform();
}

double NoiseSynth::next() {
  double out = 0.0;
  if (profile_.pink_level > 0) {
    const double w = rng_.normal();
    double pink = 0.0;
    for (size_t i = 0; i < pole_state_.size(); ++i) {
      pole_state_[i] = pole_coeff_[i] * pole_state_[i] + (1.0 - pole_coeff_[i]) * w;
      pink += pole_gain_[i] * pole_state_[i];
    }
    out += pink_scale_ * pink;
  }
  const double t = static_cast<double>(sample_index_) / fs_;
  for (size_t b = 0; b < profile_.bursts.size(); ++b) {
    const auto& burst = profile_.bursts[b];
    burst_phase_[b] += kTwoPi * burst.frequency / fs_;
    if (burst.amplitude <= 0 || burst.duty <= 0) continue;
    const double cycle = std::fmod(t, profile_.burst_period);
    if (cycle < burst.duty * profile_.burst_period)
      out += burst.amplitude * std::sin(burst_phase_[b]);
  }
  ++sample_index_;
  return out;
}

Eigen::ArrayXd ambient_noise(const NoiseProfile& profile, double fs, int n_samples,
                             std::uint64_t seed) {
  if (n_samples <= 0) throw DomainError("ambient_noise: n_samples must be > 0");
  NoiseSynth synth(profile, fs, seed);
  Eigen::ArrayXd out(n_samples);
  for (int i = 0; i < n_samples; ++i) out[i] = synth.next();
  return out;
}

Synthesizer::Synthesizer(const AcousticModel& model, std::uint64_t seed)
    : model_(model), noise_(model.noise, model.sample_rate, seed ^ 0x6e6f697365ULL), rng_(seed) {
  model_.validate();
  for (const auto& line : model_.resonance_lines) {
    Resonator r;
    const double radius = std::exp(-std::numbers::pi * line.bandwidth / model_.sample_rate);
    const double theta = kTwoPi * line.frequency / model_.sample_rate;
    r.c1 = 2.0 * radius * std::cos(theta);
    r.c2 = -radius * radius;
    // AR(2) stationary variance under unit white input.
    const double r2 = radius * radius;
    const double var =
        (1.0 + r2) / ((1.0 - r2) * ((1.0 + r2) * (1.0 + r2) - 4.0 * r2 * std::cos(theta) * std::cos(theta)));
    r.input_scale = line.amplitude > 0 ? line.amplitude / std::sqrt(var) : 0.0;
    resonators_.push_back(r);
  }
}

double Synthesizer::wear_gain(double engagement) const {
  return std::max(0.0, 1.0 + model_.wear_gain_slope * (model_.engagement_reference - engagement));
}

AudioBlock Synthesizer::synthesize_block(const Eigen::ArrayXd& omega_at_fs, double engagement) {
  const double fs = model_.sample_rate;
  const int harmonics = model_.harmonic_count();
  if (omega_at_fs.size() > 0) {
    const double max_omega = omega_at_fs.maxCoeff();
    if (omega_at_fs.minCoeff() < 0) throw DomainError("synthesize_block: omega must be >= 0");
    const double max_f0 = model_.fundamental_multiplier * max_omega / kTwoPi;
    if (fs < 4.0 * harmonics * max_f0)
      throw ConfigError("synthesize_block: sample_rate too low for harmonic " +
                        std::to_string(harmonics) + " of " + format_double(max_f0) + " Hz");
  }

  const double gain = wear_gain(engagement);
  AudioBlock block;
  block.start_time = time_;
  block.sample_rate = fs;
  block.samples.resize(omega_at_fs.size());

  for (Eigen::Index k = 0; k < omega_at_fs.size(); ++k) {
    double s = 0.0;
    for (int h = 1; h <= harmonics; ++h)
      s += model_.harmonic_amplitudes[h - 1] * std::sin(h * phase_);
    s *= gain;
    for (auto& res : resonators_) {
      const double w = rng_.normal() * res.input_scale;
      const double y = res.c1 * res.y1 + res.c2 * res.y2 + w;
      res.y2 = res.y1;
      res.y1 = y;
      s += y;
    }
    s += noise_.next();
    block.samples[k] = s;
    phase_ += model_.fundamental_multiplier * omega_at_fs[k] / fs;
    if (phase_ > 1e9) phase_ = std::fmod(phase_, kTwoPi);  // keep sin() accurate on long runs
  }
  time_ += static_cast<double>(omega_at_fs.size()) / fs;
  return block;
}

AudioChain::AudioChain(const AcousticModel& model, std::uint64_t seed)
    : synth_(model, seed), mic_(design_mic_bandpass(model.mic_bandpass, model.sample_rate)) {}

AudioBlock AudioChain::process(const Eigen::ArrayXd& omega_at_fs, double engagement) {
  AudioBlock block = synth_.synthesize_block(omega_at_fs, engagement);
  mic_.process_inplace(block.samples);
  block.samples = (block.samples * synth_.model().adc_gain).cwiseMax(-1.0).cwiseMin(1.0);
  return block;
}

namespace {

// "f:a:b,f:a:b" triplet lists.
std::vector<std::array<double, 3>> parse_triplets(const std::string& text, const std::string& key) {
  std::vector<std::array<double, 3>> out;
  if (text.empty() || text == "none") return out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::array<double, 3> t{};
    std::istringstream is(item);
    std::string field;
    int i = 0;
    while (std::getline(is, field, ':') && i < 3) t[i++] = std::stod(field);
    if (i != 3) throw ConfigError("config key `" + key + "`: expected freq:x:y triplets");
    out.push_back(t);
  }
  return out;
}

}  // namespace

AcousticModel acoustic_model_from_config(const Config& cfg, double no_load_speed) {
  AcousticModel m;
  m.sample_rate = cfg.get_double("audio.sample_rate", m.sample_rate);
  m.harmonic_amplitudes = cfg.get_list("audio.harmonic_amplitudes", m.harmonic_amplitudes);
  m.wear_gain_slope = cfg.get_double("audio.wear_gain_slope", m.wear_gain_slope);
  m.engagement_reference = cfg.get_double("plant.engagement_initial", m.engagement_reference);
  m.fundamental_multiplier = cfg.get_double("audio.fundamental_multiplier", m.fundamental_multiplier);
  m.max_fundamental_hz = m.fundamental_multiplier * no_load_speed / kTwoPi;

  std::string res = "850:0.1:30,1450:0.06:50";
  res = cfg.get_string("audio.resonances", res);
  m.resonance_lines.clear();
  for (const auto& t : parse_triplets(res, "audio.resonances"))
    m.resonance_lines.push_back({t[0], t[1], t[2]});

  m.noise.pink_level = cfg.get_double("audio.noise.pink_level", m.noise.pink_level);
  m.noise.burst_period = cfg.get_double("audio.noise.burst_period", m.noise.burst_period);
  std::string bursts = "410:1.5:0.5,1200:0.3:0.3";
  bursts = cfg.get_string("audio.noise.bursts", bursts);
  m.noise.bursts.clear();
  for (const auto& t : parse_triplets(bursts, "audio.noise.bursts"))
    m.noise.bursts.push_back({t[0], t[1], t[2]});

  m.mic_bandpass.low_cut = cfg.get_double("audio.mic.low_cut", m.mic_bandpass.low_cut);
  m.mic_bandpass.high_cut = cfg.get_double("audio.mic.high_cut", m.mic_bandpass.high_cut);
  m.mic_bandpass.order = cfg.get_int("audio.mic.order", m.mic_bandpass.order);
  m.adc_gain = cfg.get_double("audio.adc_gain", m.adc_gain);
  m.validate();
  return m;
}

}  // namespace afrg
