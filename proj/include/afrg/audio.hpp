#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "afrg/config.hpp"
#include "afrg/rng.hpp"

namespace afrg {

struct AudioBlock {
  Eigen::ArrayXd samples;
  double start_time = 0.0;
  double sample_rate = 0.0;
};

struct ResonanceLine {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;  // target RMS contribution
  double bandwidth = 0.0;  // Hz (-3 dB width of the resonator)
};

struct TonalBurst {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;
  double duty = 0.0;  // fraction of the burst period the tone is on
};

struct NoiseProfile {
  double pink_level = 0.0;  // RMS of the pink component
  std::vector<TonalBurst> bursts;
  double burst_period = 2.0;  // s
};

struct MicBandpass {
  double low_cut = 80.0;    // Hz
  double high_cut = 4000.0; // Hz
  int order = 2;            // per edge; even
};

struct AcousticModel {
  double sample_rate = 16000.0;
  std::vector<double> harmonic_amplitudes = {1.0, 0.5, 0.25, 0.12};
  double wear_gain_slope = 2.0;
  double engagement_reference = 0.5;  // mu_0 used by the wear gain
  double fundamental_multiplier = 1.0;
  double max_fundamental_hz = 583.34;  // aliasing guard; tie to no_load_speed
  std::vector<ResonanceLine> resonance_lines = {{850.0, 0.10, 30.0}, {1450.0, 0.06, 50.0}};
  NoiseProfile noise = {0.02, {{410.0, 1.5, 0.5}, {1200.0, 0.3, 0.3}}, 2.0};
  MicBandpass mic_bandpass;
  double adc_gain = 0.18;  // applied just before the hard limiter

  int harmonic_count() const { return static_cast<int>(harmonic_amplitudes.size()); }
  void validate() const;  // throws ConfigError (includes the aliasing guard)
};

// One biquad, transposed direct form II.
struct BiquadSection {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double s1 = 0, s2 = 0;

  double process(double x) {
    const double y = b0 * x + s1;
    s1 = b1 * x - a1 * y + s2;
    s2 = b2 * x - a2 * y;
    return y;
  }
  std::complex<double> response(double freq, double fs) const;
};

class BiquadCascade {
 public:
  BiquadCascade() = default;
  explicit BiquadCascade(std::vector<BiquadSection> sections) : sections_(std::move(sections)) {}

  void process_inplace(Eigen::ArrayXd& samples);
  std::complex<double> response(double freq, double fs) const;
  const std::vector<BiquadSection>& sections() const { return sections_; }
  void reset();

 private:
  std::vector<BiquadSection> sections_;
};

// Butterworth band-pass as a high-pass/low-pass biquad cascade.
BiquadCascade design_mic_bandpass(const MicBandpass& spec, double fs);

// Filter a block through the cascade, preserving state across calls.
Eigen::ArrayXd mic_filter(const Eigen::ArrayXd& samples, BiquadCascade& filter);

// Streaming pink + tonal-burst generator (deterministic given seed).
class NoiseSynth {
 public:
  NoiseSynth(const NoiseProfile& profile, double fs, std::uint64_t seed);
  double next();

 private:
  NoiseProfile profile_;
  double fs_;
  Rng rng_;
  std::uint64_t sample_index_ = 0;
  std::vector<double> pole_coeff_, pole_gain_, pole_state_;
  double pink_scale_ = 0.0;
  std::vector<double> burst_phase_;
};

// Stateless form: n samples of ambient noise from a fresh generator.
Eigen::ArrayXd ambient_noise(const NoiseProfile& profile, double fs, int n_samples,
                             std::uint64_t seed);

// Rotor-sound synthesizer: harmonic stack with a phase accumulator, decaying
// resonators, and ambient noise. Stateful across blocks (continuous phase,
// filter states, one rng stream).
class Synthesizer {
 public:
  Synthesizer(const AcousticModel& model, std::uint64_t seed);

  // omega_at_fs: tool angular velocity per output sample, rad/s.
  AudioBlock synthesize_block(const Eigen::ArrayXd& omega_at_fs, double engagement);

  double wear_gain(double engagement) const;
  const AcousticModel& model() const { return model_; }

 private:
  AcousticModel model_;
  double phase_ = 0.0;
  double time_ = 0.0;
  NoiseSynth noise_;
  Rng rng_;
  struct Resonator {
    double c1 = 0, c2 = 0, y1 = 0, y2 = 0, input_scale = 0;
  };
  std::vector<Resonator> resonators_;
};

// Full sensor chain: synthesizer -> contact-mic band-pass -> ADC gain ->
// hard limiter at +-1.
class AudioChain {
 public:
  AudioChain(const AcousticModel& model, std::uint64_t seed);
  AudioBlock process(const Eigen::ArrayXd& omega_at_fs, double engagement);
  const AcousticModel& model() const { return synth_.model(); }

 private:
  Synthesizer synth_;
  BiquadCascade mic_;
};

AcousticModel acoustic_model_from_config(const Config& cfg, double no_load_speed);

}  // namespace afrg
