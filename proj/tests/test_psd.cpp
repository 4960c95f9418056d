#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include "afrg/errors.hpp"
#include "afrg/psd.hpp"
#include "afrg/rng.hpp"

using namespace afrg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent O(N^2) oracle with the same one-sided density convention.
Eigen::ArrayXd naive_psd(const Eigen::ArrayXd& samples, double fs) {
  const int n = static_cast<int>(samples.size());
  const Eigen::ArrayXd w = hann_window(n);
  const Eigen::ArrayXd xw = samples * w;
  const double wsum2 = (w * w).sum();
  Eigen::ArrayXd psd(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> acc(0, 0);
    for (int t = 0; t < n; ++t) acc += xw[t] * std::polar(1.0, -kTwoPi * k * t / n);
    double p = std::norm(acc) / (fs * wsum2);
    if (k > 0 && !(n % 2 == 0 && k == n / 2)) p *= 2.0;
    psd[k] = p;
  }
  return psd;
}

AudioBlock make_block(const Eigen::ArrayXd& samples, double start, double fs = 16000.0) {
  return AudioBlock{samples, start, fs};
}

}  // namespace

TEST_CASE("hann window endpoints, peak, closed form") {
  const Eigen::ArrayXd w9 = hann_window(9);
  CHECK(w9[0] == 0.0);
  CHECK(w9[8] == 0.0);
  CHECK(w9[4] == doctest::Approx(1.0).epsilon(1e-15));

  const Eigen::ArrayXd w8 = hann_window(8);
  for (int k = 0; k < 8; ++k) {
    const double expected = 0.5 * (1.0 - std::cos(kTwoPi * k / 7.0));
    CHECK(std::abs(w8[k] - expected) < 1e-15);
  }
  // Symmetry
  for (int k = 0; k < 8; ++k) CHECK(w8[k] == doctest::Approx(w8[7 - k]).epsilon(1e-15));
  CHECK_THROWS_AS(hann_window(1), DomainError);
}

TEST_CASE("psd of silence is zero") {
  const Eigen::ArrayXd psd = power_spectral_density(Eigen::ArrayXd::Zero(128), 16000.0);
  CHECK(psd.abs().maxCoeff() == 0.0);
  CHECK(psd.size() == 65);
}

TEST_CASE("psd matches the naive DFT oracle") {
  Rng rng(123);
  Eigen::ArrayXd x(64);
  for (int i = 0; i < 64; ++i) x[i] = rng.normal();
  const Eigen::ArrayXd fast = power_spectral_density(x, 1000.0);
  const Eigen::ArrayXd slow = naive_psd(x, 1000.0);
  REQUIRE(fast.size() == slow.size());
  const double scale = slow.maxCoeff();
  CHECK(((fast - slow).abs() / scale).maxCoeff() < 1e-9);
}

TEST_CASE("windowed Parseval identity") {
  Rng rng(9);
  Eigen::ArrayXd x(1600);
  for (int i = 0; i < 1600; ++i) x[i] = rng.normal() + 0.2;
  const double fs = 16000.0;
  const Eigen::ArrayXd psd = power_spectral_density(x, fs);
  const double df = fs / 1600.0;
  const Eigen::ArrayXd w = hann_window(1600);
  const double mean_windowed_power = (x * w).square().sum() / (w * w).sum();
  CHECK((psd * df).sum() == doctest::Approx(mean_windowed_power).epsilon(1e-9));
}

TEST_CASE("encode_frame normalization") {
  EncoderConfig cfg;
  CHECK(cfg.band_bins() == 35);  // default band and resolution

  const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(cfg.window_samples());
  const PsdFrame silent = encode_frame(zero, cfg);
  CHECK(silent.values.size() == 35);
  CHECK(silent.values.abs().maxCoeff() == 0.0);  // degenerate min == max rule

  // 350 Hz sits exactly on bin 35 of the 10 Hz grid -> band index 35 - 23 = 12.
  Eigen::ArrayXd sine(cfg.window_samples());
  for (int t = 0; t < sine.size(); ++t) sine[t] = std::sin(kTwoPi * 350.0 * t / cfg.sample_rate);
  const PsdFrame frame = encode_frame(sine, cfg);
  int argmax = 0;
  frame.values.maxCoeff(&argmax);
  CHECK(argmax == 12);
  CHECK(frame.values[12] == 1.0);
  CHECK(frame.values.minCoeff() == 0.0);
  for (int i = 0; i < 35; ++i)
    if (std::abs(i - argmax) > 2) CHECK(frame.values[i] < 0.01);

  CHECK_THROWS_AS(encode_frame(Eigen::ArrayXd::Zero(10), cfg), DomainError);
}

TEST_CASE("amplitude invariance of normalized frames") {
  EncoderConfig cfg;
  Rng rng(4);
  Eigen::ArrayXd x(cfg.window_samples());
  for (int t = 0; t < x.size(); ++t)
    x[t] = std::sin(kTwoPi * 310.0 * t / cfg.sample_rate) + 0.3 * rng.normal();
  const PsdFrame base = encode_frame(x, cfg);
  for (double c : {0.1, 0.5, 3.0, 10.0}) {
    const PsdFrame scaled = encode_frame((c * x).eval(), cfg);
    CHECK((scaled.values - base.values).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("streaming frame rate contract") {
  EncoderConfig cfg;
  StreamingEncoder enc(cfg);

  // Fewer than N samples: nothing.
  auto none = enc.push_audio(make_block(Eigen::ArrayXd::Random(1000), 0.0));
  CHECK(none.empty());

  // Completing the first window yields the warm-up frame...
  auto first = enc.push_audio(make_block(Eigen::ArrayXd::Random(600), 1000.0 / 16000.0));
  CHECK(first.size() == 1);
  CHECK(first[0].frame_time == doctest::Approx(0.1));

  // ...then exactly one second yields exactly f_c = 20 frames.
  auto twenty = enc.push_audio(make_block(Eigen::ArrayXd::Random(16000), 1600.0 / 16000.0));
  CHECK(twenty.size() == 20);
  CHECK(twenty.back().frame_time == doctest::Approx(0.1 + 20 * 0.05));
}

TEST_CASE("consecutive frames overlap by half a window and recompute offline") {
  EncoderConfig cfg;
  CHECK(cfg.hop_samples() * 2 == cfg.window_samples());  // 50% overlap at defaults

  Rng rng(17);
  Eigen::ArrayXd audio(4000);
  for (int i = 0; i < 4000; ++i)
    audio[i] = std::sin(kTwoPi * 300.0 * i / 16000.0) + 0.1 * rng.normal();

  StreamingEncoder enc(cfg);
  auto frames = enc.push_audio(make_block(audio, 0.0));
  REQUIRE(frames.size() == 4);  // windows ending at samples 1600, 2400, 3200, 4000

  // Offline recomputation of frame 2 from the raw stream, bit-identical.
  const PsdFrame offline = encode_frame(audio.segment(800, 1600).eval(), cfg);
  CHECK((frames[1].values == offline.values).all());
}

TEST_CASE("streaming equals one-shot processing bit-for-bit") {
  EncoderConfig cfg;
  Rng rng(31);
  Eigen::ArrayXd audio(3 * 16000);
  for (Eigen::Index i = 0; i < audio.size(); ++i) audio[i] = rng.normal();

  StreamingEncoder whole(cfg);
  const auto frames_whole = whole.push_audio(make_block(audio, 0.0));

  StreamingEncoder chunked(cfg);
  std::vector<PsdFrame> frames_chunks;
  Eigen::Index pos = 0;
  const int sizes[] = {700, 1600, 23, 4096, 12000, 800};
  int si = 0;
  while (pos < audio.size()) {
    const Eigen::Index len = std::min<Eigen::Index>(sizes[si++ % 6], audio.size() - pos);
    auto out = chunked.push_audio(
        make_block(audio.segment(pos, len).eval(), static_cast<double>(pos) / 16000.0));
    frames_chunks.insert(frames_chunks.end(), out.begin(), out.end());
    pos += len;
  }
  REQUIRE(frames_whole.size() == frames_chunks.size());
  for (size_t i = 0; i < frames_whole.size(); ++i) {
    CHECK(frames_whole[i].frame_time == frames_chunks[i].frame_time);
    CHECK((frames_whole[i].values == frames_chunks[i].values).all());
  }
}

TEST_CASE("timestamp gaps are stream errors") {
  EncoderConfig cfg;
  StreamingEncoder enc(cfg);
  enc.push_audio(make_block(Eigen::ArrayXd::Zero(1600), 0.0));
  CHECK_THROWS_AS(enc.push_audio(make_block(Eigen::ArrayXd::Zero(100), 0.25)), StreamError);
  try {
    enc.push_audio(make_block(Eigen::ArrayXd::Zero(100), 0.5));
  } catch (const StreamError& e) {
    CHECK(e.gap_seconds == doctest::Approx(0.4));
  }
}

TEST_CASE("current_input stacking, zero fill, and warm-up flag") {
  EncoderConfig cfg;
  StreamingEncoder enc(cfg);

  const PsdWindow empty = enc.current_input();
  CHECK(empty.warming_up);
  CHECK(empty.values.rows() == 35);
  CHECK(empty.values.cols() == 40);
  CHECK(empty.values.cwiseAbs().maxCoeff() == 0.0);

  // One frame: columns 0..38 zero, column 39 equals that frame.
  Eigen::ArrayXd audio(1600);
  Rng rng(2);
  for (int i = 0; i < 1600; ++i)
    audio[i] = std::sin(kTwoPi * 400.0 * i / 16000.0) + 0.05 * rng.normal();
  auto frames = enc.push_audio(make_block(audio, 0.0));
  REQUIRE(frames.size() == 1);
  const PsdWindow one = enc.current_input();
  CHECK(one.warming_up);
  CHECK(one.values.leftCols(39).cwiseAbs().maxCoeff() == 0.0);
  CHECK((one.values.col(39).array() == frames[0].values).all());

  // Stationary input: after n frames the flag clears and columns repeat.
  StreamingEncoder full(cfg);
  Eigen::ArrayXd stationary(16000 * 3);
  for (Eigen::Index i = 0; i < stationary.size(); ++i)
    stationary[i] = std::sin(kTwoPi * 300.0 * i / 16000.0);
  full.push_audio(make_block(stationary, 0.0));
  const PsdWindow window = full.current_input();
  CHECK_FALSE(window.warming_up);
  CHECK(window.values.rows() == 35);
  CHECK(window.values.cols() == 40);
  for (int j = 1; j < 40; ++j)
    CHECK((window.values.col(j) - window.values.col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("window binary dump round trip") {
  EncoderConfig cfg;
  StreamingEncoder enc(cfg);
  Eigen::ArrayXd audio(16000 * 2 + 800);
  for (Eigen::Index i = 0; i < audio.size(); ++i)
    audio[i] = std::sin(kTwoPi * 350.0 * i / 16000.0);
  enc.push_audio(make_block(audio, 0.0));
  const PsdWindow window = enc.current_input();
  dump_window_binary(window, "test_window.bin");
  const PsdWindow back = load_window_binary("test_window.bin");
  CHECK(back.values.rows() == window.values.rows());
  CHECK(back.values.cols() == window.values.cols());
  CHECK((back.values.cast<float>().array() == window.values.cast<float>().array()).all());
  std::remove("test_window.bin");
}

TEST_CASE("encoder config validation") {
  EncoderConfig cfg;
  cfg.band_high = 584.0;  // centres give 36 bins, nominal count says 35
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = EncoderConfig{};
  cfg.control_rate = 19.0;  // fs / f_c not an integer
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = EncoderConfig{};
  cfg.band_high = 9000.0;  // above Nyquist
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  const Config file = Config::from_string("encoder.band_low = 240\nencoder.band_high = 580\n");
  const EncoderConfig parsed = encoder_config_from_config(file);
  CHECK(parsed.band_bins() == 34);
}
