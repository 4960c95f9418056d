#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "afrg/errors.hpp"
#include "afrg/psdregnet.hpp"

using namespace afrg;
using T = PsdRegNet::T;

namespace {

// Full architecture at a reduced spatial size: 8x9 -> 6x7 -> 4x5 -> pool 4x4.
ModelFingerprint small_fingerprint() {
  ModelFingerprint fp;
  fp.bins = 8;
  fp.frames = 9;
  return fp;
}

T random_input(const ModelFingerprint& fp, int batch, Rng& rng) {
  T x({batch, 1, fp.bins, fp.frames});
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] = rng.uniform();
  return x;
}

TrainingDataset synthetic_dataset(const ModelFingerprint& fp, int items_per_recording,
                                  int recordings, std::uint64_t seed) {
  // The bright row's position encodes the force; directly learnable.
  TrainingDataset ds;
  Rng rng(seed);
  for (int rec = 0; rec < recordings; ++rec) {
    for (int i = 0; i < items_per_recording; ++i) {
      TrainingExample ex;
      ex.recording = rec;
      ex.time = i * 0.05;
      const int row = static_cast<int>(rng.uniform_int(fp.bins));
      ex.window = Eigen::MatrixXd::Zero(fp.bins, fp.frames);
      for (int j = 0; j < fp.frames; ++j) {
        ex.window(row, j) = 1.0;
        for (int r = 0; r < fp.bins; ++r) ex.window(r, j) += 0.05 * rng.uniform();
      }
      ex.force = 1.0 + 0.5 * row;
      ds.items.push_back(std::move(ex));
    }
  }
  ds.collection_engagement = 0.5;
  ds.targets = {2, 3, 4};
  ds.modes = {"continuous", "intermittent"};
  return ds;
}

}  // namespace

TEST_CASE("temporal mask initialisation is linear from 0 to 1") {
  PsdRegNet net;
  CHECK(net.mask.size() == 40);
  CHECK(net.mask.data[0] == 0.0);
  CHECK(net.mask.data[39] == 1.0);
  for (int j = 0; j < 40; ++j)
    CHECK(net.mask.data[j] == doctest::Approx(j / 39.0).epsilon(1e-15));
}

TEST_CASE("temporal mask application") {
  Rng rng(1);
  Eigen::MatrixXd x(3, 4);
  x.setRandom();

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  CHECK((PsdRegNet::apply_temporal_mask(x, ones) - x).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd m(4);
  m << 0.1, 0.4, 0.7, 1.0;
  const Eigen::MatrixXd masked = PsdRegNet::apply_temporal_mask(x, m);
  for (int j = 0; j < 4; ++j)
    CHECK((masked.col(j) - m[j] * x.col(j)).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::VectorXd wrong(3);
  CHECK_THROWS_AS(PsdRegNet::apply_temporal_mask(x, wrong), DomainError);
}

TEST_CASE("shape trace reproduces every architecture row") {
  PsdRegNet net;
  net.init_params(0);
  const auto trace = net.shape_trace(2);
  auto expect = [&](const std::string& name, std::vector<int> shape) {
    for (const auto& [n, s] : trace)
      if (n == name) {
        CHECK(s == shape);
        return;
      }
    FAIL("missing stage ", name);
  };
  expect("input", {1, 35, 40});
  expect("conv1", {16, 33, 38});
  expect("bn1", {16, 33, 38});
  expect("relu1", {16, 33, 38});
  expect("conv2", {32, 31, 36});
  expect("bn2", {32, 31, 36});
  expect("relu2", {32, 31, 36});
  expect("pool", {32, 4, 4});
  expect("flatten", {512});
  expect("fc1", {64});
  expect("fc2", {1});
}

TEST_CASE("parameter count matches the per-layer arithmetic") {
  PsdRegNet net;
  auto count_of = [&](const std::string& name) -> Eigen::Index {
    for (auto& p : net.parameters())
      if (p.name == name) return p.tensor->size();
    return -1;
  };
  CHECK(count_of("conv1_w") + count_of("conv1_b") == 416);
  CHECK(count_of("bn1_gamma") + count_of("bn1_beta") == 32);
  CHECK(count_of("conv2_w") + count_of("conv2_b") == 12832);
  CHECK(count_of("bn2_gamma") + count_of("bn2_beta") == 64);
  CHECK(count_of("fc1_w") + count_of("fc1_b") == 32832);
  CHECK(count_of("fc2_w") + count_of("fc2_b") == 65);
  CHECK(count_of("mask") == 40);
  CHECK(net.parameter_count() == 416 + 32 + 12832 + 64 + 32832 + 65 + 40);
  CHECK(net.parameter_count() == 46281);
}

TEST_CASE("zero input with zero biases propagates to the head bias") {
  PsdRegNet net;  // fresh: weights zero, gammas one, running stats unit
  net.fc2_b.data[0] = 0.37;
  T x({1, 1, 35, 40});
  const T out = net.forward_eval(x);
  CHECK(out.data[0] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("gradient check: full architecture at reduced size") {
  const ModelFingerprint fp = small_fingerprint();
  PsdRegNet net(fp);
  net.init_params(3);
  Rng rng(4);
  T x = random_input(fp, 4, rng);
  T target({4, 1});
  for (int i = 0; i < 4; ++i) target.data[i] = rng.normal();

  const auto result = nn::gradient_check(net, x, target, 1e-5, /*max_checks_per_tensor=*/1200,
                                         /*check_input=*/true);
  CAPTURE(result.worst_param);
  CAPTURE(result.worst_index);
  CHECK(result.checked > 3000);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("mask gradients flow harder to late columns that carry signal") {
  const ModelFingerprint fp = small_fingerprint();
  PsdRegNet net(fp);
  net.init_params(5);
  Rng rng(6);
  T x({2, 1, fp.bins, fp.frames});
  // Only the last three time columns carry any input.
  for (int b = 0; b < 2; ++b)
    for (int r = 0; r < fp.bins; ++r)
      for (int j = fp.frames - 3; j < fp.frames; ++j)
        x.data[(b * fp.bins + r) * fp.frames + j] = 0.5 + 0.5 * rng.uniform();
  T target({2, 1});
  target.data << 1.0, -1.0;
  net.loss_backward(x, target, nullptr);

  double max_early = 0.0, min_late = 1e300;
  for (int j = 0; j < fp.frames - 3; ++j)
    max_early = std::max(max_early, std::abs(net.mask.grad[j]));
  for (int j = fp.frames - 3; j < fp.frames; ++j)
    min_late = std::min(min_late, std::abs(net.mask.grad[j]));
  CHECK(max_early == 0.0);  // no input reached those columns
  CHECK(min_late > 0.0);
}

TEST_CASE("training learns, is deterministic, and returns the best epoch") {
  const ModelFingerprint fp = small_fingerprint();
  const TrainingDataset ds = synthetic_dataset(fp, 60, 4, 11);

  TrainSettings settings;  // table defaults except desk-scale epochs
  settings.epochs = 25;
  settings.learning_rate = 3e-3;

  std::vector<EpochStats> history;
  PsdRegNet net = train(ds, settings, 7, &history);
  REQUIRE(history.size() == 25);
  CHECK(history.back().train_loss < history.front().train_loss);
  CHECK(history.back().val_loss < history.front().val_loss);

  // Bit-identical re-run.
  std::vector<EpochStats> history2;
  PsdRegNet net2 = train(ds, settings, 7, &history2);
  auto params1 = net.parameters();
  auto params2 = net2.parameters();
  for (size_t i = 0; i < params1.size(); ++i)
    CHECK((params1[i].tensor->data == params2[i].tensor->data).all());
  for (size_t i = 0; i < history.size(); ++i) {
    CHECK(history[i].train_loss == history2[i].train_loss);
    CHECK(history[i].val_loss == history2[i].val_loss);
  }

  // Different seed diverges.
  PsdRegNet net3 = train(ds, settings, 8);
  bool any_diff = false;
  auto params3 = net3.parameters();
  for (size_t i = 0; i < params1.size(); ++i)
    if (!(params1[i].tensor->data == params3[i].tensor->data).all()) any_diff = true;
  CHECK(any_diff);

  // Label z-score round trip through the stored statistics.
  const double y = 3.123456789;
  const double z = (y - net.label_mean) / net.label_std;
  CHECK(z * net.label_std + net.label_mean == doctest::Approx(y).epsilon(1e-12));

  // An estimate on a training-style window lands near its label.
  PsdWindow window;
  window.values = ds.items[5].window;
  window.end_time = 1.0;
  window.warming_up = false;
  const double fhat = net.estimate_force(window);
  CHECK(std::abs(fhat - ds.items[5].force) < 1.0);
  CHECK(net.latencies_ms().size() == 1);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const ModelFingerprint fp = small_fingerprint();
  PsdRegNet net(fp);
  net.init_params(21);
  net.label_mean = 3.25;
  net.label_std = 1.75;
  net.collection_engagement = 0.45;
  // Make running stats non-trivial.
  Rng rng(22);
  T warm = random_input(fp, 4, rng);
  net.forward(warm, nn::Mode::train, false, nullptr);

  const std::string path = "test_ckpt.bin";
  save_checkpoint(net, path);
  PsdRegNet back = load_checkpoint(path);
  CHECK(back.label_mean == net.label_mean);
  CHECK(back.label_std == net.label_std);
  CHECK(back.collection_engagement == net.collection_engagement);
  CHECK(back.fingerprint.bins == fp.bins);

  for (int trial = 0; trial < 100; ++trial) {
    T x = random_input(fp, 1, rng);
    const T a = net.forward_eval(x);
    const T b = back.forward_eval(x);
    CHECK(a.data[0] == b.data[0]);
  }
  std::remove(path.c_str());
}

TEST_CASE("truncated checkpoints fail to load") {
  const ModelFingerprint fp = small_fingerprint();
  PsdRegNet net(fp);
  net.init_params(31);
  const std::string path = "test_ckpt_trunc.bin";
  save_checkpoint(net, path);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  for (size_t keep : {bytes.size() - 5, bytes.size() / 2, size_t(20), size_t(3)}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(keep));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  }
  std::remove(path.c_str());
}

TEST_CASE("fingerprint mismatch is a hard error naming both sides") {
  PsdRegNet net;  // default fingerprint: band [230, 580), f_c 20
  const std::string path = "test_ckpt_fp.bin";
  save_checkpoint(net, path);
  PsdRegNet loaded = load_checkpoint(path);
  std::remove(path.c_str());

  EncoderConfig enc;
  enc.band_low = 240.0;  // 34 bins instead of 35
  try {
    require_fingerprint_match(loaded, enc);
    FAIL("expected a fingerprint mismatch");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("model") != std::string::npos);
    CHECK(what.find("encoder") != std::string::npos);
    CHECK(what.find("230") != std::string::npos);
    CHECK(what.find("240") != std::string::npos);
  }

  EncoderConfig good;
  require_fingerprint_match(loaded, good);  // must not throw
}

TEST_CASE("estimate_force rejects mismatched windows") {
  PsdRegNet net;
  net.init_params(1);
  PsdWindow wrong;
  wrong.values = Eigen::MatrixXd::Zero(34, 40);
  CHECK_THROWS_AS(net.estimate_force(wrong), ConfigError);
}
