#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "afrg/nn.hpp"

using namespace afrg;
using nn::Tensor;
using T = Tensor<double>;

namespace {

T random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  T t(std::move(shape));
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = scale * rng.normal();
  return t;
}

// Quadruple-loop convolution oracle (cross-correlation, stride 1).
T conv_oracle(const T& x, const T& w, const T& b, int padding) {
  const int batch = x.dim(0), cin = x.dim(1), h = x.dim(2), ww = x.dim(3);
  const int cout = w.dim(0), k = w.dim(2);
  const int oh = h + 2 * padding - k + 1, ow = ww + 2 * padding - k + 1;
  T y({batch, cout, oh, ow});
  for (int n = 0; n < batch; ++n)
    for (int co = 0; co < cout; ++co)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = b.data[co];
          for (int ci = 0; ci < cin; ++ci)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int ii = i + u - padding, jj = j + v - padding;
                if (ii < 0 || ii >= h || jj < 0 || jj >= ww) continue;
                acc += w.data[((co * cin + ci) * k + u) * k + v] *
                       x.data[((n * cin + ci) * h + ii) * ww + jj];
              }
          y.data[((n * cout + co) * oh + i) * ow + j] = acc;
        }
  return y;
}

struct LinearModel {
  T w, b;
  std::vector<nn::ParamView<double>> parameters() { return {{"w", &w}, {"b", &b}}; }
  double loss_forward(const T& x, const T& target) {
    return nn::mse_loss(nn::linear_forward(x, w, b), target).first;
  }
  double loss_backward(const T& x, const T& target, T* dinput) {
    w.zero_grad();
    b.zero_grad();
    auto [loss, dy] = nn::mse_loss(nn::linear_forward(x, w, b), target);
    const T dx = nn::linear_backward(x, w, w, b, dy);
    if (dinput) *dinput = dx;
    return loss;
  }
};

struct MlpModel {
  T w1, b1, w2, b2;
  std::vector<nn::ParamView<double>> parameters() {
    return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
  }
  double loss_forward(const T& x, const T& target) {
    const T h = nn::relu_forward(nn::linear_forward(x, w1, b1));
    return nn::mse_loss(nn::linear_forward(h, w2, b2), target).first;
  }
  double loss_backward(const T& x, const T& target, T* dinput) {
    for (auto& p : parameters()) p.tensor->zero_grad();
    const T pre = nn::linear_forward(x, w1, b1);
    const T h = nn::relu_forward(pre);
    auto [loss, dy] = nn::mse_loss(nn::linear_forward(h, w2, b2), target);
    T d = nn::linear_backward(h, w2, w2, b2, dy);
    d = nn::relu_backward(pre, d);
    const T dx = nn::linear_backward(x, w1, w1, b1, d);
    if (dinput) *dinput = dx;
    return loss;
  }
};

}  // namespace

TEST_CASE("conv2d output shapes follow the architecture table") {
  Rng rng(1);
  const T x = random_tensor({1, 1, 35, 40}, rng);
  const T w = random_tensor({16, 1, 5, 5}, rng);
  const T b = random_tensor({16}, rng);
  const T y = nn::conv2d_forward(x, w, b, 1);
  CHECK(y.shape == std::vector<int>({1, 16, 33, 38}));

  const T w2 = random_tensor({32, 16, 5, 5}, rng);
  const T b2 = random_tensor({32}, rng);
  const T y2 = nn::conv2d_forward(y, w2, b2, 1);
  CHECK(y2.shape == std::vector<int>({1, 32, 31, 36}));
}

TEST_CASE("conv2d with zero weights returns the bias") {
  Rng rng(2);
  const T x = random_tensor({2, 3, 6, 7}, rng);
  T w({4, 3, 3, 3});
  T b({4});
  b.data << 0.5, -1.0, 2.0, 0.0;
  const T y = nn::conv2d_forward(x, w, b, 1);
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < y.dim(2) * y.dim(3); ++i)
        CHECK(y.data[(n * 4 + c) * y.dim(2) * y.dim(3) + i] == b.data[c]);
}

TEST_CASE("conv2d matches the quadruple-loop oracle") {
  Rng rng(3);
  const T x = random_tensor({3, 1, 6, 7}, rng);
  const T w = random_tensor({2, 1, 5, 5}, rng);
  const T b = random_tensor({2}, rng);
  for (int padding : {0, 1, 2}) {
    const T fast = nn::conv2d_forward(x, w, b, padding);
    const T slow = conv_oracle(x, w, b, padding);
    CHECK((fast.data - slow.data).abs().maxCoeff() < 1e-12);
  }
  // Multi-channel case.
  const T x2 = random_tensor({2, 5, 8, 6}, rng);
  const T w2 = random_tensor({3, 5, 3, 3}, rng);
  const T b2 = random_tensor({3}, rng);
  const T fast2 = nn::conv2d_forward(x2, w2, b2, 1);
  const T slow2 = conv_oracle(x2, w2, b2, 1);
  CHECK((fast2.data - slow2.data).abs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(nn::conv2d_forward(x2, w, b, 1), DomainError);
}

TEST_CASE("batchnorm2d normalizes per channel in train mode") {
  Rng rng(4);
  const int batch = 6, channels = 3, h = 5, w = 4;
  T x = random_tensor({batch, channels, h, w}, rng, 2.5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] += 1.5;
  T gamma({channels}), beta({channels});
  gamma.data.setOnes();
  nn::BatchNormRunning<double> running(channels);
  const T y = nn::batchnorm2d_forward(x, gamma, beta, running, nn::Mode::train);

  const int plane = h * w;
  for (int c = 0; c < channels; ++c) {
    double sum = 0, sq = 0;
    for (int b = 0; b < batch; ++b)
      for (int i = 0; i < plane; ++i) {
        const double v = y.data[(b * channels + c) * plane + i];
        sum += v;
        sq += v * v;
      }
    const double count = batch * plane;
    const double mean = sum / count;
    const double var = sq / count - mean * mean;  // biased
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(var - 1.0) < 1e-4);
  }

  // Against a directly computed per-channel statistics oracle.
  for (int c = 0; c < channels; ++c) {
    double sum = 0, sq = 0;
    for (int b = 0; b < batch; ++b)
      for (int i = 0; i < plane; ++i) {
        const double v = x.data[(b * channels + c) * plane + i];
        sum += v;
        sq += v * v;
      }
    const double count = batch * plane;
    const double mean = sum / count;
    const double var = sq / count - mean * mean;
    for (int b = 0; b < batch; ++b)
      for (int i = 0; i < plane; ++i) {
        const double expected =
            (x.data[(b * channels + c) * plane + i] - mean) / std::sqrt(var + 1e-5);
        CHECK(std::abs(y.data[(b * channels + c) * plane + i] - expected) < 1e-10);
      }
  }
}

TEST_CASE("batchnorm2d edge cases") {
  T x({1, 2, 3, 3});
  T gamma({2}), beta({2});
  gamma.data.setOnes();
  nn::BatchNormRunning<double> running(2);
  CHECK_THROWS_AS(nn::batchnorm2d_forward(x, gamma, beta, running, nn::Mode::train), DomainError);

  // Constant channel collapses to ~0 via the eps floor.
  T xc({4, 1, 2, 2});
  xc.data.setConstant(3.7);
  T g1({1}), b1({1});
  g1.data.setOnes();
  nn::BatchNormRunning<double> r1(1);
  const T y = nn::batchnorm2d_forward(xc, g1, b1, r1, nn::Mode::train);
  CHECK(y.data.abs().maxCoeff() < 1e-6);

  // Eval mode with unit running stats is a pass-through for gamma=1, beta=0.
  nn::BatchNormRunning<double> unit(1);
  const T ye = nn::batchnorm2d_forward(xc, g1, b1, unit, nn::Mode::eval);
  CHECK((ye.data - xc.data).abs().maxCoeff() < 1e-4);  // 1/sqrt(1+eps) factor
}

TEST_CASE("adaptive average pool shapes and values") {
  Rng rng(5);
  const T x = random_tensor({2, 32, 31, 36}, rng);
  const T y = nn::adaptive_avg_pool2d(x, 4, 4);
  CHECK(y.shape == std::vector<int>({2, 32, 4, 4}));

  T constant({1, 3, 9, 11});
  constant.data.setConstant(2.25);
  const T yc = nn::adaptive_avg_pool2d(constant, 4, 4);
  for (Eigen::Index i = 0; i < yc.size(); ++i) CHECK(yc.data[i] == doctest::Approx(2.25));

  // 8x8 ramp 1..64: regions are exact 2x2 blocks.
  T ramp({1, 1, 8, 8});
  for (int i = 0; i < 64; ++i) ramp.data[i] = i + 1.0;
  const T yr = nn::adaptive_avg_pool2d(ramp, 4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double expected = (2.0 * i + 1.5) * 8.0 + (2.0 * j + 1.5) + 1.0 - 1.0;
      // region rows {2i, 2i+1}, cols {2j, 2j+1}: mean = 8*(2i+0.5) + (2j+1.5)
      const double direct = 0.25 * ((2 * i) * 8 + 2 * j + 1 + (2 * i) * 8 + 2 * j + 2 +
                                    (2 * i + 1) * 8 + 2 * j + 1 + (2 * i + 1) * 8 + 2 * j + 2);
      CHECK(yr.data[i * 4 + j] == doctest::Approx(direct));
      (void)expected;
    }

  CHECK_THROWS_AS(nn::adaptive_avg_pool2d(T({1, 1, 3, 8}), 4, 4), DomainError);
}

TEST_CASE("linear layer") {
  Rng rng(6);
  const T x = random_tensor({3, 4}, rng);
  const T w = random_tensor({2, 4}, rng);
  const T b = random_tensor({2}, rng);
  const T y = nn::linear_forward(x, w, b);
  CHECK(y.shape == std::vector<int>({3, 2}));
  for (int n = 0; n < 3; ++n)
    for (int o = 0; o < 2; ++o) {
      double acc = b.data[o];
      for (int i = 0; i < 4; ++i) acc += w.data[o * 4 + i] * x.data[n * 4 + i];
      CHECK(std::abs(y.data[n * 2 + o] - acc) < 1e-13);
    }

  T wz({2, 4});
  const T yz = nn::linear_forward(x, wz, b);
  for (int n = 0; n < 3; ++n)
    for (int o = 0; o < 2; ++o) CHECK(yz.data[n * 2 + o] == b.data[o]);

  // Flatten 32x4x4 -> 512 -> FC 64 (architecture table sizes).
  const T pooled = random_tensor({2, 32, 4, 4}, rng);
  const T flat = pooled.reshaped({2, 512});
  const T w64 = random_tensor({64, 512}, rng, 0.05);
  const T b64 = random_tensor({64}, rng);
  CHECK(nn::linear_forward(flat, w64, b64).shape == std::vector<int>({2, 64}));
  CHECK_THROWS_AS(nn::linear_forward(flat, w, b), DomainError);
}

TEST_CASE("dropout") {
  Rng rng(7);
  T x({1000000});
  x.data.setOnes();

  Rng r1(11);
  const T eval_out = nn::dropout_forward(x, 0.3, nn::Mode::eval, r1);
  CHECK((eval_out.data == x.data).all());

  Rng r2(12);
  const T p0 = nn::dropout_forward(x, 0.0, nn::Mode::train, r2);
  CHECK((p0.data == x.data).all());

  Rng r3(13);
  nn::DropoutCache<double> cache;
  const T out = nn::dropout_forward(x, 0.3, nn::Mode::train, r3, &cache);
  const double n = static_cast<double>(x.size());
  const double mean = out.data.mean();
  const double zero_fraction = (out.data == 0.0).count() / n;
  const double sigma_mean = std::sqrt(0.3 / 0.7 / n);
  const double sigma_frac = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(mean - 1.0) < 3 * sigma_mean);
  CHECK(std::abs(zero_fraction - 0.3) < 3 * sigma_frac);

  CHECK_THROWS_AS(nn::dropout_forward(x, 1.0, nn::Mode::train, r3), DomainError);
}

TEST_CASE("mse loss") {
  T a({2, 1}), b({2, 1});
  a.data << 1.0, 3.0;
  b.data << 1.0, 3.0;
  CHECK(nn::mse_loss(a, b).first == 0.0);

  b.data << 0.5, 2.5;  // uniform offset 0.5
  CHECK(nn::mse_loss(a, b).first == doctest::Approx(0.25));

  b.data << 0.0, 1.0;  // {(1,0),(3,1)} -> (1 + 4)/2
  auto [loss, grad] = nn::mse_loss(a, b);
  CHECK(loss == doctest::Approx(2.5));
  CHECK(grad.data[0] == doctest::Approx(2.0 * 1.0 / 2.0));
  CHECK(grad.data[1] == doctest::Approx(2.0 * 2.0 / 2.0));

  T c({3});
  CHECK_THROWS_AS(nn::mse_loss(a, c), DomainError);
}

TEST_CASE("adam step") {
  T theta({3});
  theta.data << 1.0, -2.0, 0.5;
  T::Array zero_grad = T::Array::Zero(3);
  nn::AdamState<double> state;
  state.lr = 1e-3;
  const T before = theta;
  nn::adam_step(theta, zero_grad, state);
  CHECK((theta.data == before.data).all());

  // Single step on a scalar: delta = -lr * g / (|g| + eps) ~ -lr * sign(g).
  T scalar({1});
  scalar.data << 0.7;
  nn::AdamState<double> s2;
  s2.lr = 1e-2;
  T::Array g(1);
  g << 0.123;
  nn::adam_step(scalar, g, s2);
  const double expected = 0.7 - 1e-2 * 0.123 / (std::abs(0.123) + 1e-8);
  CHECK(scalar.data[0] == doctest::Approx(expected).epsilon(1e-12));

  // Pure weight decay pulls a positive parameter down.
  T decayed({1});
  decayed.data << 2.0;
  nn::AdamState<double> s3;
  s3.lr = 1e-3;
  s3.weight_decay = 1e-2;
  nn::adam_step(decayed, zero_grad.head(1).eval(), s3);
  CHECK(decayed.data[0] < 2.0);
}

TEST_CASE("plateau scheduler") {
  nn::PlateauScheduler s;
  s.lr = 1e-4;

  // Monotonically improving: never changes.
  double loss = 1.0;
  for (int i = 0; i < 20; ++i) {
    CHECK(nn::scheduler_step(s, loss) == 1e-4);
    loss *= 0.9;
  }

  // A best, then 6 equal losses: exactly one halving, at the 6th.
  nn::PlateauScheduler s2;
  s2.lr = 1e-4;
  nn::scheduler_step(s2, 0.5);
  for (int i = 0; i < 5; ++i) CHECK(nn::scheduler_step(s2, 0.5) == 1e-4);
  CHECK(nn::scheduler_step(s2, 0.5) == doctest::Approx(5e-5));
  CHECK(s2.bad_count == 0);

  // Floor: no reduction below 1e-6.
  nn::PlateauScheduler s3;
  s3.lr = 1.5e-6;
  nn::scheduler_step(s3, 0.5);
  for (int i = 0; i < 12; ++i) nn::scheduler_step(s3, 0.5);
  CHECK(s3.lr == doctest::Approx(1e-6));
  for (int i = 0; i < 12; ++i) nn::scheduler_step(s3, 0.5);
  CHECK(s3.lr == doctest::Approx(1e-6));
}

TEST_CASE("gradient check: linear layer against exact finite differences") {
  Rng rng(8);
  LinearModel model;
  model.w = random_tensor({3, 5}, rng, 0.5);
  model.b = random_tensor({3}, rng, 0.5);
  T x = random_tensor({4, 5}, rng);
  const T target = random_tensor({4, 3}, rng);
  const auto result = nn::gradient_check(model, x, target, 1e-5);
  CHECK(result.checked == 15 + 3 + 20);
  CHECK(result.max_rel_error < 1e-8);
}

TEST_CASE("gradient check: MLP with ReLU away from kinks") {
  Rng rng(9);
  MlpModel model;
  model.w1 = random_tensor({6, 4}, rng, 0.7);
  model.b1 = random_tensor({6}, rng, 0.7);
  model.w2 = random_tensor({2, 6}, rng, 0.7);
  model.b2 = random_tensor({2}, rng, 0.7);
  T x = random_tensor({3, 4}, rng);
  const T target = random_tensor({3, 2}, rng);
  const auto result = nn::gradient_check(model, x, target, 1e-5);
  CHECK(result.max_rel_error < 1e-7);
}

TEST_CASE("gradient check skips ReLU kinks instead of failing") {
  // One hidden preactivation pinned exactly at the kink.
  MlpModel model;
  model.w1 = T({1, 1});
  model.w1.data << 1.0;
  model.b1 = T({1});
  model.b1.data << 0.0;
  model.w2 = T({1, 1});
  model.w2.data << 1.0;
  model.b2 = T({1});
  model.b2.data << 0.3;
  T x({1, 1});
  x.data << 0.0;  // preactivation exactly 0: perturbing w1/b1/x straddles the kink
  T target({1, 1});
  target.data << 1.0;
  const auto result = nn::gradient_check(model, x, target, 1e-5);
  CHECK(result.skipped_kinks >= 1);
  CHECK(result.max_rel_error < 1e-6);

  // Inputs >= 10h away from the kink: nothing skipped, check passes.
  x.data << 10 * 1e-5 * 50;
  const auto clean = nn::gradient_check(model, x, target, 1e-5);
  CHECK(clean.skipped_kinks == 0);
  CHECK(clean.max_rel_error < 1e-7);
}
