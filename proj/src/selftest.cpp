#include "afrg/selftest.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "afrg/control.hpp"
#include "afrg/nn.hpp"
#include "afrg/psd.hpp"
#include "afrg/psdregnet.hpp"
#include "afrg/rng.hpp"

namespace afrg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Check = std::pair<const char*, std::function<bool()>>;

bool check_psd_vs_dft() {
  Rng rng(101);
  Eigen::ArrayXd x(64);
  for (int i = 0; i < 64; ++i) x[i] = rng.normal();
  const Eigen::ArrayXd fast = power_spectral_density(x, 1000.0);
  const Eigen::ArrayXd w = hann_window(64);
  const Eigen::ArrayXd xw = x * w;
  const double wsum2 = (w * w).sum();
  double worst = 0.0;
  for (int k = 0; k <= 32; ++k) {
    std::complex<double> acc(0, 0);
    for (int t = 0; t < 64; ++t) acc += xw[t] * std::polar(1.0, -kTwoPi * k * t / 64);
    double p = std::norm(acc) / (1000.0 * wsum2);
    if (k > 0 && k < 32) p *= 2.0;
    worst = std::max(worst, std::abs(p - fast[k]));
  }
  return worst / fast.maxCoeff() < 1e-9;
}

bool check_parseval() {
  Rng rng(102);
  Eigen::ArrayXd x(1600);
  for (int i = 0; i < 1600; ++i) x[i] = rng.normal();
  const Eigen::ArrayXd psd = power_spectral_density(x, 16000.0);
  const Eigen::ArrayXd w = hann_window(1600);
  const double lhs = (psd * (16000.0 / 1600.0)).sum();
  const double rhs = (x * w).square().sum() / (w * w).sum();
  return std::abs(lhs - rhs) / rhs < 1e-9;
}

bool check_conv_oracle() {
  Rng rng(103);
  nn::Tensor<double> x({2, 3, 6, 5}), w({4, 3, 3, 3}), b({4});
  x.fill_normal(rng, 1.0);
  w.fill_normal(rng, 1.0);
  b.fill_normal(rng, 1.0);
  const auto y = nn::conv2d_forward(x, w, b, 1);
  double worst = 0.0;
  for (int n = 0; n < 2; ++n)
    for (int co = 0; co < 4; ++co)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) {
          double acc = b.data[co];
          for (int ci = 0; ci < 3; ++ci)
            for (int u = 0; u < 3; ++u)
              for (int v = 0; v < 3; ++v) {
                const int ii = i + u - 1, jj = j + v - 1;
                if (ii < 0 || ii >= 6 || jj < 0 || jj >= 5) continue;
                acc += w.data[((co * 3 + ci) * 3 + u) * 3 + v] *
                       x.data[((n * 3 + ci) * 6 + ii) * 5 + jj];
              }
          worst = std::max(worst, std::abs(acc - y.data[((n * 4 + co) * 6 + i) * 5 + j]));
        }
  return worst < 1e-12;
}

bool check_shapes() {
  PsdRegNet net;
  net.init_params(0);
  const auto trace = net.shape_trace(2);
  auto is = [&](const char* name, std::vector<int> shape) {
    for (const auto& [n, s] : trace)
      if (n == name) return s == shape;
    return false;
  };
  return is("input", {1, 35, 40}) && is("conv1", {16, 33, 38}) && is("conv2", {32, 31, 36}) &&
         is("pool", {32, 4, 4}) && is("flatten", {512}) && is("fc1", {64}) && is("fc2", {1}) &&
         net.parameter_count() == 46281;
}

struct LinearProbe {
  nn::Tensor<double> w, b;
  std::vector<nn::ParamView<double>> parameters() { return {{"w", &w}, {"b", &b}}; }
  double loss_forward(const nn::Tensor<double>& x, const nn::Tensor<double>& t) {
    return nn::mse_loss(nn::linear_forward(x, w, b), t).first;
  }
  double loss_backward(const nn::Tensor<double>& x, const nn::Tensor<double>& t,
                       nn::Tensor<double>* dx) {
    w.zero_grad();
    b.zero_grad();
    auto [loss, dy] = nn::mse_loss(nn::linear_forward(x, w, b), t);
    auto d = nn::linear_backward(x, w, w, b, dy);
    if (dx) *dx = d;
    return loss;
  }
};

bool check_gradients() {
  Rng rng(104);
  LinearProbe probe;
  probe.w = nn::Tensor<double>({3, 4});
  probe.b = nn::Tensor<double>({3});
  probe.w.fill_normal(rng, 0.5);
  probe.b.fill_normal(rng, 0.5);
  nn::Tensor<double> x({5, 4}), t({5, 3});
  x.fill_normal(rng, 1.0);
  t.fill_normal(rng, 1.0);
  return nn::gradient_check(probe, x, t, 1e-5).max_rel_error < 1e-7;
}

bool check_projection() {
  ControllerConfig cfg;
  const Eigen::Matrix3d s = cfg.projection;
  return ((s * s - s).cwiseAbs().maxCoeff() < 1e-12) &&
         ((s * (Eigen::Matrix3d::Identity() - s)).cwiseAbs().maxCoeff() < 1e-12);
}

bool check_hann() {
  const Eigen::ArrayXd w = hann_window(8);
  for (int k = 0; k < 8; ++k)
    if (std::abs(w[k] - 0.5 * (1 - std::cos(kTwoPi * k / 7))) > 1e-15) return false;
  return w[0] == 0.0 && w[7] == 0.0;
}

}  // namespace

int run_selftest(std::ostream& out) {
  const Check checks[] = {
      {"hann window closed form", check_hann},
      {"psd vs naive dft (1e-9)", check_psd_vs_dft},
      {"windowed parseval (1e-9)", check_parseval},
      {"conv2d vs nested-loop oracle (1e-12)", check_conv_oracle},
      {"network shape conformance + parameter count", check_shapes},
      {"linear-layer gradient check (1e-7)", check_gradients},
      {"projection matrix algebra (1e-12)", check_projection},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    const bool ok = fn();
    out << (ok ? "[pass] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  }
  out << (failures ? "selftest: FAILURES\n" : "selftest: all checks passed\n");
  return failures;
}

}  // namespace afrg
