#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "afrg/errors.hpp"
#include "afrg/rng.hpp"

namespace afrg::nn {

enum class Mode { train, eval };

// Dense row-major tensor with an optional gradient buffer of the same shape.
template <typename S = double>
struct Tensor {
  using Array = Eigen::Array<S, Eigen::Dynamic, 1>;

  std::vector<int> shape;
  Array data;
  Array grad;  // size 0 until ensure_grad()

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_) : shape(std::move(shape_)) {
    data = Array::Zero(size_of(shape));
  }

  static Eigen::Index size_of(const std::vector<int>& s) {
    Eigen::Index n = 1;
    for (int d : s) n *= d;
    return n;
  }

  Eigen::Index size() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad = Array::Zero(data.size());
  }
  void zero_grad() {
    ensure_grad();
    grad.setZero();
  }

  Tensor reshaped(std::vector<int> new_shape) const {
    if (size_of(new_shape) != size()) throw DomainError("reshape: element count mismatch");
    Tensor t = *this;
    t.shape = std::move(new_shape);
    return t;
  }

  void fill_normal(Rng& rng, double stddev) {
    for (Eigen::Index i = 0; i < data.size(); ++i)
      data[i] = static_cast<S>(stddev * rng.normal());
  }
};

template <typename S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// ---------------------------------------------------------------------------
// Convolution (cross-correlation, stride 1, symmetric zero padding)
// ---------------------------------------------------------------------------

inline std::pair<int, int> conv2d_output_hw(int h, int w, int k, int padding) {
  const int oh = h + 2 * padding - k + 1;
  const int ow = w + 2 * padding - k + 1;
  if (oh < 1 || ow < 1) throw DomainError("conv2d: kernel larger than padded input");
  return {oh, ow};
}

namespace detail {

// col is (Cin*k*k) x (OH*OW), column-major.
template <typename S>
void im2col(const S* x, int cin, int h, int w, int k, int padding,
            Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& col) {
  const auto [oh, ow] = conv2d_output_hw(h, w, k, padding);
  col.resize(cin * k * k, oh * ow);
  for (int oi = 0; oi < oh; ++oi) {
    for (int oj = 0; oj < ow; ++oj) {
      const int p = oi * ow + oj;
      S* dst = col.data() + static_cast<std::ptrdiff_t>(p) * col.rows();
      int kidx = 0;
      for (int ci = 0; ci < cin; ++ci) {
        const S* plane = x + static_cast<std::ptrdiff_t>(ci) * h * w;
        for (int u = 0; u < k; ++u) {
          const int ii = oi + u - padding;
          for (int v = 0; v < k; ++v, ++kidx) {
            const int jj = oj + v - padding;
            dst[kidx] = (ii >= 0 && ii < h && jj >= 0 && jj < w)
                            ? plane[static_cast<std::ptrdiff_t>(ii) * w + jj]
                            : S(0);
          }
        }
      }
    }
  }
}

template <typename S>
void col2im_add(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& col, int cin, int h,
                int w, int k, int padding, S* dx) {
  const auto [oh, ow] = conv2d_output_hw(h, w, k, padding);
  for (int oi = 0; oi < oh; ++oi) {
    for (int oj = 0; oj < ow; ++oj) {
      const int p = oi * ow + oj;
      const S* src = col.data() + static_cast<std::ptrdiff_t>(p) * col.rows();
      int kidx = 0;
      for (int ci = 0; ci < cin; ++ci) {
        S* plane = dx + static_cast<std::ptrdiff_t>(ci) * h * w;
        for (int u = 0; u < k; ++u) {
          const int ii = oi + u - padding;
          for (int v = 0; v < k; ++v, ++kidx) {
            const int jj = oj + v - padding;
            if (ii >= 0 && ii < h && jj >= 0 && jj < w)
              plane[static_cast<std::ptrdiff_t>(ii) * w + jj] += src[kidx];
          }
        }
      }
    }
  }
}

}  // namespace detail

// x: [B, Cin, H, W], weights: [Cout, Cin, k, k], bias: [Cout].
template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& x, const Tensor<S>& weights, const Tensor<S>& bias,
                         int padding) {
  if (x.shape.size() != 4 || weights.shape.size() != 4)
    throw DomainError("conv2d: expected 4-d input and weights");
  const int batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int cout = weights.dim(0), k = weights.dim(2);
  if (weights.dim(1) != cin || weights.dim(3) != k)
    throw DomainError("conv2d: weight shape does not match input channels");
  if (bias.size() != cout) throw DomainError("conv2d: bias size mismatch");
  const auto [oh, ow] = conv2d_output_hw(h, w, k, padding);

  Tensor<S> y({batch, cout, oh, ow});
  ConstMatMap<S> wmat(weights.data.data(), cout, cin * k * k);
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> col;
  for (int b = 0; b < batch; ++b) {
    detail::im2col(x.data.data() + static_cast<std::ptrdiff_t>(b) * cin * h * w, cin, h, w, k,
                   padding, col);
    MatMap<S> ymat(y.data.data() + static_cast<std::ptrdiff_t>(b) * cout * oh * ow, cout, oh * ow);
    ymat.noalias() = wmat * col;
    ymat.colwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(bias.data.data(), cout);
  }
  return y;
}

// Accumulates into weights.grad / bias.grad; returns dx.
template <typename S>
Tensor<S> conv2d_backward(const Tensor<S>& x, const Tensor<S>& weights, Tensor<S>& wgrad_into,
                          Tensor<S>& bgrad_into, const Tensor<S>& dy, int padding) {
  const int batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int cout = weights.dim(0), k = weights.dim(2);
  const auto [oh, ow] = conv2d_output_hw(h, w, k, padding);
  if (dy.shape != std::vector<int>({batch, cout, oh, ow}))
    throw DomainError("conv2d_backward: dy shape mismatch");

  wgrad_into.ensure_grad();
  bgrad_into.ensure_grad();
  Tensor<S> dx({batch, cin, h, w});

  ConstMatMap<S> wmat(weights.data.data(), cout, cin * k * k);
  MatMap<S> dwmat(wgrad_into.grad.data(), cout, cin * k * k);
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> dbias(bgrad_into.grad.data(), cout);
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> col, dcol;
  for (int b = 0; b < batch; ++b) {
    detail::im2col(x.data.data() + static_cast<std::ptrdiff_t>(b) * cin * h * w, cin, h, w, k,
                   padding, col);
    ConstMatMap<S> dymat(dy.data.data() + static_cast<std::ptrdiff_t>(b) * cout * oh * ow, cout,
                         oh * ow);
    dwmat.noalias() += dymat * col.transpose();
    dbias.noalias() += dymat.rowwise().sum();
    dcol.noalias() = wmat.transpose() * dymat;
    detail::col2im_add(dcol, cin, h, w, k, padding,
                       dx.data.data() + static_cast<std::ptrdiff_t>(b) * cin * h * w);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Batch normalization over (B, H, W) per channel
// ---------------------------------------------------------------------------

template <typename S>
struct BatchNormRunning {
  Eigen::Array<S, Eigen::Dynamic, 1> mean, var;
  explicit BatchNormRunning(int channels = 0) {
    mean = Eigen::Array<S, Eigen::Dynamic, 1>::Zero(channels);
    var = Eigen::Array<S, Eigen::Dynamic, 1>::Ones(channels);
  }
};

template <typename S>
struct BatchNormCache {
  Eigen::Array<S, Eigen::Dynamic, 1> mean, invstd;  // per channel (train mode)
};

template <typename S>
Tensor<S> batchnorm2d_forward(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                              BatchNormRunning<S>& running, Mode mode, double eps = 1e-5,
                              double momentum = 0.1, BatchNormCache<S>* cache = nullptr) {
  if (x.shape.size() != 4) throw DomainError("batchnorm2d: expected 4-d input");
  const int batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (gamma.size() != channels || beta.size() != channels)
    throw DomainError("batchnorm2d: gamma/beta size mismatch");
  if (mode == Mode::train && batch < 2)
    throw DomainError("batchnorm2d: train mode requires batch size >= 2");

  Tensor<S> y(x.shape);
  const Eigen::Index plane = static_cast<Eigen::Index>(h) * w;
  const Eigen::Index stride = static_cast<Eigen::Index>(channels) * plane;
  const double count = static_cast<double>(batch) * plane;

  for (int c = 0; c < channels; ++c) {
    S mean, invstd;
    if (mode == Mode::train) {
      S sum = 0, sq = 0;
      for (int b = 0; b < batch; ++b) {
        const S* p = x.data.data() + b * stride + c * plane;
        for (Eigen::Index i = 0; i < plane; ++i) {
          sum += p[i];
          sq += p[i] * p[i];
        }
      }
      mean = sum / static_cast<S>(count);
      const S var_biased = sq / static_cast<S>(count) - mean * mean;
      invstd = S(1) / std::sqrt(var_biased + static_cast<S>(eps));
      // Running stats use the unbiased variance (standard convention).
      const S var_unbiased =
          count > 1 ? var_biased * static_cast<S>(count / (count - 1.0)) : var_biased;
      running.mean[c] = static_cast<S>(1.0 - momentum) * running.mean[c] +
                        static_cast<S>(momentum) * mean;
      running.var[c] = static_cast<S>(1.0 - momentum) * running.var[c] +
                       static_cast<S>(momentum) * var_unbiased;
      if (cache) {
        if (cache->mean.size() != channels) {
          cache->mean.resize(channels);
          cache->invstd.resize(channels);
        }
        cache->mean[c] = mean;
        cache->invstd[c] = invstd;
      }
    } else {
      mean = running.mean[c];
      invstd = S(1) / std::sqrt(running.var[c] + static_cast<S>(eps));
    }
    const S g = gamma.data[c], bta = beta.data[c];
    for (int b = 0; b < batch; ++b) {
      const S* px = x.data.data() + b * stride + c * plane;
      S* py = y.data.data() + b * stride + c * plane;
      for (Eigen::Index i = 0; i < plane; ++i) py[i] = g * (px[i] - mean) * invstd + bta;
    }
  }
  return y;
}

// Train-mode backward. Accumulates dgamma/dbeta into the grad buffers.
template <typename S>
Tensor<S> batchnorm2d_backward(const Tensor<S>& x, const Tensor<S>& gamma, Tensor<S>& gamma_grad,
                               Tensor<S>& beta_grad, const BatchNormCache<S>& cache,
                               const Tensor<S>& dy) {
  const int batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  gamma_grad.ensure_grad();
  beta_grad.ensure_grad();
  Tensor<S> dx(x.shape);
  const Eigen::Index plane = static_cast<Eigen::Index>(h) * w;
  const Eigen::Index stride = static_cast<Eigen::Index>(channels) * plane;
  const S count = static_cast<S>(batch) * static_cast<S>(plane);

  for (int c = 0; c < channels; ++c) {
    const S mean = cache.mean[c], invstd = cache.invstd[c], g = gamma.data[c];
    S sum_dy = 0, sum_dy_xhat = 0;
    for (int b = 0; b < batch; ++b) {
      const S* px = x.data.data() + b * stride + c * plane;
      const S* pdy = dy.data.data() + b * stride + c * plane;
      for (Eigen::Index i = 0; i < plane; ++i) {
        const S xhat = (px[i] - mean) * invstd;
        sum_dy += pdy[i];
        sum_dy_xhat += pdy[i] * xhat;
      }
    }
    gamma_grad.grad[c] += sum_dy_xhat;
    beta_grad.grad[c] += sum_dy;
    for (int b = 0; b < batch; ++b) {
      const S* px = x.data.data() + b * stride + c * plane;
      const S* pdy = dy.data.data() + b * stride + c * plane;
      S* pdx = dx.data.data() + b * stride + c * plane;
      for (Eigen::Index i = 0; i < plane; ++i) {
        const S xhat = (px[i] - mean) * invstd;
        pdx[i] = g * invstd * (pdy[i] - sum_dy / count - xhat * sum_dy_xhat / count);
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& x) {
  Tensor<S> y = x;
  y.grad.resize(0);
  y.data = y.data.max(S(0));
  return y;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& x, const Tensor<S>& dy) {
  Tensor<S> dx(x.shape);
  dx.data = (x.data > S(0)).select(dy.data, Tensor<S>::Array::Zero(x.size()));
  return dx;
}

// ---------------------------------------------------------------------------
// Adaptive average pooling
// ---------------------------------------------------------------------------

inline std::pair<int, int> pool_region(int index, int in_extent, int out_extent) {
  const int lo = (index * in_extent) / out_extent;
  const int hi = ((index + 1) * in_extent + out_extent - 1) / out_extent;  // ceil
  return {lo, hi};
}

template <typename S>
Tensor<S> adaptive_avg_pool2d(const Tensor<S>& x, int out_h = 4, int out_w = 4) {
  if (x.shape.size() != 4) throw DomainError("adaptive_avg_pool2d: expected 4-d input");
  const int batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < out_h || w < out_w)
    throw DomainError("adaptive_avg_pool2d: input smaller than output grid");
  Tensor<S> y({batch, channels, out_h, out_w});
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < channels; ++c) {
      const S* px = x.data.data() + (static_cast<std::ptrdiff_t>(b) * channels + c) * h * w;
      S* py = y.data.data() + (static_cast<std::ptrdiff_t>(b) * channels + c) * out_h * out_w;
      for (int i = 0; i < out_h; ++i) {
        const auto [r0, r1] = pool_region(i, h, out_h);
        for (int j = 0; j < out_w; ++j) {
          const auto [c0, c1] = pool_region(j, w, out_w);
          S acc = 0;
          for (int r = r0; r < r1; ++r)
            for (int cc = c0; cc < c1; ++cc) acc += px[r * w + cc];
          py[i * out_w + j] = acc / static_cast<S>((r1 - r0) * (c1 - c0));
        }
      }
    }
  return y;
}

template <typename S>
Tensor<S> adaptive_avg_pool2d_backward(const std::vector<int>& x_shape, const Tensor<S>& dy) {
  const int batch = x_shape[0], channels = x_shape[1], h = x_shape[2], w = x_shape[3];
  const int out_h = dy.dim(2), out_w = dy.dim(3);
  Tensor<S> dx(x_shape);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < channels; ++c) {
      S* pdx = dx.data.data() + (static_cast<std::ptrdiff_t>(b) * channels + c) * h * w;
      const S* pdy = dy.data.data() + (static_cast<std::ptrdiff_t>(b) * channels + c) * out_h * out_w;
      for (int i = 0; i < out_h; ++i) {
        const auto [r0, r1] = pool_region(i, h, out_h);
        for (int j = 0; j < out_w; ++j) {
          const auto [c0, c1] = pool_region(j, w, out_w);
          const S share = pdy[i * out_w + j] / static_cast<S>((r1 - r0) * (c1 - c0));
          for (int r = r0; r < r1; ++r)
            for (int cc = c0; cc < c1; ++cc) pdx[r * w + cc] += share;
        }
      }
    }
  return dx;
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

// x: [B, in], weights: [out, in], bias: [out] -> [B, out]
template <typename S>
Tensor<S> linear_forward(const Tensor<S>& x, const Tensor<S>& weights, const Tensor<S>& bias) {
  if (x.shape.size() != 2 || weights.shape.size() != 2)
    throw DomainError("linear: expected 2-d input and weights");
  const int batch = x.dim(0), in = x.dim(1), out = weights.dim(0);
  if (weights.dim(1) != in || bias.size() != out)
    throw DomainError("linear: weight/bias shape mismatch");
  Tensor<S> y({batch, out});
  ConstMatMap<S> xm(x.data.data(), batch, in);
  ConstMatMap<S> wm(weights.data.data(), out, in);
  MatMap<S> ym(y.data.data(), batch, out);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(bias.data.data(), out)
                      .transpose();
  return y;
}

template <typename S>
Tensor<S> linear_backward(const Tensor<S>& x, const Tensor<S>& weights, Tensor<S>& wgrad_into,
                          Tensor<S>& bgrad_into, const Tensor<S>& dy) {
  const int batch = x.dim(0), in = x.dim(1), out = weights.dim(0);
  if (dy.shape != std::vector<int>({batch, out}))
    throw DomainError("linear_backward: dy shape mismatch");
  wgrad_into.ensure_grad();
  bgrad_into.ensure_grad();
  Tensor<S> dx({batch, in});
  ConstMatMap<S> xm(x.data.data(), batch, in);
  ConstMatMap<S> wm(weights.data.data(), out, in);
  ConstMatMap<S> dym(dy.data.data(), batch, out);
  MatMap<S> dwm(wgrad_into.grad.data(), out, in);
  MatMap<S> dxm(dx.data.data(), batch, in);
  dwm.noalias() += dym.transpose() * xm;
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(bgrad_into.grad.data(), out).noalias() +=
      dym.colwise().sum().transpose();
  dxm.noalias() = dym * wm;
  return dx;
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

template <typename S>
struct DropoutCache {
  typename Tensor<S>::Array mask;
};

template <typename S>
Tensor<S> dropout_forward(const Tensor<S>& x, double p, Mode mode, Rng& rng,
                          DropoutCache<S>* cache = nullptr) {
  if (p < 0 || p >= 1) throw DomainError("dropout: p must be in [0, 1)");
  Tensor<S> y = x;
  y.grad.resize(0);
  if (mode == Mode::eval || p == 0.0) {
    if (cache) cache->mask = Tensor<S>::Array::Ones(x.size());
    return y;
  }
  const S scale = static_cast<S>(1.0 / (1.0 - p));
  typename Tensor<S>::Array mask(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) mask[i] = rng.bernoulli(p) ? S(0) : scale;
  y.data *= mask;
  if (cache) cache->mask = std::move(mask);
  return y;
}

template <typename S>
Tensor<S> dropout_backward(const DropoutCache<S>& cache, const Tensor<S>& dy) {
  Tensor<S> dx = dy;
  dx.grad.resize(0);
  dx.data *= cache.mask;
  return dx;
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

template <typename S>
std::pair<S, Tensor<S>> mse_loss(const Tensor<S>& pred, const Tensor<S>& target) {
  if (pred.shape != target.shape) throw DomainError("mse_loss: shape mismatch");
  const S count = static_cast<S>(pred.size());
  const auto diff = (pred.data - target.data).eval();
  const S loss = diff.square().sum() / count;
  Tensor<S> grad(pred.shape);
  grad.data = S(2) * diff / count;
  return {loss, grad};
}

// ---------------------------------------------------------------------------
// Adam with coupled L2 weight decay
// ---------------------------------------------------------------------------

template <typename S = double>
struct AdamState {
  typename Tensor<S>::Array m, v;
  long step_count = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

template <typename S>
void adam_step(Tensor<S>& param, const typename Tensor<S>::Array& grad, AdamState<S>& state) {
  if (grad.size() != param.size()) throw DomainError("adam_step: grad shape mismatch");
  if (state.m.size() != param.size()) {
    state.m = Tensor<S>::Array::Zero(param.size());
    state.v = Tensor<S>::Array::Zero(param.size());
  }
  ++state.step_count;
  const auto g = (grad + static_cast<S>(state.weight_decay) * param.data).eval();
  state.m = static_cast<S>(state.beta1) * state.m + static_cast<S>(1 - state.beta1) * g;
  state.v = static_cast<S>(state.beta2) * state.v + static_cast<S>(1 - state.beta2) * g.square();
  const S bc1 = static_cast<S>(1.0 - std::pow(state.beta1, state.step_count));
  const S bc2 = static_cast<S>(1.0 - std::pow(state.beta2, state.step_count));
  param.data -= static_cast<S>(state.lr) * (state.m / bc1) /
                ((state.v / bc2).sqrt() + static_cast<S>(state.eps));
}

// ---------------------------------------------------------------------------
// ReduceLROnPlateau
// ---------------------------------------------------------------------------

struct PlateauScheduler {
  double lr = 1e-4;
  double factor = 0.5;
  int patience = 5;
  double lr_floor = 1e-6;
  double best = std::numeric_limits<double>::infinity();
  int bad_count = 0;
};

// Returns the (possibly reduced) learning rate.
inline double scheduler_step(PlateauScheduler& state, double validation_loss) {
  if (validation_loss < state.best) {
    state.best = validation_loss;
    state.bad_count = 0;
  } else if (++state.bad_count > state.patience) {
    state.lr = std::max(state.lr * state.factor, state.lr_floor);
    state.bad_count = 0;
  }
  return state.lr;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

template <typename S>
struct ParamView {
  std::string name;
  Tensor<S>* tensor;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  long checked = 0;
  long skipped_kinks = 0;
};

// Central finite differences against the analytic gradients produced by
// Model::loss_backward. Model contract:
//   std::vector<ParamView<S>> parameters();
//   S loss_forward(const Tensor<S>& input, const Tensor<S>& target);
//   S loss_backward(const Tensor<S>& input, const Tensor<S>& target, Tensor<S>* dinput);
// loss_backward accumulates parameter gradients into each tensor's grad
// buffer and writes the input gradient into dinput->data. Entries whose
// one-sided slopes disagree (a ReLU kink inside the stencil) are skipped
// rather than reported as failures.
template <typename Model, typename S>
GradCheckResult gradient_check(Model& model, Tensor<S>& input, const Tensor<S>& target,
                               double h = 1e-5, long max_checks_per_tensor = -1,
                               bool check_input = true) {
  Tensor<S> dinput;
  model.loss_backward(input, target, &dinput);

  std::vector<ParamView<S>> params = model.parameters();
  std::vector<typename Tensor<S>::Array> analytic;
  for (auto& p : params) analytic.push_back(p.tensor->grad);

  GradCheckResult result;
  const double l0 = static_cast<double>(model.loss_forward(input, target));

  auto check_tensor = [&](const std::string& name, Tensor<S>& tensor,
                          const typename Tensor<S>::Array& grad) {
    const Eigen::Index n = tensor.size();
    Eigen::Index step = 1;
    if (max_checks_per_tensor > 0 && n > max_checks_per_tensor)
      step = n / max_checks_per_tensor;
    for (Eigen::Index i = 0; i < n; i += step) {
      const S old = tensor.data[i];
      const double hi = h * std::max(1.0, std::abs(static_cast<double>(old)));
      tensor.data[i] = old + static_cast<S>(hi);
      const double lp = static_cast<double>(model.loss_forward(input, target));
      tensor.data[i] = old - static_cast<S>(hi);
      const double lm = static_cast<double>(model.loss_forward(input, target));
      tensor.data[i] = old;

      const double central = (lp - lm) / (2.0 * hi);
      const double s_plus = (lp - l0) / hi;
      const double s_minus = (l0 - lm) / hi;
      const double g = static_cast<double>(grad[i]);
      const double denom = std::max({std::abs(central), std::abs(g), 1e-6});
      const double rel = std::abs(central - g) / denom;
      ++result.checked;

      if (rel > result.max_rel_error) {
        // One-sided slopes that disagree indicate a kink inside the stencil.
        const double slope_jump =
            std::abs(s_plus - s_minus) / std::max({std::abs(s_plus), std::abs(s_minus), 1e-12});
        if (rel > 1e-3 && slope_jump > 0.1) {
          ++result.skipped_kinks;
          continue;
        }
        result.max_rel_error = rel;
        result.worst_param = name;
        result.worst_index = i;
      }
    }
  };

  for (size_t k = 0; k < params.size(); ++k)
    check_tensor(params[k].name, *params[k].tensor, analytic[k]);
  if (check_input) check_tensor("input", input, dinput.data);
  return result;
}

}  // namespace afrg::nn
