#include "afrg/psdregnet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "afrg/config.hpp"
#include "afrg/errors.hpp"

namespace afrg {

using T = PsdRegNet::T;

ModelFingerprint ModelFingerprint::from_encoder(const EncoderConfig& cfg) {
  ModelFingerprint fp;
  fp.bins = cfg.band_bins();
  fp.frames = cfg.frames;
  fp.band_low = cfg.band_low;
  fp.band_high = cfg.band_high;
  fp.control_rate = cfg.control_rate;
  fp.sample_rate = cfg.sample_rate;
  return fp;
}

bool ModelFingerprint::matches(const EncoderConfig& cfg) const {
  const ModelFingerprint other = from_encoder(cfg);
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  return bins == other.bins && frames == other.frames && near(band_low, other.band_low) &&
         near(band_high, other.band_high) && near(control_rate, other.control_rate) &&
         near(sample_rate, other.sample_rate);
}

std::string ModelFingerprint::describe() const {
  return "F=" + std::to_string(bins) + " n=" + std::to_string(frames) + " band=[" +
         format_double(band_low) + "," + format_double(band_high) + ") f_c=" +
         format_double(control_rate) + " fs=" + format_double(sample_rate);
}

PsdRegNet::PsdRegNet(const ModelFingerprint& fp) : fingerprint(fp) {
  mask = T({fp.frames});
  conv1_w = T({16, 1, 5, 5});
  conv1_b = T({16});
  bn1_gamma = T({16});
  bn1_beta = T({16});
  conv2_w = T({32, 16, 5, 5});
  conv2_b = T({32});
  bn2_gamma = T({32});
  bn2_beta = T({32});
  fc1_w = T({64, 512});
  fc1_b = T({64});
  fc2_w = T({1, 64});
  fc2_b = T({1});
  bn1_gamma.data.setOnes();
  bn2_gamma.data.setOnes();
  for (int j = 0; j < fp.frames; ++j)
    mask.data[j] = fp.frames > 1 ? static_cast<double>(j) / (fp.frames - 1) : 1.0;
}

void PsdRegNet::init_params(std::uint64_t seed) {
  Rng rng(seed);
  auto he = [&](T& w, int fan_in) { w.fill_normal(rng, std::sqrt(2.0 / fan_in)); };
  he(conv1_w, 1 * 5 * 5);
  he(conv2_w, 16 * 5 * 5);
  he(fc1_w, 512);
  he(fc2_w, 64);
  conv1_b.data.setZero();
  conv2_b.data.setZero();
  fc1_b.data.setZero();
  fc2_b.data.setZero();
  bn1_gamma.data.setOnes();
  bn1_beta.data.setZero();
  bn2_gamma.data.setOnes();
  bn2_beta.data.setZero();
  bn1_running = nn::BatchNormRunning<double>(16);
  bn2_running = nn::BatchNormRunning<double>(32);
  for (int j = 0; j < fingerprint.frames; ++j)
    mask.data[j] = fingerprint.frames > 1 ? static_cast<double>(j) / (fingerprint.frames - 1) : 1.0;
}

std::vector<nn::ParamView<double>> PsdRegNet::parameters() {
  return {{"mask", &mask},           {"conv1_w", &conv1_w}, {"conv1_b", &conv1_b},
          {"bn1_gamma", &bn1_gamma}, {"bn1_beta", &bn1_beta},
          {"conv2_w", &conv2_w},     {"conv2_b", &conv2_b}, {"bn2_gamma", &bn2_gamma},
          {"bn2_beta", &bn2_beta},   {"fc1_w", &fc1_w},     {"fc1_b", &fc1_b},
          {"fc2_w", &fc2_w},         {"fc2_b", &fc2_b}};
}

Eigen::Index PsdRegNet::parameter_count() {
  Eigen::Index n = 0;
  for (const auto& p : parameters()) n += p.tensor->size();
  return n;
}

struct PsdRegNet::ForwardCache {
  T x_masked, conv1_out, relu1_in, relu1_out, conv2_out, relu2_in, relu2_out, pool_out, flat,
      fc1_out, drop_out, relu3_out;
  nn::BatchNormCache<double> bn1_cache, bn2_cache;
  nn::DropoutCache<double> drop_cache;
  std::vector<int> x_shape;
};

Eigen::MatrixXd PsdRegNet::apply_temporal_mask(const Eigen::MatrixXd& window,
                                               const Eigen::VectorXd& mask) {
  if (window.cols() != mask.size())
    throw DomainError("apply_temporal_mask: mask length does not match column count");
  return window * mask.asDiagonal();
}

T PsdRegNet::forward(const T& x, nn::Mode bn_mode, bool dropout_on, Rng* dropout_rng,
                     ForwardCache* cache) {
  if (x.shape.size() != 4 || x.dim(1) != 1 || x.dim(2) != fingerprint.bins ||
      x.dim(3) != fingerprint.frames)
    throw DomainError("psdregnet: expected input [B,1," + std::to_string(fingerprint.bins) + "," +
                      std::to_string(fingerprint.frames) + "]");
  const int batch = x.dim(0);
  const int f = fingerprint.bins, n = fingerprint.frames;

  // Column-wise temporal mask.
  T xm = x;
  xm.grad.resize(0);
  for (int b = 0; b < batch; ++b) {
    double* p = xm.data.data() + static_cast<std::ptrdiff_t>(b) * f * n;
    for (int r = 0; r < f; ++r)
      for (int j = 0; j < n; ++j) p[r * n + j] *= mask.data[j];
  }

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.x_shape = x.shape;
  c.x_masked = xm;

  c.conv1_out = nn::conv2d_forward(c.x_masked, conv1_w, conv1_b, 1);
  c.relu1_in = nn::batchnorm2d_forward(c.conv1_out, bn1_gamma, bn1_beta, bn1_running, bn_mode,
                                       1e-5, 0.1, &c.bn1_cache);
  c.relu1_out = nn::relu_forward(c.relu1_in);
  c.conv2_out = nn::conv2d_forward(c.relu1_out, conv2_w, conv2_b, 1);
  c.relu2_in = nn::batchnorm2d_forward(c.conv2_out, bn2_gamma, bn2_beta, bn2_running, bn_mode,
                                       1e-5, 0.1, &c.bn2_cache);
  c.relu2_out = nn::relu_forward(c.relu2_in);
  c.pool_out = nn::adaptive_avg_pool2d(c.relu2_out, 4, 4);
  c.flat = c.pool_out.reshaped({batch, 32 * 4 * 4});
  c.fc1_out = nn::linear_forward(c.flat, fc1_w, fc1_b);
  Rng fallback(0);
  c.drop_out = nn::dropout_forward(c.fc1_out, dropout_p,
                                   dropout_on ? nn::Mode::train : nn::Mode::eval,
                                   dropout_rng ? *dropout_rng : fallback, &c.drop_cache);
  c.relu3_out = nn::relu_forward(c.drop_out);
  return nn::linear_forward(c.relu3_out, fc2_w, fc2_b);
}

T PsdRegNet::forward_eval(const T& x) {
  return forward(x, nn::Mode::eval, /*dropout_on=*/false, nullptr);
}

std::vector<std::pair<std::string, std::vector<int>>> PsdRegNet::shape_trace(int batch) {
  ForwardCache c;
  T x({batch, 1, fingerprint.bins, fingerprint.frames});
  x.data.setConstant(0.1);
  const T out = forward(x, batch >= 2 ? nn::Mode::train : nn::Mode::eval, false, nullptr, &c);
  auto chw = [](const std::vector<int>& s) {
    return std::vector<int>(s.begin() + 1, s.end());
  };
  return {{"input", chw(c.x_masked.shape)},
          {"conv1", chw(c.conv1_out.shape)},
          {"bn1", chw(c.relu1_in.shape)},
          {"relu1", chw(c.relu1_out.shape)},
          {"conv2", chw(c.conv2_out.shape)},
          {"bn2", chw(c.relu2_in.shape)},
          {"relu2", chw(c.relu2_out.shape)},
          {"pool", chw(c.pool_out.shape)},
          {"flatten", chw(c.flat.shape)},
          {"fc1", chw(c.fc1_out.shape)},
          {"fc2", chw(out.shape)}};
}

double PsdRegNet::loss_forward(const T& x, const T& target) {
  const T pred = forward(x, nn::Mode::train, /*dropout_on=*/false, nullptr);
  const double count = static_cast<double>(pred.size());
  return (pred.data - target.data).square().sum() / count;
}

void PsdRegNet::zero_grads() {
  for (auto& p : parameters()) p.tensor->zero_grad();
}

void PsdRegNet::backward(const T& x, const ForwardCache& c, const T& dpred, T* dinput) {
  T d = nn::linear_backward(c.relu3_out, fc2_w, fc2_w, fc2_b, dpred);
  d = nn::relu_backward(c.drop_out, d);
  d = nn::dropout_backward(c.drop_cache, d);
  d = nn::linear_backward(c.flat, fc1_w, fc1_w, fc1_b, d);
  d = d.reshaped(c.pool_out.shape);
  d = nn::adaptive_avg_pool2d_backward(c.relu2_out.shape, d);
  d = nn::relu_backward(c.relu2_in, d);
  d = nn::batchnorm2d_backward(c.conv2_out, bn2_gamma, bn2_gamma, bn2_beta, c.bn2_cache, d);
  d = nn::conv2d_backward(c.relu1_out, conv2_w, conv2_w, conv2_b, d, 1);
  d = nn::relu_backward(c.relu1_in, d);
  d = nn::batchnorm2d_backward(c.conv1_out, bn1_gamma, bn1_gamma, bn1_beta, c.bn1_cache, d);
  d = nn::conv2d_backward(c.x_masked, conv1_w, conv1_w, conv1_b, d, 1);

  // Mask backward: d_mask[j] += sum_{b,f} d[b,f,j] * x[b,f,j]; dx = d * m[j].
  const int batch = x.dim(0), f = fingerprint.bins, n = fingerprint.frames;
  mask.ensure_grad();
  T dx;
  if (dinput) dx = T(x.shape);
  for (int b = 0; b < batch; ++b) {
    const double* px = x.data.data() + static_cast<std::ptrdiff_t>(b) * f * n;
    const double* pd = d.data.data() + static_cast<std::ptrdiff_t>(b) * f * n;
    double* pdx = dinput ? dx.data.data() + static_cast<std::ptrdiff_t>(b) * f * n : nullptr;
    for (int r = 0; r < f; ++r)
      for (int j = 0; j < n; ++j) {
        mask.grad[j] += pd[r * n + j] * px[r * n + j];
        if (pdx) pdx[r * n + j] = pd[r * n + j] * mask.data[j];
      }
  }
  if (dinput) *dinput = dx;
}

double PsdRegNet::loss_backward(const T& x, const T& target, T* dinput) {
  zero_grads();
  ForwardCache c;
  const T pred = forward(x, nn::Mode::train, /*dropout_on=*/false, nullptr, &c);
  auto [loss, dpred] = nn::mse_loss(pred, target);
  backward(x, c, dpred, dinput);
  return loss;
}

double PsdRegNet::estimate_force(const PsdWindow& window) {
  const auto t0 = std::chrono::steady_clock::now();
  if (window.values.rows() != fingerprint.bins || window.values.cols() != fingerprint.frames)
    throw ConfigError("estimate_force: window " + std::to_string(window.values.rows()) + "x" +
                      std::to_string(window.values.cols()) + " does not match model " +
                      fingerprint.describe());
  T x({1, 1, fingerprint.bins, fingerprint.frames});
  for (int r = 0; r < fingerprint.bins; ++r)
    for (int j = 0; j < fingerprint.frames; ++j)
      x.data[r * fingerprint.frames + j] = window.values(r, j);
  const T pred = forward_eval(x);
  const double force = pred.data[0] * label_std + label_mean;
  const auto t1 = std::chrono::steady_clock::now();
  latencies_ms_.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  return force;
}

namespace {

struct Snapshot {
  std::vector<T> tensors;
  nn::BatchNormRunning<double> bn1{16}, bn2{32};
};

Snapshot take_snapshot(PsdRegNet& net) {
  Snapshot s;
  for (auto& p : net.parameters()) s.tensors.push_back(*p.tensor);
  s.bn1 = net.bn1_running;
  s.bn2 = net.bn2_running;
  return s;
}

void restore_snapshot(PsdRegNet& net, const Snapshot& s) {
  auto params = net.parameters();
  for (size_t i = 0; i < params.size(); ++i) *params[i].tensor = s.tensors[i];
  net.bn1_running = s.bn1;
  net.bn2_running = s.bn2;
}

}  // namespace

PsdRegNet train(const TrainingDataset& dataset, const TrainSettings& settings, std::uint64_t seed,
                std::vector<EpochStats>* history) {
  if (dataset.items.empty()) throw ConfigError("train: dataset is empty");
  const int f = static_cast<int>(dataset.items.front().window.rows());
  const int n = static_cast<int>(dataset.items.front().window.cols());

  // Chronological 80/20 split within each recording: overlapping windows
  // share frames, so a shuffled split would leak between train and val.
  std::map<int, std::vector<size_t>> by_recording;
  for (size_t i = 0; i < dataset.items.size(); ++i)
    by_recording[dataset.items[i].recording].push_back(i);
  std::vector<size_t> train_idx, val_idx;
  for (auto& [rec, idx] : by_recording) {
    const size_t cut = static_cast<size_t>(
        std::floor(static_cast<double>(idx.size()) * (1.0 - settings.validation_fraction)));
    for (size_t i = 0; i < idx.size(); ++i)
      (i < cut ? train_idx : val_idx).push_back(idx[i]);
  }
  if (val_idx.size() < 2) throw ConfigError("train: validation split has fewer than 2 items");
  if (train_idx.size() < 2) throw ConfigError("train: training split has fewer than 2 items");

  double mean = 0.0;
  for (size_t i : train_idx) mean += dataset.items[i].force;
  mean /= static_cast<double>(train_idx.size());
  double var = 0.0;
  for (size_t i : train_idx) {
    const double d = dataset.items[i].force - mean;
    var += d * d;
  }
  var /= static_cast<double>(train_idx.size());
  if (var <= 0) throw ConfigError("train: labels are constant, z-score undefined");
  const double stddev = std::sqrt(var);

  ModelFingerprint fp;
  fp.bins = f;
  fp.frames = n;
  PsdRegNet net(fp);
  net.init_params(seed);
  net.label_mean = mean;
  net.label_std = stddev;
  net.collection_engagement = dataset.collection_engagement;

  auto params = net.parameters();
  std::vector<nn::AdamState<double>> adam(params.size());
  for (auto& a : adam) {
    a.lr = settings.learning_rate;
    a.weight_decay = settings.weight_decay;
  }
  nn::PlateauScheduler scheduler;
  scheduler.lr = settings.learning_rate;
  scheduler.factor = settings.scheduler_factor;
  scheduler.patience = settings.scheduler_patience;
  scheduler.lr_floor = settings.lr_floor;

  Rng shuffle_rng(seed ^ 0x747261696eULL);
  Rng dropout_rng(seed ^ 0x64726f70ULL);

  auto build_batch = [&](const std::vector<size_t>& idx, size_t begin, size_t count, T& x, T& y) {
    x = T({static_cast<int>(count), 1, f, n});
    y = T({static_cast<int>(count), 1});
    for (size_t b = 0; b < count; ++b) {
      const auto& item = dataset.items[idx[begin + b]];
      double* p = x.data.data() + static_cast<std::ptrdiff_t>(b) * f * n;
      for (int r = 0; r < f; ++r)
        for (int j = 0; j < n; ++j) p[r * n + j] = item.window(r, j);
      y.data[static_cast<Eigen::Index>(b)] = (item.force - mean) / stddev;
    }
  };

  auto validation_loss = [&]() {
    double total = 0.0;
    size_t done = 0;
    const size_t chunk = 256;
    while (done < val_idx.size()) {
      const size_t count = std::min(chunk, val_idx.size() - done);
      T x, y;
      build_batch(val_idx, done, count, x, y);
      const T pred = net.forward_eval(x);
      total += (pred.data - y.data).square().sum();
      done += count;
    }
    return total / static_cast<double>(val_idx.size());
  };

  double best_val = std::numeric_limits<double>::infinity();
  Snapshot best = take_snapshot(net);

  std::vector<size_t> order = train_idx;
  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    // Fisher-Yates with the project rng for cross-platform determinism.
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(shuffle_rng.uniform_int(i));
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t begin = 0; begin < order.size(); begin += settings.batch_size) {
      const size_t count = std::min(static_cast<size_t>(settings.batch_size),
                                    order.size() - begin);
      if (count < 2) continue;  // BN train mode needs at least 2 items
      T x, y;
      build_batch(order, begin, count, x, y);
      net.zero_grads();
      PsdRegNet::ForwardCache cache;
      const T pred = net.forward(x, nn::Mode::train, /*dropout_on=*/true, &dropout_rng, &cache);
      auto [loss, dpred] = nn::mse_loss(pred, y);
      net.backward(x, cache, dpred);

      for (size_t i = 0; i < params.size(); ++i)
        nn::adam_step(*params[i].tensor, params[i].tensor->grad, adam[i]);
      epoch_loss += loss * static_cast<double>(count);
      seen += count;
    }
    epoch_loss /= static_cast<double>(std::max<size_t>(seen, 1));

    const double val = validation_loss();
    const double lr = nn::scheduler_step(scheduler, val);
    for (auto& a : adam) a.lr = lr;
    if (history) history->push_back({epoch, epoch_loss, val, lr});
    if (val < best_val) {
      best_val = val;
      best = take_snapshot(net);
    }
  }
  restore_snapshot(net, best);
  return net;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write history CSV: " + path);
  out << "epoch,train_loss,val_loss,lr\n";
  for (const auto& e : history)
    out << e.epoch << "," << format_double(e.train_loss) << "," << format_double(e.val_loss)
        << "," << format_double(e.lr) << "\n";
}

// ---------------------------------------------------------------------------
// Checkpoint io: versioned little-endian binary
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'F', 'R', 'G', 'N', 'E', 'T', '1'};
constexpr std::uint16_t kByteOrder = 0x0102;
constexpr std::uint32_t kVersion = 1;

template <typename V>
void write_pod(std::ofstream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V read_pod(std::ifstream& in, const std::string& path) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw FormatError("truncated checkpoint: " + path);
  return v;
}

void write_named_array(std::ofstream& out, const std::string& name,
                       const std::vector<int>& shape, const double* data, Eigen::Index count) {
  write_pod(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_pod(out, static_cast<std::uint32_t>(shape.size()));
  for (int d : shape) write_pod(out, static_cast<std::int32_t>(d));
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * static_cast<Eigen::Index>(sizeof(double))));
}

}  // namespace

void save_checkpoint(const PsdRegNet& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  write_pod(out, kByteOrder);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::int32_t>(model.fingerprint.bins));
  write_pod(out, static_cast<std::int32_t>(model.fingerprint.frames));
  write_pod(out, model.fingerprint.band_low);
  write_pod(out, model.fingerprint.band_high);
  write_pod(out, model.fingerprint.control_rate);
  write_pod(out, model.fingerprint.sample_rate);
  write_pod(out, model.label_mean);
  write_pod(out, model.label_std);
  write_pod(out, model.collection_engagement);
  write_pod(out, model.dropout_p);

  PsdRegNet& m = const_cast<PsdRegNet&>(model);
  auto params = m.parameters();
  write_pod(out, static_cast<std::uint32_t>(params.size() + 4));
  for (const auto& p : params)
    write_named_array(out, p.name, p.tensor->shape, p.tensor->data.data(), p.tensor->size());
  write_named_array(out, "bn1_running_mean", {16}, model.bn1_running.mean.data(), 16);
  write_named_array(out, "bn1_running_var", {16}, model.bn1_running.var.data(), 16);
  write_named_array(out, "bn2_running_mean", {32}, model.bn2_running.mean.data(), 32);
  write_named_array(out, "bn2_running_var", {32}, model.bn2_running.var.data(), 32);
  out.write("ENDC", 4);
  if (!out) throw FormatError("short write: " + path);
}

PsdRegNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("not a model checkpoint: " + path);
  if (read_pod<std::uint16_t>(in, path) != kByteOrder)
    throw FormatError("checkpoint byte order mismatch: " + path);
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + ": " + path);

  ModelFingerprint fp;
  fp.bins = read_pod<std::int32_t>(in, path);
  fp.frames = read_pod<std::int32_t>(in, path);
  fp.band_low = read_pod<double>(in, path);
  fp.band_high = read_pod<double>(in, path);
  fp.control_rate = read_pod<double>(in, path);
  fp.sample_rate = read_pod<double>(in, path);

  PsdRegNet model(fp);
  model.label_mean = read_pod<double>(in, path);
  model.label_std = read_pod<double>(in, path);
  model.collection_engagement = read_pod<double>(in, path);
  model.dropout_p = read_pod<double>(in, path);

  const auto count = read_pod<std::uint32_t>(in, path);
  auto params = model.parameters();
  std::map<std::string, std::pair<double*, Eigen::Index>> slots;
  for (auto& p : params) slots[p.name] = {p.tensor->data.data(), p.tensor->size()};
  slots["bn1_running_mean"] = {model.bn1_running.mean.data(), 16};
  slots["bn1_running_var"] = {model.bn1_running.var.data(), 16};
  slots["bn2_running_mean"] = {model.bn2_running.mean.data(), 32};
  slots["bn2_running_var"] = {model.bn2_running.var.data(), 32};

  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint16_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError("truncated checkpoint: " + path);
    const auto ndim = read_pod<std::uint32_t>(in, path);
    Eigen::Index total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) total *= read_pod<std::int32_t>(in, path);
    auto slot = slots.find(name);
    if (slot == slots.end())
      throw FormatError("checkpoint has unknown tensor `" + name + "`: " + path);
    if (slot->second.second != total)
      throw FormatError("checkpoint tensor `" + name + "` has wrong size: " + path);
    in.read(reinterpret_cast<char*>(slot->second.first),
            static_cast<std::streamsize>(total * static_cast<Eigen::Index>(sizeof(double))));
    if (!in) throw FormatError("truncated checkpoint: " + path);
    slots.erase(slot);
  }
  if (!slots.empty())
    throw FormatError("checkpoint is missing tensor `" + slots.begin()->first + "`: " + path);
  char trailer[4];
  in.read(trailer, 4);
  if (!in || std::memcmp(trailer, "ENDC", 4) != 0)
    throw FormatError("checkpoint trailer missing (truncated?): " + path);
  return model;
}

void require_fingerprint_match(const PsdRegNet& model, const EncoderConfig& encoder) {
  if (!model.fingerprint.matches(encoder))
    throw ConfigError("model/encoder fingerprint mismatch: model {" +
                      model.fingerprint.describe() + "} vs encoder {" +
                      ModelFingerprint::from_encoder(encoder).describe() + "}");
}

}  // namespace afrg
