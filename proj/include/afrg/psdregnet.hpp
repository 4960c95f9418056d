#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "afrg/nn.hpp"
#include "afrg/psd.hpp"

namespace afrg {

// Encoder settings a trained model is bound to; checked at load and before
// every estimate.
struct ModelFingerprint {
  int bins = 35;    // F
  int frames = 40;  // n
  double band_low = 230.0;
  double band_high = 580.0;
  double control_rate = 20.0;
  double sample_rate = 16000.0;

  static ModelFingerprint from_encoder(const EncoderConfig& cfg);
  bool matches(const EncoderConfig& cfg) const;
  std::string describe() const;
};

struct TrainSettings {
  int epochs = 5;
  int batch_size = 64;
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double scheduler_factor = 0.5;
  int scheduler_patience = 5;
  double lr_floor = 1e-6;
  double validation_fraction = 0.2;
};

struct TrainingExample {
  Eigen::MatrixXd window;  // F x n
  double force = 0.0;      // measured F_n at the window's end time, N
  double time = 0.0;
  int recording = 0;
};

struct TrainingDataset {
  std::vector<TrainingExample> items;
  double collection_engagement = 0.5;  // mu_d, frozen during collection
  std::vector<double> targets;
  std::vector<std::string> modes;
  double total_duration = 0.0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

// Mask -> (conv 5x5 p1, BN, ReLU) x2 -> adaptive avg pool 4x4 -> flatten ->
// FC 64 (dropout 0.3) -> ReLU -> FC 1, on z-scored force labels.
class PsdRegNet {
 public:
  using T = nn::Tensor<double>;

  PsdRegNet() : PsdRegNet(ModelFingerprint{}) {}
  explicit PsdRegNet(const ModelFingerprint& fp);

  void init_params(std::uint64_t seed);

  std::vector<nn::ParamView<double>> parameters();
  Eigen::Index parameter_count();

  struct ForwardCache;
  // x: [B, 1, F, n]. Train-mode BN updates the running statistics.
  T forward(const T& x, nn::Mode bn_mode, bool dropout_on, Rng* dropout_rng,
            ForwardCache* cache = nullptr);
  T forward_eval(const T& x);

  // Per-stage output shapes of one forward pass (for shape conformance).
  std::vector<std::pair<std::string, std::vector<int>>> shape_trace(int batch = 1);

  // nn::gradient_check contract; BN in train mode, dropout off.
  double loss_forward(const T& x, const T& target);
  double loss_backward(const T& x, const T& target, T* dinput);
  void zero_grads();

  // Backprop from d(loss)/d(prediction) through the whole stack, accumulating
  // parameter gradients; optionally returns d(loss)/d(input).
  void backward(const T& x, const ForwardCache& cache, const T& dpred, T* dinput = nullptr);

  // Denormalized force estimate for one window; wall time is recorded.
  double estimate_force(const PsdWindow& window);
  const std::vector<double>& latencies_ms() const { return latencies_ms_; }
  void clear_latencies() { latencies_ms_.clear(); }

  // Diagonal temporal mask applied to the n time columns.
  static Eigen::MatrixXd apply_temporal_mask(const Eigen::MatrixXd& window,
                                             const Eigen::VectorXd& mask);

  ModelFingerprint fingerprint;
  double label_mean = 0.0;
  double label_std = 1.0;
  double collection_engagement = 0.5;
  double dropout_p = 0.3;

  // Parameters (public: the training loop and checkpoint io own the layout).
  T mask;                                      // [n]
  T conv1_w, conv1_b, conv2_w, conv2_b;        // [16,1,5,5],[16],[32,16,5,5],[32]
  T bn1_gamma, bn1_beta, bn2_gamma, bn2_beta;  // [16]x2, [32]x2
  T fc1_w, fc1_b, fc2_w, fc2_b;                // [64,512],[64],[1,64],[1]
  nn::BatchNormRunning<double> bn1_running{16}, bn2_running{32};

 private:
  mutable std::vector<double> latencies_ms_;
};

PsdRegNet train(const TrainingDataset& dataset, const TrainSettings& settings,
                std::uint64_t seed, std::vector<EpochStats>* history = nullptr);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

void save_checkpoint(const PsdRegNet& model, const std::string& path);
PsdRegNet load_checkpoint(const std::string& path);

// Throws ConfigError naming both sides when the model and encoder disagree.
void require_fingerprint_match(const PsdRegNet& model, const EncoderConfig& encoder);

}  // namespace afrg
