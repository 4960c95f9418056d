#pragma once

#include <string>
#include <vector>

#include "afrg/baseline.hpp"
#include "afrg/config.hpp"
#include "afrg/psdregnet.hpp"
#include "afrg/simloop.hpp"

namespace afrg {

struct DatasetSpec {
  std::vector<double> targets = {2.0, 3.0, 4.0, 5.0, 7.0};
  double total_duration = 280.0;  // s of audio across all recordings
  double preroll = 2.5;
  double ramp_time = 8.0;
  std::uint64_t seed = 0;
};

struct RecordingInfo {
  std::string name;
  double target = 0.0;
  std::string mode;  // continuous | intermittent
  std::uint64_t seed = 0;
  double duration = 0.0;
};

// Closed-loop force-sensor-feedback grinding at each (target, mode) pair with
// ambient noise on and wear off; writes WAV + JSONL labels + metadata.json.
std::vector<RecordingInfo> generate_dataset(const Config& cfg, const DatasetSpec& spec,
                                            const std::string& out_dir);

// Replay the WAVs through the encoder and pair windows with labels.
// Warm-up windows (zero-filled columns) are excluded.
TrainingDataset load_dataset(const Config& cfg, const std::string& dir);

// Short clean (noise-free) fixed-point runs at the given targets; fits the
// dominant-peak-frequency -> force affine map on steady-state frames.
PeakCalibration calibrate_baseline(const Config& cfg, std::uint64_t seed,
                                   const std::vector<double>& targets = {2.0, 3.0, 4.0});

DatasetSpec dataset_spec_from_config(const Config& cfg);

}  // namespace afrg
