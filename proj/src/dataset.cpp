#include "afrg/dataset.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "afrg/errors.hpp"
#include "afrg/rng.hpp"
#include "afrg/wav.hpp"

namespace afrg {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<RecordingInfo> generate_dataset(const Config& cfg, const DatasetSpec& spec,
                                            const std::string& out_dir) {
  fs::create_directories(out_dir);
  const int recordings = static_cast<int>(spec.targets.size()) * 2;
  if (recordings == 0) throw ConfigError("generate_dataset: no targets");
  const double per_recording = spec.total_duration / recordings;
  if (per_recording <= spec.preroll + 1.0)
    throw ConfigError("generate_dataset: total_duration too short for the preroll");

  Rng master(spec.seed);
  std::vector<RecordingInfo> infos;
  json meta;
  meta["schema"] = "afrg-dataset-1";
  meta["total_duration"] = spec.total_duration;
  meta["targets"] = spec.targets;
  meta["modes"] = {"continuous", "intermittent"};
  meta["collection_engagement"] = cfg.get_double("plant.engagement_initial", 0.5);
  json recs = json::array();

  int index = 0;
  for (const std::string mode : {"continuous", "intermittent"}) {
    for (double target : spec.targets) {
      RecordingInfo info;
      info.name = "rec" + std::to_string(index) + "_" + mode + "_" +
                  std::to_string(static_cast<int>(std::lround(target * 10))) + "dN";
      info.target = target;
      info.mode = mode;
      info.seed = master.next_u64();
      info.duration = per_recording;

      SessionConfig session;
      session.scenario = Scenario::fixed_point;
      session.feedback = FeedbackSource::ft;
      session.profile = profile_from_string(mode);
      session.force_target = target;
      session.trials = 1;
      session.preroll = spec.preroll;
      session.ramp_time = spec.ramp_time;
      session.trial_duration = per_recording - spec.preroll;
      session.noise = true;
      session.wear = false;  // mu_d stays frozen during collection
      session.seed = info.seed;

      GrindingSession sim(cfg, session, nullptr, nullptr);
      const ExperimentLog log = sim.run();

      const std::string wav_path = (fs::path(out_dir) / (info.name + ".wav")).string();
      write_wav(wav_path, sim.audio(), sim.encoder_config().sample_rate);

      const std::string labels_path = (fs::path(out_dir) / (info.name + ".labels.jsonl")).string();
      std::ofstream labels(labels_path);
      if (!labels) throw FormatError("cannot write labels: " + labels_path);
      for (const auto& r : log.records) {
        json j;
        j["t"] = r.t;
        j["f_n"] = r.normal_force;
        j["target"] = target;
        j["mode"] = mode;
        labels << j.dump() << "\n";
      }

      json jr;
      jr["name"] = info.name;
      jr["target"] = target;
      jr["mode"] = mode;
      jr["seed"] = info.seed;
      jr["duration"] = per_recording;
      recs.push_back(jr);
      infos.push_back(info);
      ++index;
    }
  }
  meta["recordings"] = recs;
  meta["config"] = cfg.echo();

  std::ofstream out(fs::path(out_dir) / "metadata.json");
  if (!out) throw FormatError("cannot write dataset metadata in " + out_dir);
  out << meta.dump(2) << "\n";
  return infos;
}

TrainingDataset load_dataset(const Config& cfg, const std::string& dir) {
  std::ifstream meta_in(fs::path(dir) / "metadata.json");
  if (!meta_in) throw FormatError("no metadata.json in " + dir);
  json meta;
  meta_in >> meta;

  const EncoderConfig encoder_cfg = encoder_config_from_config(cfg);
  TrainingDataset ds;
  ds.collection_engagement = meta.value("collection_engagement", 0.5);
  for (const auto& t : meta.value("targets", json::array())) ds.targets.push_back(t);
  for (const auto& m : meta.value("modes", json::array())) ds.modes.push_back(m);
  ds.total_duration = meta.value("total_duration", 0.0);

  int recording_index = 0;
  for (const auto& jr : meta.at("recordings")) {
    const std::string name = jr.at("name");
    const WavData wav = read_wav((fs::path(dir) / (name + ".wav")).string());
    if (std::abs(wav.sample_rate - encoder_cfg.sample_rate) > 1e-9)
      throw ConfigError("dataset recording " + name + " sample rate " +
                        format_double(wav.sample_rate) + " does not match encoder " +
                        format_double(encoder_cfg.sample_rate));

    // Labels keyed by control-step index.
    std::map<long long, double> labels;
    std::ifstream lab_in((fs::path(dir) / (name + ".labels.jsonl")).string());
    if (!lab_in) throw FormatError("missing labels for " + name);
    std::string line;
    while (std::getline(lab_in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const double t = j.at("t");
      labels[std::llround(t * encoder_cfg.control_rate)] = j.at("f_n");
    }

    StreamingEncoder encoder(encoder_cfg);
    std::vector<PsdFrame> frames;
    const Eigen::Index chunk = 4 * encoder_cfg.window_samples();
    for (Eigen::Index pos = 0; pos < wav.samples.size(); pos += chunk) {
      const Eigen::Index len = std::min(chunk, wav.samples.size() - pos);
      AudioBlock block{wav.samples.segment(pos, len), static_cast<double>(pos) / wav.sample_rate,
                       wav.sample_rate};
      for (auto& f : encoder.push_audio(block)) frames.push_back(std::move(f));
    }

    const int n = encoder_cfg.frames;
    const int f_bins = encoder_cfg.band_bins();
    for (size_t j = static_cast<size_t>(n) - 1; j < frames.size(); ++j) {
      const double end_time = frames[j].frame_time;
      const auto label = labels.find(std::llround(end_time * encoder_cfg.control_rate));
      if (label == labels.end()) continue;
      TrainingExample ex;
      ex.window.resize(f_bins, n);
      for (int col = 0; col < n; ++col)
        ex.window.col(col) = frames[j - n + 1 + col].values.matrix();
      ex.force = label->second;
      ex.time = end_time;
      ex.recording = recording_index;
      ds.items.push_back(std::move(ex));
    }
    ++recording_index;
  }
  if (ds.items.empty()) throw ConfigError("load_dataset: no usable windows in " + dir);
  return ds;
}

PeakCalibration calibrate_baseline(const Config& cfg, std::uint64_t seed,
                                   const std::vector<double>& targets) {
  const EncoderConfig encoder_cfg = encoder_config_from_config(cfg);
  std::vector<std::pair<double, double>> pairs;
  Rng master(seed ^ 0x63616cULL);

  for (double target : targets) {
    SessionConfig session;
    session.scenario = Scenario::fixed_point;
    session.feedback = FeedbackSource::ft;
    session.profile = ForceProfileMode::intermittent;
    session.force_target = target;
    session.trials = 1;
    session.preroll = 2.5;
    session.trial_duration = 12.0;
    session.noise = false;  // calibration on clean audio
    session.wear = false;
    session.seed = master.next_u64();

    GrindingSession sim(cfg, session, nullptr, nullptr);
    const ExperimentLog log = sim.run();

    std::map<long long, const PsdFrame*> by_step;
    for (const auto& f : log.frames)
      by_step[std::llround(f.frame_time * encoder_cfg.control_rate)] = &f;

    const double settle = 2.5 + 4.0;  // preroll + transient
    for (const auto& r : log.records) {
      if (!r.active || r.t < settle) continue;
      const auto it = by_step.find(std::llround(r.t * encoder_cfg.control_rate));
      if (it == by_step.end()) continue;
      const PsdFrame& frame = *it->second;
      if (frame.values.maxCoeff() <= 0) continue;
      int argmax = 0;
      frame.values.maxCoeff(&argmax);
      const double freq = (encoder_cfg.first_bin() + argmax) * encoder_cfg.bin_width();
      pairs.emplace_back(freq, r.normal_force);
    }
  }
  return fit_peak_calibration(pairs);
}

DatasetSpec dataset_spec_from_config(const Config& cfg) {
  DatasetSpec spec;
  spec.targets = cfg.get_list("dataset.targets", spec.targets);
  spec.total_duration = cfg.get_double("dataset.total_duration", spec.total_duration);
  spec.preroll = cfg.get_double("experiment.preroll", spec.preroll);
  spec.ramp_time = cfg.get_double("experiment.ramp_time", spec.ramp_time);
  spec.seed = cfg.get_u64("dataset.seed", spec.seed);
  return spec;
}

}  // namespace afrg
