#include "afrg/simloop.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "afrg/errors.hpp"

namespace afrg {

using nlohmann::json;

FeedbackSource feedback_from_string(const std::string& s) {
  if (s == "ft") return FeedbackSource::ft;
  if (s == "afrg") return FeedbackSource::afrg;
  if (s == "baseline") return FeedbackSource::baseline;
  throw ConfigError("unknown feedback source: " + s + " (expected ft, afrg, or baseline)");
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "fixed_point") return Scenario::fixed_point;
  if (s == "straight_line") return Scenario::straight_line;
  throw ConfigError("unknown scenario: " + s + " (expected fixed_point or straight_line)");
}

ForceProfileMode profile_from_string(const std::string& s) {
  if (s == "continuous") return ForceProfileMode::continuous;
  if (s == "intermittent") return ForceProfileMode::intermittent;
  throw ConfigError("unknown force profile: " + s);
}

std::string to_string(FeedbackSource f) {
  switch (f) {
    case FeedbackSource::ft: return "ft";
    case FeedbackSource::afrg: return "afrg";
    case FeedbackSource::baseline: return "baseline";
  }
  return "?";
}

std::string to_string(Scenario s) {
  return s == Scenario::fixed_point ? "fixed_point" : "straight_line";
}

std::string to_string(ForceProfileMode m) {
  return m == ForceProfileMode::continuous ? "continuous" : "intermittent";
}

Eigen::Vector3d solve_ik(const ArmModel& arm, const Eigen::Vector2d& target, double angle) {
  const Eigen::Vector3d goal(target.x(), target.y(), angle);
  const std::vector<Eigen::Vector3d> seeds = {
      {-0.5, 1.8, -2.5}, {0.3, -1.8, 0.3}, {-1.2, 1.2, -1.2}, {0.8, 1.0, -3.0}};
  for (const auto& seed : seeds) {
    ArmModel work = arm;
    work.q = seed;
    for (int iter = 0; iter < 500; ++iter) {
      const Eigen::Vector3d err = goal - forward_kinematics(work).as_vector();
      if (err.norm() < 1e-12) return work.q;
      const Eigen::Matrix3d j = jacobian(work);
      const Eigen::Matrix3d jjt = j * j.transpose() + 1e-8 * Eigen::Matrix3d::Identity();
      work.q += j.transpose() * jjt.ldlt().solve(err);
    }
    if ((goal - forward_kinematics(work).as_vector()).norm() < 1e-10) return work.q;
  }
  throw ConfigError("solve_ik: target (" + format_double(target.x()) + ", " +
                    format_double(target.y()) + ", " + format_double(angle) +
                    ") is unreachable for the configured arm");
}

GrindingSession::GrindingSession(const Config& cfg, const SessionConfig& session,
                                 PsdRegNet* model, PeakTracker* tracker)
    : cfg_(cfg),
      session_(session),
      plant_params_(plant_params_from_config(cfg)),
      workpiece_(workpiece_from_config(cfg)),
      acoustic_([&] {
        AcousticModel m = acoustic_model_from_config(cfg, cfg.get_double("plant.no_load_speed", 3665.0));
        if (!session.noise) {
          m.noise.pink_level = 0.0;
          m.noise.bursts.clear();
        }
        return m;
      }()),
      encoder_config_(encoder_config_from_config(cfg)),
      controller_config_(controller_config_from_config(cfg)),
      arm_(arm_from_config(cfg)),
      plant_(),
      chain_(acoustic_, session.seed ^ 0x617564696fULL),
      encoder_(encoder_config_),
      controller_(controller_config_),
      model_(model),
      tracker_(tracker) {
  plant_params_.wear_enabled = session.wear;
  workpiece_origin_x_ = cfg.get_double("workpiece.origin_x", workpiece_origin_x_);
  surface_y_ = cfg.get_double("workpiece.surface_y", surface_y_);
  tool_angle_ = cfg.get_double("arm.tool_angle", tool_angle_);
  plant_substeps_ = cfg.get_int("sim.plant_substeps", plant_substeps_);

  const double period_samples = acoustic_.sample_rate / encoder_config_.control_rate;
  if (std::abs(period_samples - std::lround(period_samples)) > 1e-9)
    throw ConfigError("sim: sample_rate / control_rate must be an integer");
  if (std::lround(period_samples) % plant_substeps_ != 0)
    throw ConfigError("sim: plant_substeps must divide the samples per control period");
  const double dt = 1.0 / (encoder_config_.control_rate * plant_substeps_);
  if (dt > plant_params_.rotor_time_constant / 5.0)
    throw ConfigError("sim: plant substep exceeds rotor_time_constant / 5; raise sim.plant_substeps");
  if (model_) require_fingerprint_match(*model_, encoder_config_);

  plant_ = make_initial_state(plant_params_, workpiece_);
}

double GrindingSession::profile_target(double since_engage) const {
  if (since_engage < 0) return 0.0;
  if (session_.profile == ForceProfileMode::intermittent) return session_.force_target;
  const double ramp = std::max(session_.ramp_time, 1e-9);
  return session_.force_target * std::min(1.0, since_engage / ramp);
}

void GrindingSession::run_trial(int index, double position, ExperimentLog& log) {
  // Park the tool above this trial's spot; repositioning between trials is
  // instantaneous (the trial clock starts at the preroll).
  const Eigen::Vector2d start_arm(position + workpiece_origin_x_,
                                  surface_y_ + session_.clearance);
  arm_.q = solve_ik(arm_, start_arm, tool_angle_);
  controller_.reset();
  pending_velocity_.setZero();

  const Pose initial_pose = forward_kinematics(arm_);
  const double engage_time = time_ + session_.preroll;
  const double end_time = engage_time + session_.trial_duration;
  const double period = 1.0 / encoder_config_.control_rate;
  const int samples_per_period =
      static_cast<int>(std::lround(acoustic_.sample_rate / encoder_config_.control_rate));
  const int samples_per_substep = samples_per_period / plant_substeps_;
  const double dt = period / plant_substeps_;

  TrialSummary summary;
  summary.index = index;
  summary.position = position;
  summary.start_time = time_;
  const Eigen::ArrayXd depth_before = plant_.depth_field;
  const double volume_before = plant_.removed_volume;
  double force_sum = 0.0, estimate_sum = 0.0;
  int force_count = 0, estimate_count = 0;

  Eigen::ArrayXd omega_fs(samples_per_period);
  while (time_ < end_time - 1e-9) {
    const bool active = time_ >= engage_time - 1e-9;
    const double target = active ? profile_target(time_ - engage_time) : 0.0;

    // 1) Plant: integrate the arm under the held joint velocities and step
    //    the contact/rotor dynamics at the substep rate.
    for (int s = 0; s < plant_substeps_; ++s) {
      const double omega_before = plant_.omega;
      arm_.q += pending_velocity_ * dt;
      const Pose pose = forward_kinematics(arm_);
      const Eigen::Vector2d tool_plant(pose.position.x() - workpiece_origin_x_,
                                       pose.position.y() - surface_y_);
      plant_ = step_plant(plant_, tool_plant, workpiece_.feed_rate, dt, plant_params_,
                          workpiece_);
      for (int i = 0; i < samples_per_substep; ++i)
        omega_fs[s * samples_per_substep + i] =
            omega_before + (plant_.omega - omega_before) * (i + 1.0) / samples_per_substep;
    }

    // 2) Audio for the elapsed period, through the contact-mic chain.
    const AudioBlock block = chain_.process(omega_fs, plant_.engagement);
    if (audio_.size() < audio_used_ + block.samples.size())
      audio_.conservativeResize(std::max<Eigen::Index>(2 * audio_.size() + block.samples.size(),
                                                       audio_used_ + block.samples.size()));
    audio_.segment(audio_used_, block.samples.size()) = block.samples;
    audio_used_ += block.samples.size();

    // 3) Encoder.
    const auto frames = encoder_.push_audio(block);
    for (const auto& f : frames) log.frames.push_back(f);

    // 4) Estimators.
    StepRecord rec;
    rec.warming_up =
        encoder_.frames_emitted() < static_cast<std::uint64_t>(encoder_config_.frames);
    if (model_) {
      const PsdWindow window = encoder_.current_input();
      if (!window.warming_up) rec.estimated_force = model_->estimate_force(window);
    }
    if (tracker_ && !frames.empty()) rec.baseline_force = tracker_->estimate(frames.back());

    ++steps_;
    time_ = static_cast<double>(steps_) * period;

    double feedback = std::nan("");
    double feedback_time = -1e9;
    switch (session_.feedback) {
      case FeedbackSource::ft:
        feedback = plant_.normal_force;
        feedback_time = time_;
        break;
      case FeedbackSource::afrg:
        if (!std::isnan(rec.estimated_force)) {
          last_feedback_value_ = rec.estimated_force;
          last_feedback_time_ = time_;
        }
        feedback = last_feedback_value_;
        feedback_time = last_feedback_time_;
        break;
      case FeedbackSource::baseline:
        if (!std::isnan(rec.baseline_force)) {
          last_feedback_value_ = rec.baseline_force;
          last_feedback_time_ = time_;
        }
        feedback = last_feedback_value_;
        feedback_time = last_feedback_time_;
        break;
    }

    // 5) Controller produces the joint velocities for the next period.
    const Pose pose = forward_kinematics(arm_);
    if (active) {
      Pose desired = initial_pose;
      if (session_.scenario == Scenario::straight_line)
        desired.position.x() =
            initial_pose.position.x() + workpiece_.feed_rate * (time_ - engage_time);
      const ControlCommand cmd =
          controller_.step(target, feedback, feedback_time, time_, pose, desired, arm_);
      pending_velocity_ = cmd.joint_velocity;
      rec.fault = cmd.fault;
      rec.saturated = cmd.saturated;
    } else {
      pending_velocity_.setZero();
    }

    rec.t = time_;
    rec.force_target = target;
    rec.normal_force = plant_.normal_force;
    rec.feedback_force = feedback;
    rec.omega = plant_.omega;
    rec.engagement = plant_.engagement;
    rec.removal_rate = plant_.removal_rate;
    rec.removed_volume = plant_.removed_volume;
    rec.pose = pose.as_vector();
    rec.joint_velocity = pending_velocity_;
    rec.trial = index;
    rec.active = active;
    rec.clamped = plant_.penetration_clamped;
    log.records.push_back(rec);

    if (active) {
      force_sum += plant_.normal_force;
      ++force_count;
      if (!std::isnan(rec.estimated_force)) {
        estimate_sum += rec.estimated_force;
        ++estimate_count;
      }
    }
  }

  summary.end_time = time_;
  summary.depth = (plant_.depth_field - depth_before).maxCoeff();
  summary.removed_volume = plant_.removed_volume - volume_before;
  summary.mean_force = force_count ? force_sum / force_count : 0.0;
  summary.mean_estimate = estimate_count ? estimate_sum / estimate_count : std::nan("");
  log.trials.push_back(summary);
}

ExperimentLog GrindingSession::run() {
  ExperimentLog log;
  log.control_rate = encoder_config_.control_rate;
  log.force_target = session_.force_target;
  log.scenario = to_string(session_.scenario);
  log.feedback = to_string(session_.feedback);
  log.profile = to_string(session_.profile);
  log.seed = session_.seed;
  log.grid_resolution = workpiece_.grid_resolution;

  std::vector<double> positions = session_.trial_positions;
  if (positions.empty()) {
    for (int k = 0; k < session_.trials; ++k)
      positions.push_back(workpiece_.length * (k + 1.0) / (session_.trials + 1.0));
  }
  if (static_cast<int>(positions.size()) != session_.trials)
    throw ConfigError("session: trial_positions length does not match trials");

  for (int k = 0; k < session_.trials; ++k) run_trial(k, positions[k], log);

  log.depth_field = plant_.depth_field;
  log.config_echo = cfg_.echo();
  audio_.conservativeResize(audio_used_);
  return log;
}

namespace {

json record_to_json(const StepRecord& r) {
  json j;
  j["t"] = r.t;
  j["target"] = r.force_target;
  j["f_n"] = r.normal_force;
  if (!std::isnan(r.estimated_force)) j["f_hat"] = r.estimated_force;
  if (!std::isnan(r.baseline_force)) j["f_peak"] = r.baseline_force;
  if (!std::isnan(r.feedback_force)) j["feedback"] = r.feedback_force;
  j["omega"] = r.omega;
  j["mu"] = r.engagement;
  j["vdot"] = r.removal_rate;
  j["v_cum"] = r.removed_volume;
  j["pose"] = {r.pose.x(), r.pose.y(), r.pose.z()};
  j["u"] = {r.joint_velocity.x(), r.joint_velocity.y(), r.joint_velocity.z()};
  j["trial"] = r.trial;
  j["active"] = r.active;
  j["warmup"] = r.warming_up;
  if (r.fault) j["fault"] = true;
  if (r.saturated) j["saturated"] = true;
  if (r.clamped) j["clamped"] = true;
  return j;
}

StepRecord record_from_json(const json& j) {
  StepRecord r;
  r.t = j.at("t");
  r.force_target = j.at("target");
  r.normal_force = j.at("f_n");
  if (j.contains("f_hat")) r.estimated_force = j.at("f_hat");
  if (j.contains("f_peak")) r.baseline_force = j.at("f_peak");
  if (j.contains("feedback")) r.feedback_force = j.at("feedback");
  r.omega = j.at("omega");
  r.engagement = j.at("mu");
  r.removal_rate = j.at("vdot");
  r.removed_volume = j.at("v_cum");
  r.pose = Eigen::Vector3d(j.at("pose")[0], j.at("pose")[1], j.at("pose")[2]);
  r.joint_velocity = Eigen::Vector3d(j.at("u")[0], j.at("u")[1], j.at("u")[2]);
  r.trial = j.at("trial");
  r.active = j.at("active");
  r.warming_up = j.at("warmup");
  r.fault = j.value("fault", false);
  r.saturated = j.value("saturated", false);
  r.clamped = j.value("clamped", false);
  return r;
}

}  // namespace

void write_log(const ExperimentLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write log: " + path);
  for (const auto& r : log.records) out << record_to_json(r).dump() << "\n";

  json meta;
  meta["control_rate"] = log.control_rate;
  meta["force_target"] = log.force_target;
  meta["scenario"] = log.scenario;
  meta["feedback"] = log.feedback;
  meta["profile"] = log.profile;
  meta["seed"] = log.seed;
  meta["grid_resolution"] = log.grid_resolution;
  meta["config"] = log.config_echo;
  meta["depth_field"] = std::vector<double>(log.depth_field.data(),
                                            log.depth_field.data() + log.depth_field.size());
  json trials = json::array();
  for (const auto& t : log.trials) {
    json jt;
    jt["index"] = t.index;
    jt["position"] = t.position;
    jt["start"] = t.start_time;
    jt["end"] = t.end_time;
    jt["depth"] = t.depth;
    jt["volume"] = t.removed_volume;
    jt["mean_force"] = t.mean_force;
    if (!std::isnan(t.mean_estimate)) jt["mean_estimate"] = t.mean_estimate;
    trials.push_back(jt);
  }
  meta["trials"] = trials;
  std::ofstream meta_out(path + ".meta.json");
  if (!meta_out) throw FormatError("cannot write log meta: " + path + ".meta.json");
  meta_out << meta.dump(2) << "\n";

  // Encoder frames as CSV for spectrogram-style plots.
  if (!log.frames.empty()) {
    std::ofstream frames_out(path + ".frames.csv");
    if (!frames_out) throw FormatError("cannot write frames: " + path + ".frames.csv");
    frames_out << "t_s";
    for (Eigen::Index i = 0; i < log.frames.front().values.size(); ++i) frames_out << ",v" << i;
    frames_out << "\n";
    for (const auto& f : log.frames) {
      frames_out << format_double(f.frame_time);
      for (Eigen::Index i = 0; i < f.values.size(); ++i)
        frames_out << "," << format_double(f.values[i]);
      frames_out << "\n";
    }
  }
}

ExperimentLog read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open log: " + path);
  ExperimentLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.records.push_back(record_from_json(json::parse(line)));
  }

  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    json meta;
    meta_in >> meta;
    log.control_rate = meta.value("control_rate", 20.0);
    log.force_target = meta.value("force_target", 0.0);
    log.scenario = meta.value("scenario", "");
    log.feedback = meta.value("feedback", "");
    log.profile = meta.value("profile", "");
    log.seed = meta.value("seed", 0ULL);
    log.grid_resolution = meta.value("grid_resolution", 0.0);
    log.config_echo = meta.value("config", "");
    if (meta.contains("depth_field")) {
      const auto& d = meta["depth_field"];
      log.depth_field.resize(static_cast<Eigen::Index>(d.size()));
      for (size_t i = 0; i < d.size(); ++i) log.depth_field[static_cast<Eigen::Index>(i)] = d[i];
    }
    for (const auto& jt : meta.value("trials", json::array())) {
      TrialSummary t;
      t.index = jt.at("index");
      t.position = jt.at("position");
      t.start_time = jt.at("start");
      t.end_time = jt.at("end");
      t.depth = jt.at("depth");
      t.removed_volume = jt.at("volume");
      t.mean_force = jt.at("mean_force");
      t.mean_estimate = jt.value("mean_estimate", std::nan(""));
      log.trials.push_back(t);
    }
  }

  std::ifstream frames_in(path + ".frames.csv");
  if (frames_in) {
    std::string header;
    std::getline(frames_in, header);
    while (std::getline(frames_in, line)) {
      if (line.empty()) continue;
      PsdFrame f;
      std::vector<double> values;
      size_t pos = 0;
      while (pos <= line.size()) {
        const size_t comma = line.find(',', pos);
        const std::string tok =
            line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        values.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      f.frame_time = values[0];
      f.values.resize(static_cast<Eigen::Index>(values.size()) - 1);
      for (size_t i = 1; i < values.size(); ++i)
        f.values[static_cast<Eigen::Index>(i - 1)] = values[i];
      log.frames.push_back(std::move(f));
    }
  }
  return log;
}

SessionConfig session_from_config(const Config& cfg) {
  SessionConfig s;
  s.scenario = scenario_from_string(cfg.get_string("experiment.scenario", "fixed_point"));
  s.feedback = feedback_from_string(cfg.get_string("experiment.feedback", "ft"));
  s.profile = profile_from_string(cfg.get_string("experiment.profile", "intermittent"));
  s.force_target = cfg.get_double("experiment.force_target", s.force_target);
  s.trial_duration = cfg.get_double("experiment.trial_duration", s.trial_duration);
  s.trials = cfg.get_int("experiment.trials", s.trials);
  s.trial_positions = cfg.get_list("experiment.trial_positions", {});
  s.preroll = cfg.get_double("experiment.preroll", s.preroll);
  s.ramp_time = cfg.get_double("experiment.ramp_time", s.ramp_time);
  s.clearance = cfg.get_double("experiment.clearance", s.clearance);
  s.noise = cfg.get_bool("experiment.noise", s.noise);
  s.wear = cfg.get_bool("experiment.wear", s.wear);
  s.seed = cfg.get_u64("experiment.seed", s.seed);
  return s;
}

}  // namespace afrg
