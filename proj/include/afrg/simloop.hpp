#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "afrg/audio.hpp"
#include "afrg/baseline.hpp"
#include "afrg/config.hpp"
#include "afrg/control.hpp"
#include "afrg/plant.hpp"
#include "afrg/psd.hpp"
#include "afrg/psdregnet.hpp"

namespace afrg {

enum class FeedbackSource { ft, afrg, baseline };
enum class Scenario { fixed_point, straight_line };
enum class ForceProfileMode { continuous, intermittent };

FeedbackSource feedback_from_string(const std::string& s);
Scenario scenario_from_string(const std::string& s);
ForceProfileMode profile_from_string(const std::string& s);
std::string to_string(FeedbackSource f);
std::string to_string(Scenario s);
std::string to_string(ForceProfileMode m);

struct SessionConfig {
  Scenario scenario = Scenario::fixed_point;
  FeedbackSource feedback = FeedbackSource::ft;
  ForceProfileMode profile = ForceProfileMode::intermittent;
  double force_target = 3.0;     // N
  double trial_duration = 28.0;  // s of engaged grinding per trial
  int trials = 1;
  std::vector<double> trial_positions;  // workpiece x per trial; default evenly spaced
  double preroll = 2.5;                 // s parked above the surface per trial
  double ramp_time = 8.0;               // continuous-mode ramp to target
  double clearance = 5e-4;              // initial tool height above the surface, m
  bool noise = true;                    // ambient noise profile on/off
  bool wear = false;
  std::uint64_t seed = 0;
};

struct StepRecord {
  double t = 0.0;
  double force_target = 0.0;
  double normal_force = 0.0;      // plant truth / F-T sensor reading
  double estimated_force = std::nan("");  // network estimate when attached
  double baseline_force = std::nan("");   // peak-tracker estimate when attached
  double feedback_force = std::nan("");   // the value the controller consumed
  double omega = 0.0;
  double engagement = 0.0;
  double removal_rate = 0.0;
  double removed_volume = 0.0;
  Eigen::Vector3d pose = Eigen::Vector3d::Zero();
  Eigen::Vector3d joint_velocity = Eigen::Vector3d::Zero();
  int trial = 0;
  bool active = false;
  bool warming_up = true;
  bool fault = false;
  bool saturated = false;
  bool clamped = false;
};

struct TrialSummary {
  int index = 0;
  double position = 0.0;  // workpiece x of the footprint centre
  double start_time = 0.0, end_time = 0.0;
  double depth = 0.0;           // max depth increase over the trial, m
  double removed_volume = 0.0;  // m^3 over the trial
  double mean_force = 0.0;      // measured F_n over the engaged span
  double mean_estimate = 0.0;   // mean network estimate (NaN if absent)
};

struct ExperimentLog {
  std::vector<StepRecord> records;
  std::vector<TrialSummary> trials;
  std::vector<PsdFrame> frames;  // encoder output, for spectrogram plots
  Eigen::ArrayXd depth_field;
  double grid_resolution = 0.0;
  double control_rate = 20.0;
  double force_target = 0.0;
  std::string scenario, feedback, profile;
  std::uint64_t seed = 0;
  std::string config_echo;
};

// Fixed-order desk-scale closed loop, one control period at a time:
// plant -> audio -> encoder -> estimator -> controller.
class GrindingSession {
 public:
  GrindingSession(const Config& cfg, const SessionConfig& session, PsdRegNet* model,
                  PeakTracker* tracker);

  ExperimentLog run();

  // Audio accumulated across the whole session (the microphone recording).
  const Eigen::ArrayXd& audio() const { return audio_; }
  const PlantParams& plant_params() const { return plant_params_; }
  const Workpiece& workpiece() const { return workpiece_; }
  const EncoderConfig& encoder_config() const { return encoder_config_; }

 private:
  void run_trial(int index, double position, ExperimentLog& log);
  double profile_target(double since_engage) const;

  Config cfg_;
  SessionConfig session_;
  PlantParams plant_params_;
  Workpiece workpiece_;
  AcousticModel acoustic_;
  EncoderConfig encoder_config_;
  ControllerConfig controller_config_;
  ArmModel arm_;
  double workpiece_origin_x_ = 0.22;
  double surface_y_ = -0.15;
  double tool_angle_ = -1.2;
  int plant_substeps_ = 10;

  PlantState plant_;
  AudioChain chain_;
  StreamingEncoder encoder_;
  HybridController controller_;
  PsdRegNet* model_ = nullptr;
  PeakTracker* tracker_ = nullptr;

  Eigen::Vector3d pending_velocity_ = Eigen::Vector3d::Zero();
  double last_feedback_time_ = -1e9;
  double last_feedback_value_ = 0.0;
  std::uint64_t steps_ = 0;  // completed control periods; time = steps / f_c
  double time_ = 0.0;
  Eigen::ArrayXd audio_;
  Eigen::Index audio_used_ = 0;
};

// Damped-least-squares inverse kinematics for session setup.
Eigen::Vector3d solve_ik(const ArmModel& arm, const Eigen::Vector2d& target, double angle);

void write_log(const ExperimentLog& log, const std::string& path);
ExperimentLog read_log(const std::string& path);

SessionConfig session_from_config(const Config& cfg);

}  // namespace afrg
