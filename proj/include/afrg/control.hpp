#pragma once

#include <Eigen/Dense>
#include <string>

#include "afrg/config.hpp"

namespace afrg {

// Planar 3-revolute arm; task space is (x, y, orientation angle).
struct ArmModel {
  double l1 = 0.30, l2 = 0.25, l3 = 0.15;  // m
  Eigen::Vector3d q = Eigen::Vector3d::Zero();
  double joint_velocity_limit = 2.5;  // rad/s
};

struct ControllerConfig {
  Eigen::Matrix3d projection = Eigen::Vector3d(0, 1, 0).asDiagonal();  // S: normal axis
  Eigen::Vector3d into_surface = Eigen::Vector3d(0, -1, 0);  // direction that raises force
  double admittance_inertia = 10.0;    // M_a, N*s^2/m
  double admittance_damping = 2500.0;  // B_a, N*s/m
  int admittance_substeps = 20;        // internal Euler substeps per control period
  double normal_speed_limit = 1e-4;    // clamp on the commanded normal velocity, m/s
  double kp = 4.0, ki = 2.0, kd = 0.0;
  double integral_limit = 0.02;  // clamp on the error integral, m*s
  double dls_lambda = 0.01;
  double control_rate = 20.0;  // f_c, Hz

  void validate() const;
};

// End-effector pose: position (x, y) and orientation angle.
struct Pose {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double angle = 0.0;
  Eigen::Vector3d as_vector() const { return {position.x(), position.y(), angle}; }
};

Pose forward_kinematics(const ArmModel& arm);

// Analytic task Jacobian d(x, y, angle)/dq.
Eigen::Matrix3d jacobian(const ArmModel& arm);

// One explicit-Euler update of M_a dv/dt = (F_target - F_feedback) - B_a v.
// Positive v drives the tool into the surface when feedback < target.
double admittance_step(double force_target, double force_feedback, double v_prev, double dt,
                       double inertia, double damping);

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool has_prev = false;
};

double pid_step(double error, PidState& state, double dt, double kp, double ki, double kd,
                double integral_limit);

struct ResolvedRateResult {
  Eigen::Vector3d qdot = Eigen::Vector3d::Zero();
  bool saturated = false;
};

// Damped least squares qdot = J^T (J J^T + lambda^2 I)^-1 v_task, then
// joint-velocity clamping.
ResolvedRateResult resolved_rate(const Eigen::Matrix3d& j, const Eigen::Vector3d& v_task,
                                 double lambda, double joint_velocity_limit);

struct ControlCommand {
  Eigen::Vector3d joint_velocity = Eigen::Vector3d::Zero();
  bool fault = false;      // stale feedback; velocities zeroed
  bool saturated = false;  // joint-velocity clamp engaged
  Eigen::Vector3d task_velocity = Eigen::Vector3d::Zero();
};

// Admittance along the surface normal (projected by S), PID on the remaining
// (I - S) directions, resolved-rate to joint velocities. Called once per
// control period.
class HybridController {
 public:
  explicit HybridController(const ControllerConfig& config);

  ControlCommand step(double force_target, double force_feedback, double feedback_time,
                      double now, const Pose& current, const Pose& desired, const ArmModel& arm);

  void reset();
  double admittance_velocity() const { return admittance_velocity_; }
  const ControllerConfig& config() const { return config_; }

 private:
  ControllerConfig config_;
  double admittance_velocity_ = 0.0;
  PidState pid_x_, pid_y_, pid_angle_;
};

ControllerConfig controller_config_from_config(const Config& cfg);
ArmModel arm_from_config(const Config& cfg);

}  // namespace afrg
