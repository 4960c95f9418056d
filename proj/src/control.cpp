#include "afrg/control.hpp"

#include <algorithm>
#include <cmath>

#include "afrg/errors.hpp"

namespace afrg {

void ControllerConfig::validate() const {
  if (admittance_inertia <= 0 || admittance_damping <= 0)
    throw ConfigError("controller: admittance inertia and damping must be > 0");
  if (admittance_substeps < 1) throw ConfigError("controller: admittance_substeps must be >= 1");
  if (control_rate <= 0) throw ConfigError("controller: control_rate must be > 0");
  if (integral_limit < 0) throw ConfigError("controller: integral_limit must be >= 0");
  const Eigen::Matrix3d& s = projection;
  if (((s * s) - s).cwiseAbs().maxCoeff() > 1e-12 || (s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("controller: projection S must be idempotent and symmetric");
}

Pose forward_kinematics(const ArmModel& arm) {
  const double a1 = arm.q[0];
  const double a2 = arm.q[0] + arm.q[1];
  const double a3 = arm.q[0] + arm.q[1] + arm.q[2];
  Pose pose;
  pose.position.x() = arm.l1 * std::cos(a1) + arm.l2 * std::cos(a2) + arm.l3 * std::cos(a3);
  pose.position.y() = arm.l1 * std::sin(a1) + arm.l2 * std::sin(a2) + arm.l3 * std::sin(a3);
  pose.angle = a3;
  return pose;
}

Eigen::Matrix3d jacobian(const ArmModel& arm) {
  const double a1 = arm.q[0];
  const double a2 = arm.q[0] + arm.q[1];
  const double a3 = arm.q[0] + arm.q[1] + arm.q[2];
  const double s1 = arm.l1 * std::sin(a1), s2 = arm.l2 * std::sin(a2), s3 = arm.l3 * std::sin(a3);
  const double c1 = arm.l1 * std::cos(a1), c2 = arm.l2 * std::cos(a2), c3 = arm.l3 * std::cos(a3);
  Eigen::Matrix3d j;
  j << -(s1 + s2 + s3), -(s2 + s3), -s3,
        (c1 + c2 + c3),  (c2 + c3),  c3,
        1.0, 1.0, 1.0;
  return j;
}

double admittance_step(double force_target, double force_feedback, double v_prev, double dt,
                       double inertia, double damping) {
  if (dt <= 0) throw DomainError("admittance_step: dt must be > 0");
  return v_prev + (dt / inertia) * ((force_target - force_feedback) - damping * v_prev);
}

double pid_step(double error, PidState& state, double dt, double kp, double ki, double kd,
                double integral_limit) {
  if (dt <= 0) throw DomainError("pid_step: dt must be > 0");
  state.integral = std::clamp(state.integral + error * dt, -integral_limit, integral_limit);
  double derivative = 0.0;
  if (state.has_prev) derivative = (error - state.prev_error) / dt;
  state.prev_error = error;
  state.has_prev = true;
  return kp * error + ki * state.integral + kd * derivative;
}

ResolvedRateResult resolved_rate(const Eigen::Matrix3d& j, const Eigen::Vector3d& v_task,
                                 double lambda, double joint_velocity_limit) {
  ResolvedRateResult result;
  const Eigen::Matrix3d jjt = j * j.transpose() + lambda * lambda * Eigen::Matrix3d::Identity();
  result.qdot = j.transpose() * jjt.ldlt().solve(v_task);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(result.qdot[i]) > joint_velocity_limit) {
      result.qdot[i] = std::clamp(result.qdot[i], -joint_velocity_limit, joint_velocity_limit);
      result.saturated = true;
    }
  }
  return result;
}

HybridController::HybridController(const ControllerConfig& config) : config_(config) {
  config_.validate();
}

void HybridController::reset() {
  admittance_velocity_ = 0.0;
  pid_x_ = PidState{};
  pid_y_ = PidState{};
  pid_angle_ = PidState{};
}

ControlCommand HybridController::step(double force_target, double force_feedback,
                                      double feedback_time, double now, const Pose& current,
                                      const Pose& desired, const ArmModel& arm) {
  ControlCommand cmd;
  const double period = 1.0 / config_.control_rate;
  if (now - feedback_time > 2.0 * period + 1e-9) {
    // Stale feedback: stop and hold until the estimate stream recovers.
    cmd.fault = true;
    admittance_velocity_ = 0.0;
    return cmd;
  }

  // Admittance integrated at an internal substep; the force feedback is held
  // over the control period (zero-order hold).
  const double sub_dt = period / config_.admittance_substeps;
  for (int i = 0; i < config_.admittance_substeps; ++i)
    admittance_velocity_ = admittance_step(force_target, force_feedback, admittance_velocity_,
                                           sub_dt, config_.admittance_inertia,
                                           config_.admittance_damping);
  // The commanded normal velocity is rate-limited so that contact onset stays
  // within the estimator's response time.
  const double normal_velocity = std::clamp(admittance_velocity_, -config_.normal_speed_limit,
                                            config_.normal_speed_limit);

  Eigen::Vector3d v_pid;
  v_pid.x() = pid_step(desired.position.x() - current.position.x(), pid_x_, period, config_.kp,
                       config_.ki, config_.kd, config_.integral_limit);
  v_pid.y() = pid_step(desired.position.y() - current.position.y(), pid_y_, period, config_.kp,
                       config_.ki, config_.kd, config_.integral_limit);
  v_pid.z() = pid_step(desired.angle - current.angle, pid_angle_, period, config_.kp, config_.ki,
                       config_.kd, config_.integral_limit);

  cmd.task_velocity = config_.projection * (normal_velocity * config_.into_surface) +
                      (Eigen::Matrix3d::Identity() - config_.projection) * v_pid;

  const auto rr = resolved_rate(jacobian(arm), cmd.task_velocity, config_.dls_lambda,
                                arm.joint_velocity_limit);
  cmd.joint_velocity = rr.qdot;
  cmd.saturated = rr.saturated;
  return cmd;
}

ControllerConfig controller_config_from_config(const Config& cfg) {
  ControllerConfig c;
  const std::string axis = cfg.get_string("controller.normal_axis", "y");
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  if (axis == "x")
    n.x() = 1;
  else if (axis == "y")
    n.y() = 1;
  else
    throw ConfigError("controller.normal_axis must be x or y");
  c.projection = n * n.transpose();
  const double sign = cfg.get_double("controller.into_surface_sign", -1.0);
  c.into_surface = sign * n;

  c.admittance_inertia = cfg.get_double("controller.admittance_inertia", c.admittance_inertia);
  c.admittance_damping = cfg.get_double("controller.admittance_damping", c.admittance_damping);
  c.admittance_substeps = cfg.get_int("controller.admittance_substeps", c.admittance_substeps);
  c.normal_speed_limit = cfg.get_double("controller.normal_speed_limit", c.normal_speed_limit);
  c.kp = cfg.get_double("controller.pid.kp", c.kp);
  c.ki = cfg.get_double("controller.pid.ki", c.ki);
  c.kd = cfg.get_double("controller.pid.kd", c.kd);
  c.integral_limit = cfg.get_double("controller.pid.integral_limit", c.integral_limit);
  c.dls_lambda = cfg.get_double("controller.dls_lambda", c.dls_lambda);
  c.control_rate = cfg.get_double("encoder.control_rate", c.control_rate);
  c.validate();
  return c;
}

ArmModel arm_from_config(const Config& cfg) {
  ArmModel arm;
  arm.l1 = cfg.get_double("arm.l1", arm.l1);
  arm.l2 = cfg.get_double("arm.l2", arm.l2);
  arm.l3 = cfg.get_double("arm.l3", arm.l3);
  arm.joint_velocity_limit = cfg.get_double("arm.joint_velocity_limit", arm.joint_velocity_limit);
  if (arm.l1 <= 0 || arm.l2 <= 0 || arm.l3 <= 0)
    throw ConfigError("arm: link lengths must be > 0");
  return arm;
}

}  // namespace afrg
