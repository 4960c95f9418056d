#include "afrg/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "afrg/errors.hpp"

namespace afrg {

Material material_from_string(const std::string& name) {
  if (name == "aluminium") return Material::aluminium;
  if (name == "steel") return Material::steel;
  throw ConfigError("unknown material preset: " + name);
}

std::string to_string(Material m) {
  return m == Material::aluminium ? "aluminium" : "steel";
}

void PlantParams::validate() const {
  if (disc_radius <= 0) throw ConfigError("plant: disc_radius must be > 0");
  if (no_load_speed <= 0) throw ConfigError("plant: no_load_speed must be > 0");
  if (stall_torque <= 0) throw ConfigError("plant: stall_torque must be > 0");
  if (rotor_time_constant <= 0) throw ConfigError("plant: rotor_time_constant must be > 0");
  if (contact_stiffness <= 0) throw ConfigError("plant: contact_stiffness must be > 0");
  if (!(0 < engagement_floor && engagement_floor <= engagement_initial && engagement_initial < 2))
    throw ConfigError("plant: require 0 < engagement_floor <= engagement_initial < 2");
  if (wear_volume_scale <= 0) throw ConfigError("plant: wear_volume_scale must be > 0");
  if (removal_gain <= 0) throw ConfigError("plant: removal_gain must be > 0");
  if (contact_area <= 0) throw ConfigError("plant: contact_area must be > 0");
}

void Workpiece::validate() const {
  if (thickness <= 0) throw ConfigError("workpiece: thickness must be > 0");
  if (length <= 0) throw ConfigError("workpiece: length must be > 0");
  if (grid_resolution <= 0) throw ConfigError("workpiece: grid_resolution must be > 0");
  if (disc_width <= 0) throw ConfigError("workpiece: disc_width must be > 0");
  if (feed_rate < 0) throw ConfigError("workpiece: feed_rate must be >= 0");
  if (trial_duration <= 0) throw ConfigError("workpiece: trial_duration must be > 0");
}

int Workpiece::cell_count() const {
  return std::max(1, static_cast<int>(std::lround(length / grid_resolution)));
}

void apply_material_preset(PlantParams& params, Material m) {
  switch (m) {
    case Material::aluminium:
      params.removal_gain = 0.6e-16;
      params.wear_volume_scale = 1.0e-6;
      break;
    case Material::steel:
      params.removal_gain = 4.0e-17;
      params.wear_volume_scale = 8.0e-9;
      break;
  }
}

PlantState make_initial_state(const PlantParams& params, const Workpiece& wp) {
  params.validate();
  wp.validate();
  PlantState s;
  s.omega = params.no_load_speed;
  s.engagement = params.engagement_initial;
  s.depth_field = Eigen::ArrayXd::Zero(wp.cell_count());
  s.tool_position = Eigen::Vector2d(0.0, 1.0);  // well above the surface
  return s;
}

double motor_torque(double omega, const PlantParams& params) {
  if (omega < 0) throw DomainError("motor_torque: omega must be >= 0");
  const double tau = params.stall_torque * (1.0 - omega / params.no_load_speed);
  return std::clamp(tau, 0.0, params.stall_torque);
}

double motor_speed(double torque, const PlantParams& params) {
  if (torque < 0 || torque > params.stall_torque)
    throw DomainError("motor_speed: torque outside [0, stall_torque]");
  return params.no_load_speed * (1.0 - torque / params.stall_torque);
}

double material_removal_rate(double tangential_force, double relative_speed,
                             const PlantParams& params) {
  if (tangential_force < 0) throw DomainError("material_removal_rate: F_t must be >= 0");
  if (relative_speed < 0) throw DomainError("material_removal_rate: v_r must be >= 0");
  return params.removal_gain * tangential_force * relative_speed / params.contact_area;
}

double wear_update(double mu_current, double delta_volume, const PlantParams& params) {
  if (delta_volume < 0) throw DomainError("wear_update: delta_volume must be >= 0");
  const double floor = params.engagement_floor;
  return floor + (mu_current - floor) * std::exp(-delta_volume / params.wear_volume_scale);
}

double footprint_length(const PlantParams& params, const Workpiece& wp) {
  return params.contact_area / wp.disc_width;
}

std::pair<int, int> footprint_cells(double x, const PlantParams& params, const Workpiece& wp) {
  const double half = 0.5 * footprint_length(params, wp);
  const int n = wp.cell_count();
  // Cell i centre is at (i + 0.5) * grid_resolution.
  int first = static_cast<int>(std::ceil((x - half) / wp.grid_resolution - 0.5));
  int last = static_cast<int>(std::floor((x + half) / wp.grid_resolution - 0.5));
  first = std::max(first, 0);
  last = std::min(last, n - 1);
  return {first, last};
}

PlantState step_plant(const PlantState& state, const Eigen::Vector2d& tool_pose_command,
                      double feed, double dt, const PlantParams& params, const Workpiece& wp) {
  if (dt <= 0) throw DomainError("step_plant: dt must be > 0");
  if (dt > params.rotor_time_constant / 5.0)
    throw DomainError("step_plant: dt must be <= rotor_time_constant / 5");

  PlantState next = state;
  next.penetration_clamped = false;

  // Wear from the previous step's removal is applied at the step boundary so
  // that the stored engagement and forces stay mutually consistent
  // (tangential_force == engagement * normal_force exactly).
  next.engagement = params.wear_enabled
                        ? wear_update(state.engagement, state.last_step_removed, params)
                        : state.engagement;

  const auto [first, last] = footprint_cells(tool_pose_command.x(), params, wp);
  double penetration = 0.0;
  if (first <= last) {
    // The rigid disc rests on the least-ground cell under the footprint.
    const double min_depth = state.depth_field.segment(first, last - first + 1).minCoeff();
    penetration = -min_depth - tool_pose_command.y();
    if (penetration > params.max_penetration) {
      penetration = params.max_penetration;
      next.penetration_clamped = true;
    }
    penetration = std::max(penetration, 0.0);
  }

  next.normal_force = params.contact_stiffness * penetration;
  next.tangential_force = next.engagement * next.normal_force;

  // Rotor: exact first-order relaxation toward the torque-balance speed.
  const double load_torque = next.tangential_force * params.disc_radius;
  const double omega_balance =
      load_torque >= params.stall_torque ? 0.0 : motor_speed(load_torque, params);
  const double decay = std::exp(-dt / params.rotor_time_constant);
  next.omega = omega_balance + (state.omega - omega_balance) * decay;

  const double relative_speed = params.disc_radius * next.omega + std::abs(feed);
  const double vdot = material_removal_rate(next.tangential_force, relative_speed, params);
  next.removal_rate = vdot;

  if (vdot > 0.0 && first <= last) {
    const int cells = last - first + 1;
    const double depth_inc = vdot * dt / (wp.disc_width * cells * wp.grid_resolution);
    next.depth_field.segment(first, cells) += depth_inc;
  }
  next.removed_volume = state.removed_volume + vdot * dt;
  next.last_step_removed = vdot * dt;
  next.time = state.time + dt;
  next.tool_position = tool_pose_command;
  return next;
}

void export_depth_csv(const PlantState& state, const Workpiece& wp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write depth CSV: " + path);
  out << "position_m,depth_m\n";
  for (int i = 0; i < state.depth_field.size(); ++i) {
    const double x = (i + 0.5) * wp.grid_resolution;
    out << format_double(x) << "," << format_double(state.depth_field[i]) << "\n";
  }
}

PlantParams plant_params_from_config(const Config& cfg) {
  PlantParams p;
  const Material m = material_from_string(cfg.get_string("workpiece.material", "aluminium"));
  apply_material_preset(p, m);
  p.disc_radius = cfg.get_double("plant.disc_radius", p.disc_radius);
  p.no_load_speed = cfg.get_double("plant.no_load_speed", p.no_load_speed);
  p.stall_torque = cfg.get_double("plant.stall_torque", p.stall_torque);
  p.rotor_time_constant = cfg.get_double("plant.rotor_time_constant", p.rotor_time_constant);
  p.contact_stiffness = cfg.get_double("plant.contact_stiffness", p.contact_stiffness);
  p.engagement_initial = cfg.get_double("plant.engagement_initial", p.engagement_initial);
  p.engagement_floor = cfg.get_double("plant.engagement_floor", p.engagement_floor);
  p.wear_volume_scale = cfg.get_double("plant.wear_volume_scale", p.wear_volume_scale);
  p.removal_gain = cfg.get_double("plant.removal_gain", p.removal_gain);
  p.contact_area = cfg.get_double("plant.contact_area", p.contact_area);
  p.wear_enabled = cfg.get_bool("plant.wear_enabled", p.wear_enabled);
  p.max_penetration = cfg.get_double("plant.max_penetration", p.max_penetration);
  p.validate();
  return p;
}

Workpiece workpiece_from_config(const Config& cfg) {
  Workpiece w;
  w.material = material_from_string(cfg.get_string("workpiece.material", "aluminium"));
  w.thickness = cfg.get_double("workpiece.thickness", w.thickness);
  w.length = cfg.get_double("workpiece.length", w.length);
  w.grid_resolution = cfg.get_double("workpiece.grid_resolution", w.grid_resolution);
  w.feed_rate = cfg.get_double("workpiece.feed_rate", w.feed_rate);
  w.disc_width = cfg.get_double("workpiece.disc_width", w.disc_width);
  w.trial_duration = cfg.get_double("workpiece.trial_duration", w.trial_duration);
  w.validate();
  return w;
}

}  // namespace afrg
