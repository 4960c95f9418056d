#pragma once

#include <Eigen/Dense>
#include <string>

#include "afrg/config.hpp"

namespace afrg {

enum class Material { aluminium, steel };

Material material_from_string(const std::string& name);
std::string to_string(Material m);

// Physical parameters of the rotary tool, contact, and removal process.
struct PlantParams {
  double disc_radius = 0.012;         // r, m
  double no_load_speed = 3665.0;      // omega_nl, rad/s (35000 rpm)
  double stall_torque = 0.045;        // tau_stall, N*m
  double rotor_time_constant = 0.05;  // s
  double contact_stiffness = 5.0e4;   // k_c, N/m
  double engagement_initial = 0.5;    // mu_0
  double engagement_floor = 0.2;      // mu_min
  double wear_volume_scale = 8.0e-9;  // V_w, m^3 of removed material per e-fold of wear
  double removal_gain = 0.6e-16;      // k_t, m^3/(N*m)
  double contact_area = 1.0e-5;       // A, m^2
  bool wear_enabled = true;
  double max_penetration = 5.0e-3;    // commands beyond this are clamped and flagged

  void validate() const;  // throws ConfigError on an invariant violation
};

struct Workpiece {
  double thickness = 0.002;        // h, m
  double length = 0.1;             // m
  double grid_resolution = 5.0e-4; // m
  Material material = Material::aluminium;
  double feed_rate = 0.0;          // v_f, m/s (0 for fixed-point grinding)
  double disc_width = 0.005;       // w_d, m
  double trial_duration = 30.0;    // t_s, s

  void validate() const;
  int cell_count() const;
};

// Select (removal_gain, wear_volume_scale) for a material preset.
void apply_material_preset(PlantParams& params, Material m);

struct PlantState {
  double time = 0.0;
  double omega = 0.0;             // rad/s
  double normal_force = 0.0;      // N
  double tangential_force = 0.0;  // N
  double engagement = 0.0;        // mu_theta
  double removed_volume = 0.0;    // m^3
  double removal_rate = 0.0;      // m^3/s over the last step
  double last_step_removed = 0.0; // m^3 removed by the step that produced this state
  Eigen::ArrayXd depth_field;     // removed depth per cell along the length, m
  Eigen::Vector2d tool_position = Eigen::Vector2d::Zero();
  bool penetration_clamped = false;
};

// Fresh state: tool free-spinning at no-load speed, untouched workpiece.
PlantState make_initial_state(const PlantParams& params, const Workpiece& wp);

// Linear DC motor torque-speed curve: tau_stall at rest, zero at no-load speed.
double motor_torque(double omega, const PlantParams& params);

// Exact inverse of motor_torque on its monotone segment.
double motor_speed(double torque, const PlantParams& params);

// Preston-type removal law in tangential form: Vdot = k_t * F_t * v_r / A.
double material_removal_rate(double tangential_force, double relative_speed,
                             const PlantParams& params);

// Exponential decay of the engagement coefficient toward its floor with
// cumulative removed volume.
double wear_update(double mu_current, double delta_volume, const PlantParams& params);

// Advance the plant by one fixed step. The tool pose command is the tip
// position (x along the workpiece, y vertical; undeformed surface at y = 0,
// material below).
PlantState step_plant(const PlantState& state, const Eigen::Vector2d& tool_pose_command,
                      double feed, double dt, const PlantParams& params, const Workpiece& wp);

// Footprint length along the workpiece, contact_area / disc_width.
double footprint_length(const PlantParams& params, const Workpiece& wp);

// Inclusive cell index range under the footprint centred at x; empty range
// (first > last) when the footprint misses the workpiece.
std::pair<int, int> footprint_cells(double x, const PlantParams& params, const Workpiece& wp);

// Depth-field snapshot as CSV: header plus one `position_m,depth_m` row per cell.
void export_depth_csv(const PlantState& state, const Workpiece& wp, const std::string& path);

PlantParams plant_params_from_config(const Config& cfg);
Workpiece workpiece_from_config(const Config& cfg);

}  // namespace afrg
