#pragma once

#include <array>
#include <string_view>

namespace racegp {

/// Single-track state shared by the kinematic, dynamic and extended kinematic
/// models. The kinematic model reads only (x, y, delta, v, psi).
struct VehicleState {
  double x = 0.0;      // [m] east
  double y = 0.0;      // [m] north
  double delta = 0.0;  // [rad] steering angle
  double v = 0.0;      // [m/s] speed at C.O.G.
  double psi = 0.0;    // [rad] heading
  double omega = 0.0;  // [rad/s] yaw rate
  double beta = 0.0;   // [rad] body slip angle

  static constexpr std::size_t kSize = 7;

  std::array<double, kSize> to_array() const { return {x, y, delta, v, psi, omega, beta}; }
  static VehicleState from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
  bool is_finite() const;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Per-second rates of every VehicleState component.
struct StateDerivative {
  double x = 0.0;
  double y = 0.0;
  double delta = 0.0;
  double v = 0.0;
  double psi = 0.0;
  double omega = 0.0;
  double beta = 0.0;

  std::array<double, VehicleState::kSize> to_array() const {
    return {x, y, delta, v, psi, omega, beta};
  }
  friend bool operator==(const StateDerivative&, const StateDerivative&) = default;
};

struct ControlInput {
  double a_long = 0.0;   // [m/s^2]
  double delta_v = 0.0;  // [rad/s] steering velocity

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

/// Defaults are the 1/10-scale single-track parameters of the F1TENTH gym
/// simulator.
struct VehicleParams {
  double m = 3.74;          // [kg]
  double I_z = 0.04712;     // [kg m^2]
  double l_f = 0.15875;     // [m] C.O.G. to front axle
  double l_r = 0.17145;     // [m] C.O.G. to rear axle
  double h_cog = 0.074;     // [m]
  double mu = 1.0489;       // [-]
  double C_sf = 4.718;      // [1/rad]
  double C_sr = 5.4562;     // [1/rad]
  double g = 9.81;          // [m/s^2]
  double delta_max = 0.4189;   // [rad]
  double a_max = 9.51;         // [m/s^2]
  double delta_v_max = 3.2;    // [rad/s]
  double v_max = 20.0;         // [m/s]
  double v_min_dyn = 0.5;      // [m/s] below this the dynamic model blends to kinematic

  double wheelbase() const { return l_f + l_r; }

  /// Throws ConfigError if a positivity invariant is violated.
  void validate() const;

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

enum class ModelKind { kinematic, dynamic, ekin };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct SlipAngles {
  double front = 0.0;
  double rear = 0.0;
};

struct LateralForces {
  double front = 0.0;
  double rear = 0.0;
};

StateDerivative kinematic_derivative(const VehicleState& s, const ControlInput& u,
                                     const VehicleParams& p);

/// Throws SpeedBelowDynamicFloor when s.v < p.v_min_dyn.
SlipAngles tire_slip_angles(const VehicleState& s, const VehicleParams& p);

/// Linear tire forces with longitudinal load transfer. Throws
/// SpeedBelowDynamicFloor when s.v < p.v_min_dyn.
LateralForces lateral_tire_forces(const VehicleState& s, const ControlInput& u,
                                  const VehicleParams& p);

/// Throws SpeedBelowDynamicFloor when s.v < p.v_min_dyn.
StateDerivative dynamic_derivative(const VehicleState& s, const ControlInput& u,
                                   const VehicleParams& p);

StateDerivative ekin_derivative(const VehicleState& s, const ControlInput& u,
                                const VehicleParams& p);

/// Dynamic model over the whole speed range. Below v_min_dyn the yaw-rate and
/// slip rates come from differentiating the kinematic relations
/// omega = v tan(delta) / L and beta = atan(l_r tan(delta) / L), blended
/// linearly with the dynamic rates over [0.5 v_min_dyn, v_min_dyn].
StateDerivative blended_dynamic_derivative(const VehicleState& s, const ControlInput& u,
                                           const VehicleParams& p);

/// Derivative used by the simulator for the given model.
StateDerivative model_derivative(ModelKind model, const VehicleState& s, const ControlInput& u,
                                 const VehicleParams& p);

/// Saturates the input to the actuator limits. Steering velocity that would
/// push delta past +-delta_max is zeroed, as is acceleration beyond v_max.
ControlInput clamp_input(const VehicleState& s, const ControlInput& u, const VehicleParams& p);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

inline constexpr double kControlRate = 60.0;
inline constexpr double kControlPeriod = 1.0 / kControlRate;
inline constexpr int kDefaultSubsteps = 4;

/// One control period of RK4 with the input held constant.
///
/// For the dynamic and E-Kin models the pose equations (x, y, psi) use the
/// yaw rate and slip angle sampled at the start of the period, so both models
/// advance (x, y, delta, v, psi) identically from the same (state, input) and
/// differ only in (omega, beta). The kinematic model is plain RK4.
///
/// Afterwards delta is clamped to +-delta_max and psi is wrapped. Throws
/// NonFiniteState if any output component is not finite.
VehicleState integrate_step(ModelKind model, const VehicleState& s, const ControlInput& u,
                            const VehicleParams& p, double dt = kControlPeriod,
                            int substeps = kDefaultSubsteps);

}  // namespace racegp
