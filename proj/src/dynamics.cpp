#include "racegp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "racegp/errors.hpp"

namespace racegp {

namespace {

void require_dynamic_speed(const VehicleState& s, const VehicleParams& p) {
  if (!(s.v >= p.v_min_dyn)) {
    throw SpeedBelowDynamicFloor("speed " + std::to_string(s.v) + " m/s is below v_min_dyn " +
                                 std::to_string(p.v_min_dyn) + " m/s");
  }
}

SlipAngles slip_angles_unchecked(const VehicleState& s, const VehicleParams& p) {
  return {s.delta - s.beta - p.l_f * s.omega / s.v, -s.beta + p.l_r * s.omega / s.v};
}

LateralForces forces_unchecked(const VehicleState& s, const ControlInput& u,
                               const VehicleParams& p) {
  const SlipAngles alpha = slip_angles_unchecked(s, p);
  const double L = p.wheelbase();
  const double front_load = (p.m * p.g * p.l_r - p.m * u.a_long * p.h_cog) / L;
  const double rear_load = (p.m * p.g * p.l_f + p.m * u.a_long * p.h_cog) / L;
  return {2.0 * p.mu * p.C_sf * front_load * alpha.front,
          2.0 * p.mu * p.C_sr * rear_load * alpha.rear};
}

StateDerivative dynamic_unchecked(const VehicleState& s, const ControlInput& u,
                                  const VehicleParams& p) {
  const LateralForces f = forces_unchecked(s, u, p);
  StateDerivative d;
  d.x = s.v * std::cos(s.psi + s.beta);
  d.y = s.v * std::sin(s.psi + s.beta);
  d.delta = u.delta_v;
  d.v = u.a_long;
  d.psi = s.omega;
  d.omega = (p.l_f * f.front * std::cos(s.delta) - p.l_r * f.rear) / p.I_z;
  d.beta = (f.front + f.rear) / (p.m * s.v) - s.omega;
  return d;
}

// Rates of omega = v tan(delta) / L and beta = atan(l_r tan(delta) / L).
StateDerivative low_speed_derivative(const VehicleState& s, const ControlInput& u,
                                     const VehicleParams& p) {
  const double L = p.wheelbase();
  const double tan_d = std::tan(s.delta);
  const double sec2_d = 1.0 + tan_d * tan_d;
  const double ratio = p.l_r * tan_d / L;
  StateDerivative d;
  d.x = s.v * std::cos(s.psi + s.beta);
  d.y = s.v * std::sin(s.psi + s.beta);
  d.delta = u.delta_v;
  d.v = u.a_long;
  d.psi = s.omega;
  d.omega = (u.a_long * tan_d + s.v * sec2_d * u.delta_v) / L;
  d.beta = p.l_r * sec2_d * u.delta_v / (L * (1.0 + ratio * ratio));
  return d;
}

std::array<double, VehicleState::kSize> axpy(const std::array<double, VehicleState::kSize>& x,
                                             double h,
                                             const std::array<double, VehicleState::kSize>& d) {
  std::array<double, VehicleState::kSize> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + h * d[i];
  return out;
}

}  // namespace

bool VehicleState::is_finite() const {
  for (double c : to_array()) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

void VehicleParams::validate() const {
  const auto positive = [](double value, const char* name) {
    if (!(value > 0.0)) throw ConfigError(std::string("vehicle parameter ") + name + " must be > 0");
  };
  positive(m, "m");
  positive(I_z, "I_z");
  positive(l_f, "l_f");
  positive(l_r, "l_r");
  positive(mu, "mu");
  positive(C_sf, "C_sf");
  positive(C_sr, "C_sr");
  positive(g, "g");
  positive(delta_max, "delta_max");
  positive(a_max, "a_max");
  positive(delta_v_max, "delta_v_max");
  positive(v_max, "v_max");
  positive(v_min_dyn, "v_min_dyn");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kinematic:
      return "kinematic";
    case ModelKind::dynamic:
      return "dynamic";
    case ModelKind::ekin:
      return "ekin";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "kinematic") return ModelKind::kinematic;
  if (name == "dynamic") return ModelKind::dynamic;
  if (name == "ekin") return ModelKind::ekin;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

StateDerivative kinematic_derivative(const VehicleState& s, const ControlInput& u,
                                     const VehicleParams& p) {
  StateDerivative d;
  d.x = s.v * std::cos(s.psi);
  d.y = s.v * std::sin(s.psi);
  d.delta = u.delta_v;
  d.v = u.a_long;
  d.psi = s.v * std::tan(s.delta) / p.wheelbase();
  return d;
}

SlipAngles tire_slip_angles(const VehicleState& s, const VehicleParams& p) {
  require_dynamic_speed(s, p);
  return slip_angles_unchecked(s, p);
}

LateralForces lateral_tire_forces(const VehicleState& s, const ControlInput& u,
                                  const VehicleParams& p) {
  require_dynamic_speed(s, p);
  return forces_unchecked(s, u, p);
}

StateDerivative dynamic_derivative(const VehicleState& s, const ControlInput& u,
                                   const VehicleParams& p) {
  require_dynamic_speed(s, p);
  return dynamic_unchecked(s, u, p);
}

StateDerivative ekin_derivative(const VehicleState& s, const ControlInput& u,
                                const VehicleParams& p) {
  const double L = p.wheelbase();
  // delta_dot * v + delta * v_dot
  const double drive = u.delta_v * s.v + s.delta * u.a_long;
  StateDerivative d;
  d.x = s.v * std::cos(s.psi + s.beta);
  d.y = s.v * std::sin(s.psi + s.beta);
  d.delta = u.delta_v;
  d.v = u.a_long;
  d.psi = s.omega;
  d.omega = drive / L;
  d.beta = L * drive;
  return d;
}

StateDerivative blended_dynamic_derivative(const VehicleState& s, const ControlInput& u,
                                           const VehicleParams& p) {
  const double v_hi = p.v_min_dyn;
  const double v_lo = 0.5 * p.v_min_dyn;
  if (s.v >= v_hi) return dynamic_unchecked(s, u, p);
  const StateDerivative low = low_speed_derivative(s, u, p);
  if (s.v <= v_lo) return low;
  const double w = (s.v - v_lo) / (v_hi - v_lo);
  const StateDerivative high = dynamic_unchecked(s, u, p);
  StateDerivative d = low;
  d.omega = w * high.omega + (1.0 - w) * low.omega;
  d.beta = w * high.beta + (1.0 - w) * low.beta;
  return d;
}

StateDerivative model_derivative(ModelKind model, const VehicleState& s, const ControlInput& u,
                                 const VehicleParams& p) {
  switch (model) {
    case ModelKind::kinematic:
      return kinematic_derivative(s, u, p);
    case ModelKind::dynamic:
      return blended_dynamic_derivative(s, u, p);
    case ModelKind::ekin:
      return ekin_derivative(s, u, p);
  }
  return {};
}

ControlInput clamp_input(const VehicleState& s, const ControlInput& u, const VehicleParams& p) {
  ControlInput c;
  c.a_long = std::clamp(u.a_long, -p.a_max, p.a_max);
  c.delta_v = std::clamp(u.delta_v, -p.delta_v_max, p.delta_v_max);
  if ((s.delta >= p.delta_max && c.delta_v > 0.0) ||
      (s.delta <= -p.delta_max && c.delta_v < 0.0)) {
    c.delta_v = 0.0;
  }
  if (s.v >= p.v_max && c.a_long > 0.0) c.a_long = 0.0;
  return c;
}

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

VehicleState integrate_step(ModelKind model, const VehicleState& s, const ControlInput& u_raw,
                            const VehicleParams& p, double dt, int substeps) {
  if (!(dt > 0.0) || substeps < 1) throw Error("integrate_step needs dt > 0 and substeps >= 1");
  const ControlInput u = clamp_input(s, u_raw, p);
  const double h = dt / substeps;
  const bool hold_pose_slip = model != ModelKind::kinematic;
  const double omega_hold = s.omega;
  const double beta_hold = s.beta;

  using Vec = std::array<double, VehicleState::kSize>;
  const auto rates = [&](const Vec& xs) {
    const VehicleState st = VehicleState::from_array(xs);
    StateDerivative d = model_derivative(model, st, u, p);
    if (hold_pose_slip) {
      d.x = st.v * std::cos(st.psi + beta_hold);
      d.y = st.v * std::sin(st.psi + beta_hold);
      d.psi = omega_hold;
    }
    return d.to_array();
  };

  Vec x = s.to_array();
  for (int i = 0; i < substeps; ++i) {
    const Vec k1 = rates(x);
    const Vec k2 = rates(axpy(x, 0.5 * h, k1));
    const Vec k3 = rates(axpy(x, 0.5 * h, k2));
    const Vec k4 = rates(axpy(x, h, k3));
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
  }

  VehicleState out = VehicleState::from_array(x);
  out.delta = std::clamp(out.delta, -p.delta_max, p.delta_max);
  out.psi = wrap_angle(out.psi);
  if (!out.is_finite()) throw NonFiniteState("integrate_step produced a non-finite state");
  return out;
}

}  // namespace racegp
