#include "racegp/controller.hpp"

#include <algorithm>
#include <cmath>

#include "racegp/errors.hpp"

namespace racegp {

void ControllerConfig::validate(double spacing) const {
  if (!(lookahead_base > 0.0 && lookahead_gain > 0.0 && k_speed > 0.0 && k_steer > 0.0)) {
    throw ConfigError("controller gains must be positive");
  }
  if (lookahead_base < spacing) {
    throw ConfigError("controller lookahead_base must be at least the resampling spacing");
  }
}

double pure_pursuit_steer(const VehicleState& s, const RefLine& line, const ControllerConfig& c,
                          const VehicleParams& p) {
  const Projection near = lookup(line, s.x, s.y);
  const double L = c.lookahead_base + c.lookahead_gain * std::max(s.v, 0.0);
  const RefPoint target = line.at(near.s + L);
  const double dx = target.x - s.x;
  const double dy = target.y - s.y;
  const double y_vehicle = -std::sin(s.psi) * dx + std::cos(s.psi) * dy;
  const double kappa = 2.0 * y_vehicle / (L * L);
  return std::clamp(std::atan(p.wheelbase() * kappa), -p.delta_max, p.delta_max);
}

ControlInput control_step(const VehicleState& s, const RefLine& line, const ControllerConfig& c,
                          const VehicleParams& p) {
  const double target_delta = pure_pursuit_steer(s, line, c, p);
  const double v_ref = line.points[lookup(line, s.x, s.y).index].v_ref;
  ControlInput u;
  u.delta_v = std::clamp(c.k_steer * (target_delta - s.delta), -p.delta_v_max, p.delta_v_max);
  u.a_long = std::clamp(c.k_speed * (v_ref - s.v), -p.a_max, p.a_max);
  return u;
}

}  // namespace racegp
