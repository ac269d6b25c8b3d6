#pragma once

#include "racegp/dynamics.hpp"
#include "racegp/track.hpp"

namespace racegp {

struct ControllerConfig {
  double lookahead_base = 0.6;   // [m]
  double lookahead_gain = 0.25;  // [s], lookahead = base + gain * v
  double k_speed = 2.0;          // [1/s]
  double k_steer = 5.0;          // [1/s]

  /// Throws ConfigError unless every gain is positive and the base lookahead
  /// spans at least one resampling interval.
  void validate(double spacing = kDefaultSpacing) const;

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

/// Classic pure pursuit: curvature 2 y_L / L^2 toward the point L ahead along
/// the line, converted to a steering angle with the bicycle wheelbase.
double pure_pursuit_steer(const VehicleState& s, const RefLine& line, const ControllerConfig& c,
                          const VehicleParams& p);

/// Proportional steering-angle and speed tracking in the (a_long, delta_v)
/// input space, saturated at the actuator limits.
ControlInput control_step(const VehicleState& s, const RefLine& line, const ControllerConfig& c,
                          const VehicleParams& p);

}  // namespace racegp
