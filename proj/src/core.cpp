#include "drn/core.hpp"

#include <algorithm>
#include <cmath>

namespace drn {

void KinematicLimits::validate() const {
  if (!(v_min >= 0.0) || !(v_max >= v_min)) {
    throw std::invalid_argument("kinematic limits: require 0 <= v_min <= v_max");
  }
  if (!(heading_rate_max > 0.0) || !(tilt_rate_max > 0.0)) {
    throw std::invalid_argument("kinematic limits: turn-rate limits must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("kinematic limits: dt must be positive");
  }
}

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

SphericalRelative relative_spherical(const Vec3& from, const Vec3& to) {
  const Vec3 delta = to - from;
  const double range = delta.norm();
  if (!(range > 0.0)) {
    throw DegenerateGeometry("relative_spherical: coincident points");
  }
  SphericalRelative rel;
  rel.range = range;
  rel.elevation = std::acos(std::clamp(delta.z() / range, -1.0, 1.0));
  const double horizontal = std::hypot(delta.x(), delta.y());
  if (horizontal <= 1e-12 * range) {
    rel.azimuth = 0.0;
    rel.on_polar_axis = true;
  } else {
    rel.azimuth = wrap_angle(std::atan2(delta.y(), delta.x()));
  }
  return rel;
}

Vec3 direction_vector(double azimuth, double elevation) {
  const double se = std::sin(elevation);
  return {std::cos(azimuth) * se, std::sin(azimuth) * se, std::cos(elevation)};
}

Vec3 control_from_polar(const Polar& motion, double dt) {
  return motion.speed * dt * direction_vector(motion.heading, motion.tilt);
}

Polar polar_from_control(const Vec3& displacement, double dt, const Polar& previous) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("polar_from_control: dt must be positive");
  }
  const double length = displacement.norm();
  if (length == 0.0) {
    return {0.0, previous.heading, previous.tilt};
  }
  Polar out;
  out.speed = length / dt;
  out.tilt = std::acos(std::clamp(displacement.z() / length, -1.0, 1.0));
  const double horizontal = std::hypot(displacement.x(), displacement.y());
  out.heading = horizontal > 0.0 ? wrap_angle(std::atan2(displacement.y(), displacement.x()))
                                 : previous.heading;
  return out;
}

Polar clamp_kinematics(const Polar& proposed, const Polar& previous, const KinematicLimits& limits) {
  Polar out;
  out.speed = std::clamp(proposed.speed, limits.v_min, limits.v_max);

  const double turn = wrap_angle(proposed.heading - previous.heading);
  const double limited_turn = std::clamp(turn, -limits.heading_rate_max, limits.heading_rate_max);
  out.heading = wrap_angle(previous.heading + limited_turn);

  const double climb = proposed.tilt - previous.tilt;
  const double limited_climb = std::clamp(climb, -limits.tilt_rate_max, limits.tilt_rate_max);
  out.tilt = std::clamp(previous.tilt + limited_climb, 0.0, kPi);
  return out;
}

}  // namespace drn
