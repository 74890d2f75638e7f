#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace drn {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Thrown when a geometric quantity is undefined (coincident points, zero range).
class DegenerateGeometry : public std::domain_error {
 public:
  explicit DegenerateGeometry(const std::string& what) : std::domain_error(what) {}
};

/// Thrown when a linear-algebra step cannot proceed (singular innovation, singular prior).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Position (m) and velocity (m/s) of the tracked target.
struct TargetState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 s;
    s << position, velocity;
    return s;
  }
  static TargetState from_stacked(const Vec6& s) { return {s.head<3>(), s.tail<3>()}; }
};

/// Speed V (m/s), heading Psi (rad, wrapped to (-pi, pi]) and tilt Theta (rad, in [0, pi]).
struct Polar {
  double speed = 0.0;
  double heading = 0.0;
  double tilt = kPi / 2.0;
};

struct UavPose {
  Vec3 position = Vec3::Zero();
  Polar motion;
};

/// Target position seen from a sensor: range, azimuth and elevation measured from +z.
struct SphericalRelative {
  double range = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  // Set when the target lies on the sensor's z axis; azimuth is then reported as 0.
  bool on_polar_axis = false;
};

struct KinematicLimits {
  double v_min = 0.0;
  double v_max = 20.0;
  double heading_rate_max = kPi / 6.0;  // rad per step
  double tilt_rate_max = kPi / 6.0;     // rad per step
  double dt = 1.0;

  void validate() const;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Throws DegenerateGeometry when the points coincide.
SphericalRelative relative_spherical(const Vec3& from, const Vec3& to);

/// Unit vector [cos(az) sin(el), sin(az) sin(el), cos(el)].
Vec3 direction_vector(double azimuth, double elevation);

/// Displacement travelled in one step of length dt at the given speed, heading and tilt.
Vec3 control_from_polar(const Polar& motion, double dt);

/// Inverse of control_from_polar. A zero displacement keeps the previous heading and tilt.
Polar polar_from_control(const Vec3& displacement, double dt, const Polar& previous = {});

/// Enforces the speed band and the per-step heading/tilt rate limits.
Polar clamp_kinematics(const Polar& proposed, const Polar& previous, const KinematicLimits& limits);

}  // namespace drn
