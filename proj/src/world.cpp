#include "drn/world.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace drn {

MotionModel build_random_walk_model(double dt, const Vec3& intensity) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("random walk model: dt must be positive");
  }
  if ((intensity.array() < 0.0).any() || !intensity.allFinite()) {
    throw std::invalid_argument("random walk model: intensities must be finite and >= 0");
  }
  MotionModel model;
  model.dt = dt;
  model.intensity = intensity;
  model.transition.setIdentity();
  model.transition.topRightCorner<3, 3>() = dt * Mat3::Identity();

  const Mat3 w = intensity.asDiagonal();
  model.process_noise.topLeftCorner<3, 3>() = dt * dt * dt / 3.0 * w;
  model.process_noise.topRightCorner<3, 3>() = dt * dt / 2.0 * w;
  model.process_noise.bottomLeftCorner<3, 3>() = dt * dt / 2.0 * w;
  model.process_noise.bottomRightCorner<3, 3>() = dt * w;

  Eigen::LDLT<Mat6> ldlt(model.process_noise);
  const Vec6 d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Mat6 l = ldlt.matrixL();
  Mat6 factor = l * d.asDiagonal();
  model.noise_factor = ldlt.transpositionsP().transpose() * factor;
  return model;
}

TargetState step_target(const TargetState& state, const MotionModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec6 z;
  for (int i = 0; i < 6; ++i) z(i) = normal(rng);
  return TargetState::from_stacked(model.transition * state.stacked() + model.noise_factor * z);
}

namespace {

// Parametric interval of the line a + t (b - a) inside the open box; false if empty.
bool segment_box_interval(const Vec3& a, const Vec3& b, const Obstacle& box, double& t_enter,
                          double& t_exit) {
  const Vec3 dir = b - a;
  t_enter = -std::numeric_limits<double>::infinity();
  t_exit = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = box.min_corner(axis);
    const double hi = box.max_corner(axis);
    if (dir(axis) == 0.0) {
      if (!(a(axis) > lo && a(axis) < hi)) return false;
      continue;
    }
    double t0 = (lo - a(axis)) / dir(axis);
    double t1 = (hi - a(axis)) / dir(axis);
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  return t_enter < t_exit;
}

}  // namespace

bool los_visible(const Vec3& a, const Vec3& b, std::span<const Obstacle> obstacles) {
  for (const Obstacle& box : obstacles) {
    double t_enter = 0.0;
    double t_exit = 0.0;
    if (!segment_box_interval(a, b, box, t_enter, t_exit)) continue;
    if (std::max(t_enter, 0.0) < std::min(t_exit, 1.0)) return false;
  }
  return true;
}

double clearance(const Vec3& p, std::span<const Obstacle> obstacles) {
  double best = kNoObstacle;
  for (const Obstacle& box : obstacles) {
    const Vec3 nearest = p.cwiseMax(box.min_corner).cwiseMin(box.max_corner);
    best = std::min(best, (p - nearest).norm());
  }
  return best;
}

ClearanceDetail nearest_obstacle(const Vec3& p, std::span<const Obstacle> obstacles) {
  ClearanceDetail best;
  for (const Obstacle& box : obstacles) {
    const Vec3 nearest = p.cwiseMax(box.min_corner).cwiseMin(box.max_corner);
    const Vec3 away = p - nearest;
    const double distance = away.norm();
    if (distance >= best.distance) continue;
    best.distance = distance;
    if (distance > 0.0) {
      best.outward_normal = away / distance;
      continue;
    }
    // Inside: leave through the closest face.
    double shortest = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
      const double to_min = p(axis) - box.min_corner(axis);
      const double to_max = box.max_corner(axis) - p(axis);
      if (to_min < shortest) {
        shortest = to_min;
        best.outward_normal = -Vec3::Unit(axis);
      }
      if (to_max < shortest) {
        shortest = to_max;
        best.outward_normal = Vec3::Unit(axis);
      }
    }
  }
  return best;
}

}  // namespace drn
