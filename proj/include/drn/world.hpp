#pragma once

#include <limits>
#include <random>
#include <span>

#include "drn/core.hpp"

namespace drn {

/// Axis-aligned box obstacle.
struct Obstacle {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();

  bool valid() const { return (min_corner.array() <= max_corner.array()).all(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
  }
};

/// Linear-Gaussian target motion s' = A s + q, q ~ N(0, Q).
struct MotionModel {
  Mat6 transition = Mat6::Identity();
  Mat6 process_noise = Mat6::Zero();
  Vec3 intensity = Vec3::Zero();
  double dt = 1.0;
  // F with F F^T = Q, from a pivoted LDL^T so singular Q (zero intensities) is fine.
  Mat6 noise_factor = Mat6::Zero();
};

MotionModel build_random_walk_model(double dt, const Vec3& intensity);

/// Draws one step of the motion model. Always consumes six standard normals.
TargetState step_target(const TargetState& state, const MotionModel& model, std::mt19937_64& rng);

/// True iff the open segment (a, b) does not pass through the interior of any box.
bool los_visible(const Vec3& a, const Vec3& b, std::span<const Obstacle> obstacles);

inline constexpr double kNoObstacle = std::numeric_limits<double>::infinity();

/// Distance from p to the nearest box (0 when inside); +inf without obstacles.
double clearance(const Vec3& p, std::span<const Obstacle> obstacles);

struct ClearanceDetail {
  double distance = kNoObstacle;
  Vec3 outward_normal = Vec3::Zero();  // unit, pointing away from the nearest box
};

/// Clearance plus the direction in which it grows fastest.
ClearanceDetail nearest_obstacle(const Vec3& p, std::span<const Obstacle> obstacles);

}  // namespace drn
