#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "drn/core.hpp"
#include "drn/infomat.hpp"
#include "drn/world.hpp"

namespace drn {

/// D-optimality cost -ln det J; +inf when det J <= 0. Throws on non-finite entries.
double cost(const Mat3& information_matrix);

/// Gradient of -ln det J with respect to senders[own_index].position, with the other senders,
/// the prior and the predicted target held fixed. Entry derivatives are taken through the
/// (range, azimuth, elevation) chain rule and combined with the cofactor expansion of det J.
/// Throws NumericalError if det J <= 0.
Vec3 cost_gradient(const InformationProblem& problem, int own_index);

enum class ConstraintKind { kInterUav, kTarget, kObstacle, kGround };

struct ActiveConstraint {
  ConstraintKind kind = ConstraintKind::kInterUav;
  double residual = 0.0;         // distance - threshold, m
  Vec3 normal = Vec3::UnitZ();   // gradient of the residual w.r.t. own position
};

struct ConstraintThresholds {
  double inter_uav = 5.0;
  double target = 5.0;
  double obstacle = 5.0;
};

struct ConstraintSet {
  std::vector<ActiveConstraint> items;

  bool empty() const { return items.empty(); }
  Eigen::Matrix<double, 3, Eigen::Dynamic> normals() const;
  Eigen::VectorXd residuals() const;
};

/// Constraints whose residual is below `band` (violated or near the boundary). With
/// `ground_plane` the half-space z >= thresholds.obstacle is included as well.
ConstraintSet active_constraints(const Vec3& position, std::span<const Vec3> neighbors,
                                 const Vec3& target_estimate, std::span<const Obstacle> obstacles,
                                 const ConstraintThresholds& thresholds, double band,
                                 bool ground_plane = false);

/// Keeps a maximal linearly independent subset of the columns (pivoted QR).
Eigen::Matrix<double, 3, Eigen::Dynamic> independent_columns(
    const Eigen::Matrix<double, 3, Eigen::Dynamic>& normals, std::vector<int>* kept = nullptr);

/// I - N (N^T N)^-1 N^T for independent columns N; identity when N is empty.
Mat3 projection_matrix(const Eigen::Matrix<double, 3, Eigen::Dynamic>& normals);

struct ProjectedStep {
  Mat3 projector = Mat3::Identity();
  Vec3 descent = Vec3::Zero();      // projector * raw descent
  Vec3 restoration = Vec3::Zero();  // -N (N^T N)^-1 min(g, 0)
  int kept = 0;
  int dependent_dropped = 0;
  int released = 0;  // boundary constraints released because the step leaves them
};

/// Gradient projection of `raw_descent` onto the active set. Constraints that are satisfied but
/// inside the band are released when their multiplier is negative.
ProjectedStep project_step(const Vec3& raw_descent, const ConstraintSet& constraints);

struct NavConfig {
  double step = 8.0;  // m per unit (normalized) gradient
  double band = 1.0;  // m above each threshold
  KinematicLimits limits;
  ConstraintThresholds thresholds;
  double pursuit_speed = 5.0;  // m/s when the own link carries no information
  bool ground_plane = true;
  int max_backtracks = 8;

  void validate() const;
};

struct ControlContext {
  Vec3 position = Vec3::Zero();
  std::optional<Polar> previous;  // none on the first step: no turn-rate limit
  InformationProblem problem;
  int own_index = -1;  // own entry in problem.senders, -1 if absent
  std::vector<Vec3> neighbor_positions;
  std::optional<Vec3> gradient_override;
};

struct ControlDecision {
  Vec3 control = Vec3::Zero();
  Polar motion;
  double cost = 0.0;
  Vec3 gradient = Vec3::Zero();
  int active_constraints = 0;
  int backtracks = 0;
  bool pursuit = false;
};

/// One projected-gradient step followed by kinematic clamping and obstacle backtracking.
ControlDecision control_step(const ControlContext& context, std::span<const Obstacle> obstacles,
                             const NavConfig& config);

}  // namespace drn
