#include "drn/nav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace drn {

double cost(const Mat3& information_matrix) {
  if (!information_matrix.allFinite()) {
    throw std::invalid_argument("cost: information matrix has non-finite entries");
  }
  // Cholesky log-determinant: the 3x3 cofactor formula cancels badly when one link dominates.
  Eigen::LLT<Mat3> llt(information_matrix);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Vec3 diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
  return -2.0 * diag.array().log().sum();
}

namespace {

Mat3 sym_outer(const Vec3& x, const Vec3& y) { return x * y.transpose() + y * x.transpose(); }

// Partial derivatives of the own-sender contribution with respect to range, azimuth, elevation.
struct OwnPartials {
  Mat3 d_range = Mat3::Zero();
  Mat3 d_azimuth = Mat3::Zero();
  Mat3 d_elevation = Mat3::Zero();
  Vec3 grad_range = Vec3::Zero();      // of range w.r.t. the relative position
  Vec3 grad_azimuth = Vec3::Zero();
  Vec3 grad_elevation = Vec3::Zero();
};

OwnPartials own_partials(const InformationProblem& problem, const SenderGeometry& own) {
  OwnPartials out;
  if (!own.los || !own.caps.any()) return out;

  const SphericalRelative rel = relative_spherical(own.position, problem.target.position);
  const double d = rel.range;
  const double phi = rel.azimuth;
  const double theta = rel.elevation;
  const double st = std::sin(theta), ct = std::cos(theta);
  const double gamma = own.profile.path_loss_exponent;
  const bool azimuth_ok = !(rel.on_polar_axis || std::abs(st) < 1e-9);

  const Vec3 a = direction_vector(phi, theta);
  const Vec3 b = direction_vector(phi + kPi / 2.0, kPi / 2.0);  // (-s_phi, c_phi, 0)
  const Vec3 c = direction_vector(phi, theta + kPi / 2.0);      // (c_phi c_theta, s_phi c_theta, -s_theta)
  const Vec3 a_phi = st * b;
  const Vec3 a_theta = c;
  const Vec3 b_phi(-std::cos(phi), -std::sin(phi), 0.0);
  const Vec3 c_phi = ct * b;
  const Vec3 c_theta = -a;

  out.grad_range = a;
  out.grad_azimuth = azimuth_ok ? Vec3(b / (d * st)) : Vec3::Zero();
  out.grad_elevation = c / d;

  const double scaling = own.profile.distance_scaling ? 1.0 : 0.0;

  if (own.caps.ranging) {
    const double w = gamma * gamma / (4.0 * range_variance(d, problem.rcs, own.profile));
    const double w_d = -scaling * gamma * w / d;
    out.d_range += w_d * a * a.transpose();
    out.d_azimuth += w * sym_outer(a_phi, a);
    out.d_elevation += w * sym_outer(a_theta, a);
  }
  if (own.caps.bearing) {
    const double var = bearing_variance(own.profile);
    if (azimuth_ok) {
      const double w = 1.0 / (var * d * d * st * st);
      const Mat3 m = w * b * b.transpose();
      out.d_range += -2.0 / d * m;
      out.d_azimuth += w * sym_outer(b_phi, b);
      out.d_elevation += -2.0 * ct / st * m;
    }
    const double w = 1.0 / (var * d * d);
    const Mat3 m = w * c * c.transpose();
    out.d_range += -2.0 / d * m;
    out.d_azimuth += w * sym_outer(c_phi, c);
    out.d_elevation += w * sym_outer(c_theta, c);
  }
  if (own.caps.doppler) {
    const double scale = gamma / (2.0 * own.profile.wavelength);
    const double w = scale * scale / doppler_variance(d, problem.rcs, own.profile);
    const double w_d = -scaling * gamma * w / d;
    const Vec3 v = problem.target.velocity - own.velocity;
    const double av = a.dot(v);
    // omega x a = (v - a (a.v)) / d
    const Vec3 u = (v - a * av) / d;
    const Vec3 u_d = -u / d;
    const Vec3 u_phi = -(a_phi * av + a * a_phi.dot(v)) / d;
    const Vec3 u_theta = -(a_theta * av + a * a_theta.dot(v)) / d;
    out.d_range += w_d * u * u.transpose() + w * sym_outer(u_d, u);
    out.d_azimuth += w * sym_outer(u_phi, u);
    out.d_elevation += w * sym_outer(u_theta, u);
  }
  return out;
}

}  // namespace

Vec3 cost_gradient(const InformationProblem& problem, int own_index) {
  if (own_index < 0 || own_index >= static_cast<int>(problem.senders.size())) {
    throw std::out_of_range("cost_gradient: own index out of range");
  }
  const Mat3 j = information(problem);
  const OwnPartials p = own_partials(problem, problem.senders[own_index]);

  // The own contribution depends on p0 - p_i, hence the minus sign.
  auto entry_grad = [&p](int r, int c) -> Vec3 {
    return -(p.d_range(r, c) * p.grad_range + p.d_azimuth(r, c) * p.grad_azimuth +
             p.d_elevation(r, c) * p.grad_elevation);
  };

  // d(-ln det J) = -tr(adj(J) dJ) / det J = -tr(J^-1 dJ); the inverse comes from a Cholesky
  // factorization rather than explicit cofactors for numerical robustness.
  Eigen::LLT<Mat3> llt(j);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("cost_gradient: information matrix is not positive definite");
  }
  const Mat3 inv = llt.solve(Mat3::Identity());
  Vec3 g = Vec3::Zero();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) g += inv(r, c) * entry_grad(r, c);
  }
  return -g;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> ConstraintSet::normals() const {
  Eigen::Matrix<double, 3, Eigen::Dynamic> n(3, static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) n.col(static_cast<Eigen::Index>(i)) = items[i].normal;
  return n;
}

Eigen::VectorXd ConstraintSet::residuals() const {
  Eigen::VectorXd g(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) g(static_cast<Eigen::Index>(i)) = items[i].residual;
  return g;
}

namespace {

Vec3 unit_away(const Vec3& from, const Vec3& to) {
  const Vec3 diff = to - from;
  const double n = diff.norm();
  return n > 0.0 ? Vec3(diff / n) : Vec3::UnitZ();
}

}  // namespace

ConstraintSet active_constraints(const Vec3& position, std::span<const Vec3> neighbors,
                                 const Vec3& target_estimate, std::span<const Obstacle> obstacles,
                                 const ConstraintThresholds& thresholds, double band,
                                 bool ground_plane) {
  ConstraintSet set;
  for (const Vec3& other : neighbors) {
    const double g = (position - other).norm() - thresholds.inter_uav;
    if (g < band) set.items.push_back({ConstraintKind::kInterUav, g, unit_away(other, position)});
  }
  {
    const double g = (position - target_estimate).norm() - thresholds.target;
    if (g < band) set.items.push_back({ConstraintKind::kTarget, g, unit_away(target_estimate, position)});
  }
  for (const Obstacle& box : obstacles) {
    const ClearanceDetail near = nearest_obstacle(position, std::span<const Obstacle>(&box, 1));
    const double g = near.distance - thresholds.obstacle;
    if (g < band) set.items.push_back({ConstraintKind::kObstacle, g, near.outward_normal});
  }
  if (ground_plane) {
    const double g = position.z() - thresholds.obstacle;
    if (g < band) set.items.push_back({ConstraintKind::kGround, g, Vec3::UnitZ()});
  }
  return set;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> independent_columns(
    const Eigen::Matrix<double, 3, Eigen::Dynamic>& normals, std::vector<int>* kept) {
  if (kept) kept->clear();
  if (normals.cols() == 0) return normals;
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 3, Eigen::Dynamic>> qr(normals);
  qr.setThreshold(1e-9);
  const Eigen::Index rank = qr.rank();
  std::vector<int> cols;
  for (Eigen::Index i = 0; i < rank; ++i) cols.push_back(qr.colsPermutation().indices()(i));
  std::sort(cols.begin(), cols.end());
  Eigen::Matrix<double, 3, Eigen::Dynamic> out(3, rank);
  for (Eigen::Index i = 0; i < rank; ++i) out.col(i) = normals.col(cols[i]);
  if (kept) *kept = cols;
  return out;
}

Mat3 projection_matrix(const Eigen::Matrix<double, 3, Eigen::Dynamic>& normals) {
  if (normals.cols() == 0) return Mat3::Identity();
  // Orthonormal basis of the span; the normal equations lose accuracy on nearly parallel normals.
  const Eigen::Index rank = std::min<Eigen::Index>(normals.cols(), 3);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(normals).householderQ() *
                            Eigen::MatrixXd::Identity(3, rank);
  return Mat3::Identity() - q * q.transpose();
}

ProjectedStep project_step(const Vec3& raw_descent, const ConstraintSet& constraints) {
  ProjectedStep out;
  std::vector<int> kept_idx;
  Eigen::Matrix<double, 3, Eigen::Dynamic> n = independent_columns(constraints.normals(), &kept_idx);
  out.dependent_dropped = static_cast<int>(constraints.items.size()) - static_cast<int>(kept_idx.size());
  std::vector<ActiveConstraint> active;
  for (int idx : kept_idx) active.push_back(constraints.items[idx]);

  // Release satisfied constraints with negative multipliers, one at a time.
  while (!active.empty()) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> cols(3, static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = active[i].normal;
    const Eigen::VectorXd mult =
        (cols.transpose() * cols).ldlt().solve(cols.transpose() * (-raw_descent));
    int worst = -1;
    double worst_value = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (active[i].residual >= 0.0 && mult(static_cast<Eigen::Index>(i)) < worst_value) {
        worst_value = mult(static_cast<Eigen::Index>(i));
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) break;
    active.erase(active.begin() + worst);
    ++out.released;
  }

  Eigen::Matrix<double, 3, Eigen::Dynamic> cols(3, static_cast<Eigen::Index>(active.size()));
  Eigen::VectorXd violation(static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) {
    cols.col(static_cast<Eigen::Index>(i)) = active[i].normal;
    violation(static_cast<Eigen::Index>(i)) = std::min(active[i].residual, 0.0);
  }
  out.kept = static_cast<int>(active.size());
  out.projector = projection_matrix(cols);
  out.descent = out.projector * raw_descent;
  if (!active.empty()) {
    out.restoration = -cols * (cols.transpose() * cols).ldlt().solve(violation);
  }
  return out;
}

void NavConfig::validate() const {
  if (!(step >= 0.0)) throw std::invalid_argument("nav: step must be >= 0");
  if (!(band >= 0.0)) throw std::invalid_argument("nav: activation band must be >= 0");
  if (!(pursuit_speed >= 0.0)) throw std::invalid_argument("nav: pursuit speed must be >= 0");
  if (max_backtracks < 0) throw std::invalid_argument("nav: max_backtracks must be >= 0");
  limits.validate();
}

namespace {

bool path_blocked(const Vec3& from, const Vec3& to, std::span<const Obstacle> obstacles,
                  bool ground_plane) {
  if (ground_plane && to.z() < 0.0) return true;
  for (const Obstacle& box : obstacles) {
    if (box.contains(to)) return true;
  }
  return !los_visible(from, to, obstacles);
}

}  // namespace

ControlDecision control_step(const ControlContext& context, std::span<const Obstacle> obstacles,
                             const NavConfig& config) {
  ControlDecision out;
  const double dt = config.limits.dt;
  const InformationProblem& problem = context.problem;

  out.cost = cost(information(problem));

  const bool own_informative = context.own_index >= 0 &&
                               context.own_index < static_cast<int>(problem.senders.size()) &&
                               problem.senders[context.own_index].los &&
                               problem.senders[context.own_index].caps.any();

  Vec3 raw_descent = Vec3::Zero();
  if (context.gradient_override) {
    out.gradient = *context.gradient_override;
  } else if (own_informative) {
    try {
      out.gradient = cost_gradient(problem, context.own_index);
    } catch (const NumericalError&) {
      out.gradient.setZero();
    }
  }
  const double gradient_norm = out.gradient.norm();
  if (gradient_norm > 0.0 && std::isfinite(gradient_norm)) {
    raw_descent = -config.step * out.gradient / gradient_norm;
  } else if (!own_informative && !context.gradient_override) {
    const Vec3 towards = problem.target.position - context.position;
    if (towards.norm() > 0.0) {
      raw_descent = config.pursuit_speed * dt * towards.normalized();
      out.pursuit = true;
    }
  }

  const ConstraintSet constraints =
      active_constraints(context.position, context.neighbor_positions, problem.target.position,
                         obstacles, config.thresholds, config.band, config.ground_plane);
  out.active_constraints = static_cast<int>(constraints.items.size());

  const Polar previous = context.previous.value_or(Polar{});
  double scale = 1.0;
  for (int attempt = 0; attempt <= config.max_backtracks; ++attempt) {
    const ProjectedStep step = project_step(scale * raw_descent, constraints);
    const Vec3 raw = step.descent + step.restoration;
    Polar proposed = polar_from_control(raw, dt, previous);
    Polar clamped;
    if (context.previous) {
      clamped = clamp_kinematics(proposed, previous, config.limits);
    } else {
      clamped = proposed;
      clamped.speed = std::clamp(proposed.speed, config.limits.v_min, config.limits.v_max);
    }
    const Vec3 u = control_from_polar(clamped, dt);
    if (!path_blocked(context.position, context.position + u, obstacles, config.ground_plane)) {
      out.control = u;
      out.motion = clamped;
      out.backtracks = attempt;
      return out;
    }
    scale *= 0.5;
  }
  out.control = Vec3::Zero();
  out.motion = Polar{0.0, previous.heading, previous.tilt};
  out.backtracks = config.max_backtracks + 1;
  return out;
}

}  // namespace drn
