#pragma once

#include <span>
#include <vector>

#include "drn/core.hpp"
#include "drn/radar.hpp"

namespace drn {

/// Per-channel geometric matrices of one sensor: outer products of the position gradients of
/// range ((gamma/2) d), azimuth, elevation and Doppler.
struct GeometricMatrices {
  Mat3 range = Mat3::Zero();
  Mat3 azimuth = Mat3::Zero();
  Mat3 elevation = Mat3::Zero();
  Mat3 doppler = Mat3::Zero();
  bool azimuth_valid = true;  // false on the polar axis
};

/// `omega` is the relative angular velocity of the target around the sensor.
GeometricMatrices geometric_matrices(const SphericalRelative& rel, const Vec3& omega,
                                     const RadarProfile& profile);

/// A contributor to the information matrix, as known to the agent doing the evaluation.
struct SenderGeometry {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Capabilities caps;
  RadarProfile profile;
  bool los = true;
};

/// Sum over LOS senders of the channel geometric matrices weighted by 1/sigma^2, with the
/// variances taken at the distance to `target`. Empty or all-NLOS input gives zero.
Mat3 measurement_fim(const TargetState& target, std::span<const SenderGeometry> senders, double rcs);

/// Position block of the predicted information, [P^-1]_11. Throws NumericalError if P is singular.
Mat3 prior_information(const Mat6& predicted_covariance);

/// [P^-1]_11 + J_meas.
Mat3 fuse_with_prior(const Mat6& predicted_covariance, const Mat3& measurement_information);

/// Everything the D-optimality cost of one agent depends on.
struct InformationProblem {
  TargetState target;  // predicted target state
  double rcs = 1.0;
  Mat3 prior = Mat3::Zero();
  std::vector<SenderGeometry> senders;
};

Mat3 information(const InformationProblem& problem);

/// The six distinct entries of the information matrix in closed scalar form.
struct ScalarFim {
  double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, zz = 0.0, yz = 0.0;

  Mat3 matrix() const;
};

enum class DopplerCrossTerm {
  kPrinted,     // xz Doppler weight gamma^2 / (2 lambda^2 sigma_d^2), as published
  kConsistent,  // gamma^2 / (4 lambda^2 sigma_d^2), same as every other Doppler entry
};

/// Closed-form entries (prior plus per-sender sums). The matrix route is authoritative; this is a
/// cross-check whose published xz Doppler weight is selectable.
ScalarFim scalar_fim_entries(const InformationProblem& problem,
                             DopplerCrossTerm cross_term = DopplerCrossTerm::kPrinted);

}  // namespace drn
