#pragma once

#include <vector>

#include <Eigen/Core>

#include "drn/comms.hpp"
#include "drn/core.hpp"
#include "drn/radar.hpp"
#include "drn/world.hpp"

namespace drn {

/// Gaussian belief N(mean, covariance) over the stacked target state.
struct Belief {
  Vec6 mean = Vec6::Zero();
  Mat6 covariance = Mat6::Identity();

  /// Zero mean with independent position/velocity spreads.
  static Belief diagonal(const Vec6& mean, double position_std, double velocity_std);
};

Belief predict(const Belief& belief, const MotionModel& model);

/// (p0 - p_i) x (v0 - v_i) / d^2. Throws DegenerateGeometry for coincident positions.
Vec3 angular_velocity(const Vec3& target_position, const Vec3& target_velocity,
                      const Vec3& sensor_position, const Vec3& sensor_velocity);

enum class Channel { kRange, kAzimuth, kElevation, kDoppler };

struct ObservationRow {
  Channel channel = Channel::kRange;
  Eigen::Matrix<double, 1, 6> gradient = Eigen::Matrix<double, 1, 6>::Zero();
  double predicted = 0.0;
};

struct JacobianRows {
  std::vector<ObservationRow> rows;
  // The azimuth row was removed because the state sits on the sensor's z axis.
  bool azimuth_dropped = false;
};

/// Observation rows of one sensor, linearized at `state`, in range/azimuth/elevation/Doppler order.
JacobianRows jacobian(const Vec6& state, const Vec3& sensor_position, const Vec3& sensor_velocity,
                      const Capabilities& caps, const RadarProfile& profile);

/// LOS rows of an InfoVector stacked into one linearized observation.
struct StackedObservation {
  Eigen::VectorXd innovation;  // z - h(m), angles wrapped
  Eigen::MatrixXd jacobian;    // rows x 6
  Eigen::VectorXd noise;       // diagonal of R
  int dropped_rows = 0;

  Eigen::Index rows() const { return innovation.size(); }
};

StackedObservation stack_observations(const Vec6& predicted_mean, const InfoVector& info);

/// EKF correction with a Joseph-form covariance update. With no LOS rows the prior is returned.
/// `iterations` > 1 relinearizes the observation around the updated mean (iterated EKF); 1 is the
/// plain EKF. Throws NumericalError if the innovation covariance is not positive definite.
Belief update(const Belief& predicted, const InfoVector& info, int iterations = 1);

}  // namespace drn
