#include "drn/tracker.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace drn {

Belief Belief::diagonal(const Vec6& mean, double position_std, double velocity_std) {
  Belief b;
  b.mean = mean;
  Vec6 var;
  var << Vec3::Constant(position_std * position_std), Vec3::Constant(velocity_std * velocity_std);
  b.covariance = var.asDiagonal();
  return b;
}

Belief predict(const Belief& belief, const MotionModel& model) {
  Belief out;
  out.mean = model.transition * belief.mean;
  out.covariance = model.transition * belief.covariance * model.transition.transpose() +
                   model.process_noise;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

Vec3 angular_velocity(const Vec3& target_position, const Vec3& target_velocity,
                      const Vec3& sensor_position, const Vec3& sensor_velocity) {
  const Vec3 rel = target_position - sensor_position;
  const double d2 = rel.squaredNorm();
  if (!(d2 > 0.0)) throw DegenerateGeometry("angular_velocity: coincident points");
  return rel.cross(target_velocity - sensor_velocity) / d2;
}

JacobianRows jacobian(const Vec6& state, const Vec3& sensor_position, const Vec3& sensor_velocity,
                      const Capabilities& caps, const RadarProfile& profile) {
  const Vec3 position = state.head<3>();
  const Vec3 velocity = state.tail<3>();
  const SphericalRelative rel = relative_spherical(sensor_position, position);
  const double d = rel.range;
  const double phi = rel.azimuth;
  const double theta = rel.elevation;
  const double gamma = profile.path_loss_exponent;
  const Vec3 a = direction_vector(phi, theta);

  JacobianRows out;
  if (caps.ranging) {
    ObservationRow row{Channel::kRange};
    row.gradient.head<3>() = 0.5 * gamma * a.transpose();
    row.predicted = 0.5 * gamma * d;
    out.rows.push_back(row);
  }
  if (caps.bearing) {
    const double s_theta = std::sin(theta);
    if (rel.on_polar_axis || std::abs(s_theta) < 1e-9) {
      out.azimuth_dropped = true;
    } else {
      ObservationRow row{Channel::kAzimuth};
      row.gradient.head<3>() = direction_vector(phi + kPi / 2.0, kPi / 2.0).transpose() / (d * s_theta);
      row.predicted = phi;
      out.rows.push_back(row);
    }
    ObservationRow row{Channel::kElevation};
    row.gradient.head<3>() = direction_vector(phi, theta + kPi / 2.0).transpose() / d;
    row.predicted = theta;
    out.rows.push_back(row);
  }
  if (caps.doppler) {
    const double scale = gamma / (2.0 * profile.wavelength);
    const Vec3 omega = angular_velocity(position, velocity, sensor_position, sensor_velocity);
    ObservationRow row{Channel::kDoppler};
    row.gradient.head<3>() = scale * omega.cross(a).transpose();
    row.gradient.tail<3>() = scale * a.transpose();
    row.predicted = scale * a.dot(velocity - sensor_velocity);
    out.rows.push_back(row);
  }
  return out;
}

namespace {

struct ChannelReading {
  double value;
  double variance;
};

std::optional<ChannelReading> reading(const MeasurementRecord& rec, Channel channel) {
  auto pick = [](const std::optional<double>& v, const std::optional<double>& var)
      -> std::optional<ChannelReading> {
    if (!v || !var) return std::nullopt;
    return ChannelReading{*v, *var};
  };
  switch (channel) {
    case Channel::kRange: return pick(rec.values.range, rec.variances.range);
    case Channel::kAzimuth: return pick(rec.values.azimuth, rec.variances.azimuth);
    case Channel::kElevation: return pick(rec.values.elevation, rec.variances.elevation);
    case Channel::kDoppler: return pick(rec.values.doppler, rec.variances.doppler);
  }
  return std::nullopt;
}

}  // namespace

StackedObservation stack_observations(const Vec6& predicted_mean, const InfoVector& info) {
  std::vector<ObservationRow> rows;
  std::vector<ChannelReading> readings;
  int dropped = 0;
  for (const ReceivedRecord& entry : info.entries) {
    const MeasurementRecord& rec = entry.record;
    if (!rec.los) continue;
    JacobianRows jac;
    try {
      jac = jacobian(predicted_mean, rec.sender_position, rec.sender_velocity, rec.caps, rec.profile);
    } catch (const DegenerateGeometry&) {
      ++dropped;
      continue;
    }
    if (jac.azimuth_dropped) ++dropped;
    for (const ObservationRow& row : jac.rows) {
      auto r = reading(rec, row.channel);
      if (!r) continue;
      rows.push_back(row);
      readings.push_back(*r);
    }
  }

  StackedObservation out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.innovation.resize(m);
  out.jacobian.resize(m, 6);
  out.noise.resize(m);
  out.dropped_rows = dropped;
  for (Eigen::Index r = 0; r < m; ++r) {
    double innovation = readings[r].value - rows[r].predicted;
    if (rows[r].channel == Channel::kAzimuth) innovation = wrap_angle(innovation);
    out.innovation(r) = innovation;
    out.jacobian.row(r) = rows[r].gradient;
    out.noise(r) = readings[r].variance;
  }
  return out;
}

Belief update(const Belief& predicted, const InfoVector& info, int iterations) {
  if (iterations < 1) throw std::invalid_argument("update: iterations must be >= 1");
  Vec6 point = predicted.mean;
  Belief out = predicted;
  for (int it = 0; it < iterations; ++it) {
    const StackedObservation obs = stack_observations(point, info);
    if (obs.rows() == 0) return predicted;

    const Eigen::MatrixXd& h = obs.jacobian;
    const Eigen::MatrixXd ph = predicted.covariance * h.transpose();
    Eigen::MatrixXd s = h * ph;
    s.diagonal() += obs.noise;

    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
      const auto& sv = svd.singularValues();
      std::ostringstream msg;
      msg << "EKF update: innovation covariance not positive definite (" << s.rows()
          << " rows, sigma_max=" << sv(0) << ", sigma_min=" << sv(sv.size() - 1) << ")";
      throw NumericalError(msg.str());
    }
    // K = P H^T S^-1
    const Eigen::MatrixXd gain = llt.solve(ph.transpose()).transpose();

    // Around a point other than the prior mean the residual carries the linearization offset.
    const Eigen::VectorXd residual = obs.innovation - h * (predicted.mean - point);
    out.mean = predicted.mean + gain * residual;
    const Mat6 i_kh = Mat6::Identity() - gain * h;
    out.covariance = i_kh * predicted.covariance * i_kh.transpose() +
                     gain * obs.noise.asDiagonal() * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();

    const double step = (out.mean - point).norm();
    point = out.mean;
    if (step <= 1e-9 * (1.0 + point.norm())) break;
  }
  return out;
}

}  // namespace drn
