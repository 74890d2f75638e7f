#include "drn/radar.hpp"

#include <cmath>

namespace drn {

void RadarProfile::validate() const {
  if (!(sigma_r0_sq > 0.0) || !(sigma_d0_sq > 0.0) || !(sigma_b0 > 0.0)) {
    throw std::invalid_argument("radar profile: reference variances must be positive");
  }
  if (!(wavelength > 0.0)) throw std::invalid_argument("radar profile: wavelength must be positive");
  if (!(path_loss_exponent > 0.0)) {
    throw std::invalid_argument("radar profile: path-loss exponent must be positive");
  }
  if (physical) {
    if (!(physical->bandwidth_hz > 0.0) || !(physical->chirp_duration_s > 0.0) ||
        physical->n_chirp <= 0) {
      throw std::invalid_argument("radar profile: chirp parameters must be positive");
    }
  }
}

namespace {

double path_loss_factor(double distance, double rcs, const RadarProfile& profile) {
  if (!(distance > 0.0) || !(rcs > 0.0)) {
    throw std::invalid_argument("distance and RCS must be positive");
  }
  if (!profile.distance_scaling) return 1.0;
  return std::pow(distance, profile.path_loss_exponent) / rcs;
}

}  // namespace

double snr(double distance, double rcs, const RadarProfile& profile) {
  if (!profile.physical) throw std::invalid_argument("snr: profile has no physical block");
  const double snr0 = std::pow(10.0, profile.physical->snr0_db / 10.0);
  return snr0 * rcs / std::pow(distance, profile.path_loss_exponent);
}

double range_variance(double distance, double rcs, const RadarProfile& profile) {
  return profile.sigma_r0_sq * path_loss_factor(distance, rcs, profile);
}

double doppler_variance(double distance, double rcs, const RadarProfile& profile) {
  return profile.sigma_d0_sq * path_loss_factor(distance, rcs, profile);
}

ReferenceVariances reference_variances_from_physical(const PhysicalRadar& physical,
                                                     double path_loss_exponent) {
  if (!(physical.bandwidth_hz > 0.0) || !(physical.chirp_duration_s > 0.0) ||
      physical.n_chirp <= 0) {
    throw std::invalid_argument("physical radar: bandwidth, sweep time and chirp count must be > 0");
  }
  const double snr0 = std::pow(10.0, physical.snr0_db / 10.0);
  const double two_pi = 2.0 * kPi;
  const double scale = 2.0 * kSpeedOfLight / path_loss_exponent;
  const double observation = physical.chirp_duration_s * physical.n_chirp;
  ReferenceVariances out;
  out.range_sq = 1.5 * scale * scale / (std::pow(two_pi * physical.bandwidth_hz, 2) * snr0);
  out.doppler_sq = 6.0 / (two_pi * two_pi * observation * observation * snr0);
  return out;
}

double snr0_for_range_variance(double sigma_r0_sq, double bandwidth_hz, double path_loss_exponent) {
  const double scale = 2.0 * kSpeedOfLight / path_loss_exponent;
  return 1.5 * scale * scale / (std::pow(2.0 * kPi * bandwidth_hz, 2) * sigma_r0_sq);
}

double radial_velocity(const TargetState& target, const Vec3& uav_position,
                       const Vec3& uav_velocity) {
  const Vec3 delta = target.position - uav_position;
  const double range = delta.norm();
  if (!(range > 0.0)) throw DegenerateGeometry("radial_velocity: coincident points");
  return delta.dot(target.velocity - uav_velocity) / range;
}

ChannelValues true_observables(const TargetState& target, const Vec3& uav_position,
                               const Vec3& uav_velocity, const RadarProfile& profile,
                               const Capabilities& caps) {
  const SphericalRelative rel = relative_spherical(uav_position, target.position);
  const double gamma = profile.path_loss_exponent;
  ChannelValues h;
  if (caps.ranging) h.range = 0.5 * gamma * rel.range;
  if (caps.bearing) {
    h.azimuth = rel.azimuth;
    h.elevation = rel.elevation;
  }
  if (caps.doppler) {
    h.doppler = gamma * radial_velocity(target, uav_position, uav_velocity) /
                (2.0 * profile.wavelength);
  }
  return h;
}

MeasurementRecord sense(const TargetState& target, const SensorState& sensor, double rcs,
                        std::span<const Obstacle> obstacles, const OutlierModel& outliers,
                        int time_index, std::mt19937_64& rng) {
  MeasurementRecord rec;
  rec.sender = sensor.id;
  rec.sender_position = sensor.position;
  rec.sender_velocity = sensor.velocity;
  rec.emitted_at = time_index;
  rec.caps = sensor.caps;
  rec.profile = sensor.profile;
  rec.rcs = rcs;
  rec.los = los_visible(sensor.position, target.position, obstacles);

  const SphericalRelative rel = relative_spherical(sensor.position, target.position);
  rec.on_polar_axis = rel.on_polar_axis;
  const ChannelValues h =
      true_observables(target, sensor.position, sensor.velocity, sensor.profile, sensor.caps);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Fixed draw order: range, azimuth, elevation, Doppler.
  double n[4];
  double u[4];
  for (int c = 0; c < 4; ++c) {
    n[c] = normal(rng);
    u[c] = unit(rng);
  }

  if (sensor.caps.ranging) {
    const double var = range_variance(rel.range, rcs, sensor.profile);
    rec.variances.range = var;
    rec.values.range = rec.los ? *h.range + std::sqrt(var) * n[0] : u[0] * outliers.max_range;
  }
  if (sensor.caps.bearing) {
    const double var = bearing_variance(sensor.profile);
    rec.variances.azimuth = var;
    rec.variances.elevation = var;
    rec.values.azimuth = rec.los ? wrap_angle(*h.azimuth + std::sqrt(var) * n[1])
                                 : wrap_angle(-kPi + 2.0 * kPi * u[1]);
    rec.values.elevation = rec.los ? *h.elevation + std::sqrt(var) * n[2] : kPi * u[2];
  }
  if (sensor.caps.doppler) {
    const double var = doppler_variance(rel.range, rcs, sensor.profile);
    rec.variances.doppler = var;
    rec.values.doppler = rec.los ? *h.doppler + std::sqrt(var) * n[3]
                                 : outliers.max_doppler * (2.0 * u[3] - 1.0);
  }
  return rec;
}

}  // namespace drn
