#pragma once

#include <optional>
#include <random>
#include <span>
#include <utility>

#include "drn/core.hpp"
#include "drn/world.hpp"

namespace drn {

/// Which observables a radar extracts from its echoes.
struct Capabilities {
  bool ranging = false;
  bool bearing = false;
  bool doppler = false;

  bool any() const { return ranging || bearing || doppler; }
  static Capabilities full() { return {true, true, true}; }
};

/// Chirp-train parameters of an FMCW front end.
struct PhysicalRadar {
  double bandwidth_hz = 4e9;
  double chirp_duration_s = 1e-4;
  int n_chirp = 256;
  double snr0_db = 0.0;  // SNR at 1 m against a 1 m^2 target
};

/// Noise model of one radar. Ranging and Doppler variances grow as d^gamma / rho from their
/// values at the reference point (1 m, 1 m^2); the bearing variance is the constant HPBW.
struct RadarProfile {
  double sigma_r0_sq = 1e-6;    // m^2
  double sigma_d0_sq = 1.0;     // Hz^2
  double sigma_b0 = 5.0 * kPi / 180.0;  // rad
  double wavelength = kSpeedOfLight / 77e9;  // m
  double path_loss_exponent = 4.0;
  // When false, ranging/Doppler variances stay at their reference values for any d and rho.
  bool distance_scaling = true;
  std::optional<PhysicalRadar> physical;

  void validate() const;
};

/// SNR0 rho / d^gamma. Requires the physical block.
double snr(double distance, double rcs, const RadarProfile& profile);
double range_variance(double distance, double rcs, const RadarProfile& profile);
double doppler_variance(double distance, double rcs, const RadarProfile& profile);
inline double bearing_variance(const RadarProfile& profile) {
  return profile.sigma_b0 * profile.sigma_b0;
}

struct ReferenceVariances {
  double range_sq = 0.0;    // m^2
  double doppler_sq = 0.0;  // Hz^2
};

/// Cramer-Rao bounds for beat-frequency ranging and Doppler at the reference SNR.
ReferenceVariances reference_variances_from_physical(const PhysicalRadar& physical,
                                                     double path_loss_exponent = 4.0);

/// Reference SNR (linear) at which the ranging bound equals sigma_r0_sq.
double snr0_for_range_variance(double sigma_r0_sq, double bandwidth_hz,
                               double path_loss_exponent = 4.0);

/// One value per channel; channels the radar does not produce are empty.
struct ChannelValues {
  std::optional<double> range;      // (gamma/2) d, m
  std::optional<double> azimuth;    // rad
  std::optional<double> elevation;  // rad
  std::optional<double> doppler;    // Hz, positive for a receding target
};

/// Noise-free observables of a target seen from a radar at p_uav moving with v_uav.
ChannelValues true_observables(const TargetState& target, const Vec3& uav_position,
                               const Vec3& uav_velocity, const RadarProfile& profile,
                               const Capabilities& caps);

/// Radial velocity a^T (v_target - v_uav), a the unit line of sight.
double radial_velocity(const TargetState& target, const Vec3& uav_position,
                       const Vec3& uav_velocity);

/// Support of the uniform outlier drawn on obstructed links.
struct OutlierModel {
  double max_range = 4000.0;    // m, range outliers ~ U[0, max_range]
  double max_doppler = 1e4;     // Hz, Doppler outliers ~ U[-max, max]
};

/// One radar's report, as exchanged over the network.
struct MeasurementRecord {
  int sender = 0;
  Vec3 sender_position = Vec3::Zero();
  Vec3 sender_velocity = Vec3::Zero();
  int emitted_at = 0;
  bool los = true;
  bool on_polar_axis = false;
  Capabilities caps;
  RadarProfile profile;
  double rcs = 1.0;
  ChannelValues values;
  ChannelValues variances;  // per-channel noise variance at the true geometry
};

struct SensorState {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Capabilities caps;
  RadarProfile profile;
};

/// Noisy measurement with LOS gating. Obstructed links carry uniform outliers and los=false.
/// Always draws one normal and one uniform per channel so the stream is geometry independent.
MeasurementRecord sense(const TargetState& target, const SensorState& sensor, double rcs,
                        std::span<const Obstacle> obstacles, const OutlierModel& outliers,
                        int time_index, std::mt19937_64& rng);

}  // namespace drn
