#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "drn/radar.hpp"

using namespace drn;

namespace {

RadarProfile profile_with(double sigma_r0) {
  RadarProfile p;
  p.sigma_r0_sq = sigma_r0 * sigma_r0;
  return p;
}

}  // namespace

TEST(Snr, Examples) {
  RadarProfile p;
  p.physical = PhysicalRadar{};
  p.physical->snr0_db = 30.0;
  const double snr0 = 1e3;
  EXPECT_NEAR(snr(1.0, 1.0, p), snr0, 1e-9);
  EXPECT_NEAR(snr(10.0, 0.1, p), snr0 * 1e-5, 1e-12);
  EXPECT_NEAR(snr(2.0, 1.0, p), snr0 / 16.0, 1e-9);
}

TEST(Variance, Examples) {
  const RadarProfile p = profile_with(1e-3);
  EXPECT_NEAR(range_variance(1.0, 1.0, p), 1e-6, 1e-20);
  EXPECT_NEAR(range_variance(10.0, 0.1, p), 0.1, 1e-14);
  EXPECT_NEAR(range_variance(20.0, 0.3, p) / range_variance(10.0, 0.3, p), 16.0, 1e-12);
  EXPECT_NEAR(doppler_variance(1.0, 1.0, p), p.sigma_d0_sq, 1e-15);
}

TEST(Variance, ScalingLaw) {
  const RadarProfile p = profile_with(3e-3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.5, 2000.0), rho(1e-3, 10.0);
  for (int n = 0; n < 1000; ++n) {
    const double dist = d(rng), r = rho(rng);
    EXPECT_NEAR(range_variance(dist, r, p) * r / std::pow(dist, 4.0) / p.sigma_r0_sq, 1.0, 1e-12);
  }
}

TEST(Variance, BearingIsConstant) {
  RadarProfile p;
  p.sigma_b0 = 0.1;
  EXPECT_DOUBLE_EQ(bearing_variance(p), 0.01);
}

TEST(Variance, DistanceScalingOverride) {
  RadarProfile p = profile_with(1e-3);
  p.distance_scaling = false;
  EXPECT_NEAR(range_variance(500.0, 0.01, p), range_variance(1.0, 0.01, p), 1e-20);
}

TEST(PhysicalRadar, RangeBound) {
  PhysicalRadar phys;
  phys.bandwidth_hz = 4e9;
  phys.snr0_db = 0.0;
  const ReferenceVariances v = reference_variances_from_physical(phys, 4.0);
  const double expected = 1.5 * std::pow(kSpeedOfLight / 2.0, 2) / std::pow(2.0 * kPi * 4e9, 2);
  EXPECT_NEAR(v.range_sq / expected, 1.0, 1e-12);
  EXPECT_NEAR(v.range_sq, 5.336e-5, 0.001e-5);
}

TEST(PhysicalRadar, ScalingLaws) {
  PhysicalRadar phys;
  phys.snr0_db = 20.0;
  const ReferenceVariances base = reference_variances_from_physical(phys);
  PhysicalRadar more_chirps = phys;
  more_chirps.n_chirp *= 4;
  EXPECT_NEAR(reference_variances_from_physical(more_chirps).doppler_sq, base.doppler_sq / 16.0,
              1e-12 * base.doppler_sq);
  PhysicalRadar wider = phys;
  wider.bandwidth_hz *= 2.0;
  EXPECT_NEAR(reference_variances_from_physical(wider).range_sq, base.range_sq / 4.0, 1e-12 * base.range_sq);
}

TEST(PhysicalRadar, InverseSnr) {
  const double snr0 = snr0_for_range_variance(1e-6, 4e9);
  PhysicalRadar phys;
  phys.bandwidth_hz = 4e9;
  phys.snr0_db = 10.0 * std::log10(snr0);
  EXPECT_NEAR(reference_variances_from_physical(phys).range_sq, 1e-6, 1e-15);
}

TEST(TrueObservables, RangeScaled) {
  const RadarProfile p;
  const ChannelValues h = true_observables({Vec3(3, 4, 0), Vec3::Zero()}, Vec3::Zero(), Vec3::Zero(), p,
                                           Capabilities::full());
  EXPECT_NEAR(*h.range, 10.0, 1e-12);
  EXPECT_NEAR(*h.azimuth, std::atan2(4.0, 3.0), 1e-12);
  EXPECT_NEAR(*h.elevation, kPi / 2.0, 1e-12);
}

TEST(TrueObservables, RecedingDoppler) {
  RadarProfile p;
  p.wavelength = kSpeedOfLight / 77e9;
  const ChannelValues h = true_observables({Vec3(100, 0, 0), Vec3(1, 0, 0)}, Vec3::Zero(), Vec3::Zero(), p,
                                           {false, false, true});
  EXPECT_NEAR(*h.doppler, 2.0 / p.wavelength, 1e-9);
  EXPECT_NEAR(*h.doppler, 513.7, 0.05);
  EXPECT_GT(*h.doppler, 0.0);
  EXPECT_FALSE(h.range.has_value());
  EXPECT_FALSE(h.azimuth.has_value());
}

TEST(TrueObservables, ApproachingIsNegative) {
  const RadarProfile p;
  const ChannelValues h = true_observables({Vec3(100, 0, 0), Vec3(-1, 0, 0)}, Vec3::Zero(), Vec3::Zero(), p,
                                           {false, false, true});
  EXPECT_LT(*h.doppler, 0.0);
}

TEST(TrueObservables, PerpendicularMotionHasNoDoppler) {
  const RadarProfile p;
  const ChannelValues h = true_observables({Vec3(100, 0, 0), Vec3(0, 3, 0)}, Vec3::Zero(), Vec3(0, -2, 1), p,
                                           {false, false, true});
  EXPECT_NEAR(*h.doppler, 0.0, 1e-12);
  EXPECT_NEAR(radial_velocity({Vec3(100, 0, 0), Vec3(0, 3, 0)}, Vec3::Zero(), Vec3(0, -2, 1)), 0.0, 1e-15);
}

TEST(Sense, NoiseFreeEqualsTruth) {
  SensorState sensor;
  sensor.position = Vec3(10, -20, 100);
  sensor.velocity = Vec3(1, 2, 0);
  sensor.caps = Capabilities::full();
  sensor.profile.sigma_r0_sq = 0.0;
  sensor.profile.sigma_d0_sq = 0.0;
  sensor.profile.sigma_b0 = 0.0;
  const TargetState target{Vec3(0, 0, 90), Vec3(-0.3, 0.4, 0)};
  std::mt19937_64 rng(1);
  const MeasurementRecord r = sense(target, sensor, 0.1, {}, {}, 5, rng);
  const ChannelValues h = true_observables(target, sensor.position, sensor.velocity, sensor.profile, sensor.caps);
  EXPECT_TRUE(r.los);
  EXPECT_EQ(r.emitted_at, 5);
  EXPECT_EQ(*r.values.range, *h.range);
  EXPECT_EQ(*r.values.azimuth, *h.azimuth);
  EXPECT_EQ(*r.values.elevation, *h.elevation);
  EXPECT_EQ(*r.values.doppler, *h.doppler);
}

TEST(Sense, BlockedPathFlagged) {
  SensorState sensor;
  sensor.caps = {true, false, false};
  const std::vector<Obstacle> box{{Vec3(4, -1, -1), Vec3(6, 1, 1)}};
  std::mt19937_64 rng(1);
  const MeasurementRecord r = sense({Vec3(10, 0, 0), Vec3::Zero()}, sensor, 1.0, box, {}, 1, rng);
  EXPECT_FALSE(r.los);
}

TEST(Sense, RangeNoiseStd) {
  SensorState sensor;
  sensor.caps = {true, false, false};
  sensor.profile = profile_with(1e-3);
  const TargetState target{Vec3(10, 0, 0), Vec3::Zero()};
  std::mt19937_64 rng(123);
  const double truth = 2.0 * 10.0;
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int n = 0; n < draws; ++n) {
    const double e = *sense(target, sensor, 0.1, {}, {}, 1, rng).values.range - truth;
    sum += e;
    sum_sq += e * e;
  }
  const double mean = sum / draws;
  const double std_dev = std::sqrt(sum_sq / draws - mean * mean);
  EXPECT_NEAR(std_dev / std::sqrt(0.1), 1.0, 0.02);
}

TEST(Sense, Reproducible) {
  SensorState sensor;
  sensor.caps = Capabilities::full();
  sensor.position = Vec3(50, 50, 100);
  const TargetState target{Vec3(0, 0, 90), Vec3(-0.3, 0.4, 0)};
  std::mt19937_64 a(77), b(77);
  for (int n = 0; n < 50; ++n) {
    const MeasurementRecord x = sense(target, sensor, 0.1, {}, {}, n, a);
    const MeasurementRecord y = sense(target, sensor, 0.1, {}, {}, n, b);
    EXPECT_EQ(*x.values.range, *y.values.range);
    EXPECT_EQ(*x.values.doppler, *y.values.doppler);
    EXPECT_EQ(*x.values.azimuth, *y.values.azimuth);
  }
}

TEST(RadarProfile, Validation) {
  RadarProfile p;
  EXPECT_NO_THROW(p.validate());
  p.wavelength = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
