#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "drn/core.hpp"

using namespace drn;

TEST(RelativeSpherical, PlanarTriangle) {
  const SphericalRelative rel = relative_spherical(Vec3::Zero(), Vec3(3, 4, 0));
  EXPECT_DOUBLE_EQ(rel.range, 5.0);
  EXPECT_NEAR(rel.azimuth, std::atan2(4.0, 3.0), 1e-12);
  EXPECT_NEAR(rel.azimuth, 0.9273, 1e-4);
  EXPECT_NEAR(rel.elevation, kPi / 2.0, 1e-12);
  EXPECT_FALSE(rel.on_polar_axis);
}

TEST(RelativeSpherical, PolarAxisFlagged) {
  const SphericalRelative rel = relative_spherical(Vec3::Zero(), Vec3(0, 0, 5));
  EXPECT_DOUBLE_EQ(rel.range, 5.0);
  EXPECT_DOUBLE_EQ(rel.elevation, 0.0);
  EXPECT_DOUBLE_EQ(rel.azimuth, 0.0);
  EXPECT_TRUE(rel.on_polar_axis);
}

TEST(RelativeSpherical, OffsetOrigin) {
  const SphericalRelative rel = relative_spherical(Vec3(1, 1, 0), Vec3(2, 2, std::sqrt(2.0)));
  EXPECT_NEAR(rel.range, 2.0, 1e-12);
  EXPECT_NEAR(rel.azimuth, kPi / 4.0, 1e-12);
  EXPECT_NEAR(rel.elevation, kPi / 4.0, 1e-12);
}

TEST(RelativeSpherical, CoincidentPointsThrow) {
  EXPECT_THROW(relative_spherical(Vec3(1, 2, 3), Vec3(1, 2, 3)), DegenerateGeometry);
}

TEST(RelativeSpherical, RoundTripThroughDirectionVector) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 a(u(rng), u(rng), u(rng));
    const Vec3 b(u(rng), u(rng), u(rng));
    const SphericalRelative rel = relative_spherical(a, b);
    EXPECT_LT((a + rel.range * direction_vector(rel.azimuth, rel.elevation) - b).norm(), 1e-9);
    EXPECT_GT(rel.azimuth, -kPi);
    EXPECT_LE(rel.azimuth, kPi);
    EXPECT_GE(rel.elevation, 0.0);
    EXPECT_LE(rel.elevation, kPi);
  }
}

TEST(DirectionVector, Examples) {
  EXPECT_LT((direction_vector(0.0, kPi / 2.0) - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((direction_vector(kPi / 2.0, kPi / 2.0) - Vec3(0, 1, 0)).norm(), 1e-15);
  EXPECT_LT((direction_vector(1.3, 0.0) - Vec3(0, 0, 1)).norm(), 1e-15);
  EXPECT_NEAR(direction_vector(0.7, 2.1).norm(), 1.0, 1e-15);
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-12);
  EXPECT_NEAR(wrap_angle(0.25), 0.25, 1e-15);
}

TEST(PolarControl, ForwardExamples) {
  EXPECT_LT((control_from_polar({10.0, 0.0, kPi / 2.0}, 1.0) - Vec3(10, 0, 0)).norm(), 1e-12);
  EXPECT_LT((control_from_polar({5.0, kPi / 2.0, kPi / 2.0}, 2.0) - Vec3(0, 10, 0)).norm(), 1e-12);
  EXPECT_LT((control_from_polar({3.0, 0.4, 0.0}, 1.0) - Vec3(0, 0, 3)).norm(), 1e-12);
  EXPECT_LT(control_from_polar({0.0, 1.0, 1.0}, 1.0).norm(), 1e-15);
}

TEST(PolarControl, InverseExample) {
  const Polar p = polar_from_control(Vec3(3, 4, 0), 1.0);
  EXPECT_NEAR(p.speed, 5.0, 1e-12);
  EXPECT_NEAR(p.heading, std::atan2(4.0, 3.0), 1e-12);
  EXPECT_NEAR(p.tilt, kPi / 2.0, 1e-12);
}

TEST(PolarControl, ZeroDisplacementKeepsAttitude) {
  const Polar previous{7.0, 1.1, 0.9};
  const Polar p = polar_from_control(Vec3::Zero(), 1.0, previous);
  EXPECT_EQ(p.speed, 0.0);
  EXPECT_EQ(p.heading, previous.heading);
  EXPECT_EQ(p.tilt, previous.tilt);
}

TEST(PolarControl, RoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> speed(0.1, 20.0), heading(-kPi + 1e-6, kPi), tilt(0.01, kPi - 0.01);
  for (int n = 0; n < 1000; ++n) {
    const Polar p{speed(rng), heading(rng), tilt(rng)};
    const Polar q = polar_from_control(control_from_polar(p, 0.5), 0.5);
    EXPECT_NEAR(q.speed, p.speed, 1e-9);
    EXPECT_NEAR(wrap_angle(q.heading - p.heading), 0.0, 1e-9);
    EXPECT_NEAR(q.tilt, p.tilt, 1e-9);
  }
}

TEST(ClampKinematics, SpeedCapped) {
  const KinematicLimits limits;
  const Polar out = clamp_kinematics({25.0, 0.0, kPi / 2.0}, {10.0, 0.0, kPi / 2.0}, limits);
  EXPECT_DOUBLE_EQ(out.speed, 20.0);
}

TEST(ClampKinematics, HeadingRateLimited) {
  KinematicLimits limits;
  limits.heading_rate_max = 0.5;
  const Polar out = clamp_kinematics({10.0, 1.0, kPi / 2.0}, {10.0, 0.0, kPi / 2.0}, limits);
  EXPECT_NEAR(out.heading, 0.5, 1e-15);
}

TEST(ClampKinematics, TurnAcrossBranchCutIsShortWay) {
  const KinematicLimits limits;
  const Polar out = clamp_kinematics({10.0, -kPi + 0.1, kPi / 2.0}, {10.0, kPi - 0.1, kPi / 2.0}, limits);
  EXPECT_NEAR(wrap_angle(out.heading - (-kPi + 0.1)), 0.0, 1e-12);
}

TEST(ClampKinematics, Idempotent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> speed(-5.0, 40.0), angle(-kPi, kPi), tilt(0.0, kPi);
  const KinematicLimits limits;
  for (int n = 0; n < 1000; ++n) {
    const Polar previous{10.0, angle(rng), tilt(rng)};
    const Polar once = clamp_kinematics({speed(rng), angle(rng), tilt(rng)}, previous, limits);
    const Polar twice = clamp_kinematics(once, previous, limits);
    EXPECT_NEAR(once.speed, twice.speed, 1e-12);
    EXPECT_NEAR(wrap_angle(once.heading - twice.heading), 0.0, 1e-12);
    EXPECT_NEAR(once.tilt, twice.tilt, 1e-12);
    EXPECT_GE(once.speed, limits.v_min);
    EXPECT_LE(once.speed, limits.v_max);
    EXPECT_LE(std::abs(wrap_angle(once.heading - previous.heading)), limits.heading_rate_max + 1e-12);
    EXPECT_LE(std::abs(once.tilt - previous.tilt), limits.tilt_rate_max + 1e-12);
  }
}

TEST(KinematicLimits, Validation) {
  KinematicLimits limits;
  EXPECT_NO_THROW(limits.validate());
  limits.v_min = 30.0;
  EXPECT_THROW(limits.validate(), std::invalid_argument);
  limits = {};
  limits.dt = 0.0;
  EXPECT_THROW(limits.validate(), std::invalid_argument);
}
