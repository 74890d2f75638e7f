#include "drn/infomat.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace drn {

namespace {

constexpr double kPoleTolerance = 1e-9;

struct DopplerG {
  double xx, xy, xz, yy, zz, yz;
};

// Entries g_ab of the Doppler geometric matrix, without the (gamma / 2 lambda)^2 factor.
DopplerG doppler_g(double phi, double theta, const Vec3& w) {
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double ex = -sp * st * w.z() + ct * w.y();
  const double ey = cp * st * w.z() - ct * w.x();
  const double ez = -cp * st * w.y() + sp * st * w.x();
  DopplerG g;
  g.xx = ex * ex;
  g.yy = ey * ey;
  g.zz = ez * ez;
  g.xy = ex * ey;
  g.xz = (sp * st * w.z() - ct * w.y()) * (cp * st * w.y() - sp * st * w.x());
  g.yz = ey * ez;
  return g;
}

Vec3 relative_omega(const TargetState& target, const SenderGeometry& s) {
  const Vec3 rel = target.position - s.position;
  return rel.cross(target.velocity - s.velocity) / rel.squaredNorm();
}

}  // namespace

GeometricMatrices geometric_matrices(const SphericalRelative& rel, const Vec3& omega,
                                     const RadarProfile& profile) {
  if (!(rel.range > 0.0)) throw DegenerateGeometry("geometric_matrices: zero range");
  const double gamma = profile.path_loss_exponent;
  const double phi = rel.azimuth;
  const double theta = rel.elevation;
  const double d = rel.range;

  GeometricMatrices g;
  const Vec3 a = direction_vector(phi, theta);
  g.range = gamma * gamma / 4.0 * a * a.transpose();

  const double st = std::sin(theta);
  if (rel.on_polar_axis || std::abs(st) < kPoleTolerance) {
    g.azimuth_valid = false;
  } else {
    const Vec3 b = direction_vector(phi + kPi / 2.0, kPi / 2.0);
    g.azimuth = b * b.transpose() / (d * st * d * st);
  }
  const Vec3 c = direction_vector(phi, theta + kPi / 2.0);
  g.elevation = c * c.transpose() / (d * d);

  const DopplerG e = doppler_g(phi, theta, omega);
  Mat3 m;
  m << e.xx, e.xy, e.xz,
       e.xy, e.yy, e.yz,
       e.xz, e.yz, e.zz;
  const double scale = gamma / (2.0 * profile.wavelength);
  g.doppler = scale * scale * m;
  return g;
}

Mat3 measurement_fim(const TargetState& target, std::span<const SenderGeometry> senders, double rcs) {
  Mat3 j = Mat3::Zero();
  for (const SenderGeometry& s : senders) {
    if (!s.los || !s.caps.any()) continue;
    const SphericalRelative rel = relative_spherical(s.position, target.position);
    const Vec3 omega = s.caps.doppler ? relative_omega(target, s) : Vec3::Zero();
    const GeometricMatrices g = geometric_matrices(rel, omega, s.profile);
    if (s.caps.ranging) j += g.range / range_variance(rel.range, rcs, s.profile);
    if (s.caps.doppler) j += g.doppler / doppler_variance(rel.range, rcs, s.profile);
    if (s.caps.bearing) {
      const double var = bearing_variance(s.profile);
      if (g.azimuth_valid) j += g.azimuth / var;
      j += g.elevation / var;
    }
  }
  return j;
}

Mat3 prior_information(const Mat6& predicted_covariance) {
  Eigen::LLT<Mat6> llt(predicted_covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("prior_information: predicted covariance is not positive definite");
  }
  const Mat6 inverse = llt.solve(Mat6::Identity());
  Mat3 block = inverse.topLeftCorner<3, 3>();
  return 0.5 * (block + block.transpose());
}

Mat3 fuse_with_prior(const Mat6& predicted_covariance, const Mat3& measurement_information) {
  return prior_information(predicted_covariance) + measurement_information;
}

Mat3 information(const InformationProblem& problem) {
  return problem.prior + measurement_fim(problem.target, problem.senders, problem.rcs);
}

Mat3 ScalarFim::matrix() const {
  Mat3 m;
  m << xx, xy, xz,
       xy, yy, yz,
       xz, yz, zz;
  return m;
}

ScalarFim scalar_fim_entries(const InformationProblem& problem, DopplerCrossTerm cross_term) {
  ScalarFim j;
  j.xx = problem.prior(0, 0);
  j.xy = problem.prior(0, 1);
  j.xz = problem.prior(0, 2);
  j.yy = problem.prior(1, 1);
  j.zz = problem.prior(2, 2);
  j.yz = problem.prior(1, 2);

  for (const SenderGeometry& s : problem.senders) {
    if (!s.los) continue;
    const SphericalRelative rel = relative_spherical(s.position, problem.target.position);
    const double d = rel.range;
    const double sp = std::sin(rel.azimuth), cp = std::cos(rel.azimuth);
    const double st = std::sin(rel.elevation), ct = std::cos(rel.elevation);
    const double gamma = s.profile.path_loss_exponent;
    const double lambda = s.profile.wavelength;

    if (s.caps.ranging) {
      const double w = gamma * gamma / (4.0 * range_variance(d, problem.rcs, s.profile));
      j.xx += w * (cp * st) * (cp * st);
      j.xy += w * sp * cp * st * st;
      j.xz += w * cp * st * ct;
      j.yy += w * (sp * st) * (sp * st);
      j.zz += w * ct * ct;
      j.yz += w * st * ct * sp;
    }
    if (s.caps.bearing) {
      const double w = 1.0 / (bearing_variance(s.profile) * d * d);
      const bool azimuth_ok = !(rel.on_polar_axis || std::abs(st) < kPoleTolerance);
      // Azimuth terms carry 1/sin(theta) and vanish from the sum on the polar axis.
      const double az_xx = azimuth_ok ? (sp / st) * (sp / st) : 0.0;
      const double az_yy = azimuth_ok ? (cp / st) * (cp / st) : 0.0;
      const double az_xy = azimuth_ok ? sp * cp / (st * st) : 0.0;
      j.xx += w * (az_xx + (cp * ct) * (cp * ct));
      j.xy += -w * az_xy + w * sp * cp * ct * ct;
      j.xz += -w * cp * st * ct;
      j.yy += w * (az_yy + (sp * ct) * (sp * ct));
      j.zz += w * st * st;
      j.yz += -w * sp * st * ct;
    }
    if (s.caps.doppler) {
      const Vec3 omega = relative_omega(problem.target, s);
      const DopplerG g = doppler_g(rel.azimuth, rel.elevation, omega);
      const double var = doppler_variance(d, problem.rcs, s.profile);
      const double w = gamma * gamma / (4.0 * lambda * lambda * var);
      const double w_xz = cross_term == DopplerCrossTerm::kPrinted
                              ? gamma * gamma / (2.0 * lambda * lambda * var)
                              : w;
      j.xx += w * g.xx;
      j.xy += w * g.xy;
      j.xz += w_xz * g.xz;
      j.yy += w * g.yy;
      j.zz += w * g.zz;
      j.yz += w * g.yz;
    }
  }
  return j;
}

}  // namespace drn
