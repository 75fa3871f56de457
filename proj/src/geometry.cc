#include "pcol/geometry.h"

#include <cmath>
#include <sstream>

#include "pcol/errors.h"

namespace pcol {

void ValidateObjectState(const ObjectState& state) {
  if (!(state.radius > 0.0) || !std::isfinite(state.radius)) {
    throw Error(ErrorCode::kInvalidInput, "radius must be positive");
  }
  if (!state.position.allFinite() || !state.velocity.allFinite() ||
      !state.covariance.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "state contains non-finite values");
  }
  const Mat3& c = state.covariance;
  const double scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kInvalidInput, "covariance is not symmetric");
  }
  const double trace = c.trace();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (c + c.transpose()),
                                          Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * std::abs(trace)) {
    throw Error(ErrorCode::kInvalidInput,
                "covariance is not positive semi-definite");
  }
}

CombinedObject CombineObjects(const ObjectState& s1, const ObjectState& s2) {
  ValidateObjectState(s1);
  ValidateObjectState(s2);
  CombinedObject out;
  out.combined_radius = s1.radius + s2.radius;
  out.combined_covariance = s1.covariance + s2.covariance;
  out.rel_position = s1.position - s2.position;
  out.rel_velocity = s1.velocity - s2.velocity;
  if (out.rel_velocity.norm() < kMinRelativeSpeed) {
    throw Error(ErrorCode::kZeroRelativeVelocity,
                "relative velocity below 1e-9 m/s; long-term encounter");
  }
  return out;
}

EncounterFrame BuildEncounterFrame(const Vec3& rel_velocity,
                                   const Vec3& rel_position) {
  const double speed = rel_velocity.norm();
  if (speed < kMinRelativeSpeed) {
    throw Error(ErrorCode::kZeroRelativeVelocity,
                "relative velocity below 1e-9 m/s; long-term encounter");
  }
  EncounterFrame f;
  f.y_axis = rel_velocity / speed;

  Vec3 in_plane = rel_position - rel_position.dot(f.y_axis) * f.y_axis;
  if (in_plane.norm() <= 1e-9 * rel_position.norm() || in_plane.norm() == 0.0) {
    // Fallback: canonical basis vector least aligned with y.
    Eigen::Index axis = 0;
    f.y_axis.cwiseAbs().minCoeff(&axis);
    Vec3 e = Vec3::Unit(axis);
    in_plane = e - e.dot(f.y_axis) * f.y_axis;
  }
  f.x_axis = in_plane.normalized();
  f.z_axis = f.x_axis.cross(f.y_axis).normalized();
  return f;
}

PrincipalSigmas DiagonalizePlaneCovariance(const Mat2& w) {
  const double a = w(0, 0);
  const double b = 0.5 * (w(0, 1) + w(1, 0));
  const double c = w(1, 1);
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  const double lambda_max = mean + radius;
  // Product form avoids cancellation for strongly elongated ellipses.
  const double det = a * c - b * b;
  const double lambda_min = lambda_max > 0.0 ? det / lambda_max : mean - radius;
  if (!(lambda_min > 0.0)) {
    std::ostringstream msg;
    msg << "projected covariance has non-positive eigenvalue " << lambda_min;
    throw Error(ErrorCode::kDegenerateCovariance, msg.str());
  }
  PrincipalSigmas out;
  out.sigma_x = std::sqrt(lambda_max);
  out.sigma_z = std::sqrt(lambda_min);
  out.rotation_angle = (b == 0.0 && a >= c) ? 0.0 : 0.5 * std::atan2(2.0 * b, a - c);
  return out;
}

PrincipalSigmas ProjectAndDiagonalize(const Mat3& combined_covariance,
                                      const EncounterFrame& frame) {
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = frame.x_axis;
  basis.col(1) = frame.z_axis;
  const Mat2 w = basis.transpose() * combined_covariance * basis;
  return DiagonalizePlaneCovariance(w);
}

EncounterGeometry ReduceConjunction(const ObjectState& s1,
                                    const ObjectState& s2) {
  const CombinedObject combined = CombineObjects(s1, s2);
  const EncounterFrame frame =
      BuildEncounterFrame(combined.rel_velocity, combined.rel_position);
  const PrincipalSigmas sigmas =
      ProjectAndDiagonalize(combined.combined_covariance, frame);

  EncounterGeometry g;
  g.combined_radius = combined.combined_radius;
  g.sigma_x = sigmas.sigma_x;
  g.sigma_z = sigmas.sigma_z;
  g.rotation_angle = sigmas.rotation_angle;
  g.miss_vector = Vec2(combined.rel_position.dot(frame.x_axis),
                       combined.rel_position.dot(frame.z_axis));
  g.relative_speed = combined.rel_velocity.norm();

  const double along = combined.rel_position.dot(combined.rel_velocity);
  if (std::abs(along) > 1e-6 * combined.rel_position.norm() *
                            combined.rel_velocity.norm()) {
    g.warnings.push_back(
        "relative position is not orthogonal to relative velocity; inputs may "
        "not be at the time of closest approach");
  }
  return g;
}

}  // namespace pcol
