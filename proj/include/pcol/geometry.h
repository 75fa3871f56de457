#ifndef PCOL_GEOMETRY_H_
#define PCOL_GEOMETRY_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcol {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

// One satellite at the time of closest approach. Units: m, m/s, m^2.
struct ObjectState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  double radius = 0.0;
};

// Throws Error(kInvalidInput) unless the covariance is symmetric (1e-9
// relative), positive semi-definite (eigenvalues >= -1e-12 * trace) and the
// radius is positive.
void ValidateObjectState(const ObjectState& state);

struct CombinedObject {
  double combined_radius = 0.0;
  Mat3 combined_covariance = Mat3::Zero();
  Vec3 rel_position = Vec3::Zero();
  Vec3 rel_velocity = Vec3::Zero();
};

// Right-handed orthonormal frame; y_axis is the relative velocity direction
// and (x_axis, z_axis) span the encounter plane.
struct EncounterFrame {
  Vec3 x_axis;
  Vec3 y_axis;
  Vec3 z_axis;
};

struct PrincipalSigmas {
  double sigma_x = 0.0;  // sqrt of the larger eigenvalue
  double sigma_z = 0.0;
  double rotation_angle = 0.0;  // angle of the sigma_x axis from x_axis
};

struct EncounterGeometry {
  double combined_radius = 0.0;
  double sigma_x = 0.0;
  double sigma_z = 0.0;
  double rotation_angle = 0.0;
  Vec2 miss_vector = Vec2::Zero();  // reported only; the integrand is centered
  double relative_speed = 0.0;
  std::vector<std::string> warnings;
};

// Below this relative speed no encounter plane is defined.
inline constexpr double kMinRelativeSpeed = 1e-9;

CombinedObject CombineObjects(const ObjectState& s1, const ObjectState& s2);

EncounterFrame BuildEncounterFrame(const Vec3& rel_velocity,
                                   const Vec3& rel_position);

// Projects the covariance onto the encounter plane, W = B^T C B with
// B = [x_axis z_axis], and diagonalizes W in closed form.
PrincipalSigmas ProjectAndDiagonalize(const Mat3& combined_covariance,
                                      const EncounterFrame& frame);

// Closed-form eigen-decomposition of a symmetric 2x2 matrix. Throws
// DegenerateCovariance if the smaller eigenvalue is not positive.
PrincipalSigmas DiagonalizePlaneCovariance(const Mat2& w);

EncounterGeometry ReduceConjunction(const ObjectState& s1,
                                    const ObjectState& s2);

}  // namespace pcol

#endif  // PCOL_GEOMETRY_H_
