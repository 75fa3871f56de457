#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pcol/errors.h"
#include "pcol/geometry.h"
#include "test_util.h"

namespace pcol {
namespace {

ObjectState AxisAligned(double radius, const Vec3& pos, const Vec3& vel) {
  ObjectState s;
  s.position = pos;
  s.velocity = vel;
  s.covariance = Vec3(2500, 2500, 625).asDiagonal();
  s.radius = radius;
  return s;
}

void ExpectOrthonormalRightHanded(const EncounterFrame& f) {
  EXPECT_NEAR(f.x_axis.norm(), 1.0, 1e-12);
  EXPECT_NEAR(f.y_axis.norm(), 1.0, 1e-12);
  EXPECT_NEAR(f.z_axis.norm(), 1.0, 1e-12);
  EXPECT_NEAR(f.x_axis.dot(f.y_axis), 0.0, 1e-12);
  EXPECT_NEAR(f.x_axis.dot(f.z_axis), 0.0, 1e-12);
  EXPECT_NEAR(f.y_axis.dot(f.z_axis), 0.0, 1e-12);
  EXPECT_LT((f.x_axis.cross(f.y_axis) - f.z_axis).norm(), 1e-12);
}

TEST(CombineObjects, AddsRadiiAndCovariances) {
  const ObjectState s1 = AxisAligned(3, Vec3(0, 0, 200), Vec3(7500, 0, 0));
  const ObjectState s2 = AxisAligned(2, Vec3::Zero(), Vec3(-7500, 0, 0));
  const CombinedObject c = CombineObjects(s1, s2);
  EXPECT_DOUBLE_EQ(c.combined_radius, 5.0);
  EXPECT_LT((c.combined_covariance - Mat3(Vec3(5000, 5000, 1250).asDiagonal()))
                .norm(),
            1e-12);
  EXPECT_EQ(c.rel_position, Vec3(0, 0, 200));
  EXPECT_EQ(c.rel_velocity, Vec3(15000, 0, 0));
}

TEST(CombineObjects, ZeroCovariancesStayZero) {
  ObjectState s1 = AxisAligned(1, Vec3::Zero(), Vec3(1, 0, 0));
  ObjectState s2 = AxisAligned(1, Vec3::Zero(), Vec3(0, 1, 0));
  s1.covariance.setZero();
  s2.covariance.setZero();
  EXPECT_TRUE(CombineObjects(s1, s2).combined_covariance.isZero());
}

TEST(CombineObjects, RejectsZeroRelativeVelocity) {
  const ObjectState s = AxisAligned(1, Vec3::Zero(), Vec3(7000, 1, 2));
  EXPECT_PCOL_ERROR(CombineObjects(s, s), ErrorCode::kZeroRelativeVelocity);
}

TEST(ValidateObjectState, RejectsBadInputs) {
  ObjectState s = AxisAligned(1, Vec3::Zero(), Vec3(1, 0, 0));
  s.radius = 0.0;
  EXPECT_PCOL_ERROR(ValidateObjectState(s), ErrorCode::kInvalidInput);
  s.radius = 1.0;
  s.covariance(0, 1) = 10.0;
  EXPECT_PCOL_ERROR(ValidateObjectState(s), ErrorCode::kInvalidInput);
  s.covariance(0, 1) = 0.0;
  s.covariance(2, 2) = -100.0;
  EXPECT_PCOL_ERROR(ValidateObjectState(s), ErrorCode::kInvalidInput);
}

TEST(BuildEncounterFrame, AxisAlignedCases) {
  const EncounterFrame a = BuildEncounterFrame(Vec3(15000, 0, 0), Vec3(0, 0, 200));
  EXPECT_LT((a.y_axis - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((a.x_axis - Vec3(0, 0, 1)).norm(), 1e-15);
  ExpectOrthonormalRightHanded(a);

  const EncounterFrame b = BuildEncounterFrame(Vec3(0, 7500, 0), Vec3(100, 0, 0));
  EXPECT_LT((b.y_axis - Vec3(0, 1, 0)).norm(), 1e-15);
  EXPECT_LT((b.x_axis - Vec3(1, 0, 0)).norm(), 1e-15);
  ExpectOrthonormalRightHanded(b);
}

TEST(BuildEncounterFrame, ParallelPositionUsesFallback) {
  const Vec3 v = Vec3(1, 1, 0) / std::sqrt(2.0) * 9000.0;
  const EncounterFrame f = BuildEncounterFrame(v, v * 0.01);
  ExpectOrthonormalRightHanded(f);
  // The least-aligned basis axis is e_z.
  EXPECT_LT((f.x_axis - Vec3(0, 0, 1)).norm(), 1e-12);
  const EncounterFrame zero = BuildEncounterFrame(v, Vec3::Zero());
  ExpectOrthonormalRightHanded(zero);
}

TEST(BuildEncounterFrame, RejectsZeroVelocity) {
  EXPECT_PCOL_ERROR(BuildEncounterFrame(Vec3::Zero(), Vec3(1, 0, 0)),
                    ErrorCode::kZeroRelativeVelocity);
}

TEST(DiagonalizePlaneCovariance, DiagonalInput) {
  Mat2 w;
  w << 5000, 0, 0, 1250;
  const PrincipalSigmas p = DiagonalizePlaneCovariance(w);
  EXPECT_NEAR(p.sigma_x, 70.71067811865476, 1e-12);
  EXPECT_NEAR(p.sigma_z, 35.35533905932738, 1e-12);
  EXPECT_EQ(p.rotation_angle, 0.0);
}

TEST(DiagonalizePlaneCovariance, IsotropicAngleIsZero) {
  const PrincipalSigmas p = DiagonalizePlaneCovariance(Mat2::Identity());
  EXPECT_DOUBLE_EQ(p.sigma_x, 1.0);
  EXPECT_DOUBLE_EQ(p.sigma_z, 1.0);
  EXPECT_EQ(p.rotation_angle, 0.0);
}

TEST(DiagonalizePlaneCovariance, OffDiagonalMatchesEigenSolver) {
  Mat2 w;
  w << 3, 1, 1, 3;
  const PrincipalSigmas p = DiagonalizePlaneCovariance(w);
  EXPECT_NEAR(p.sigma_x, 2.0, 1e-14);
  EXPECT_NEAR(p.sigma_z, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(p.rotation_angle, std::numbers::pi / 4, 1e-14);

  Eigen::SelfAdjointEigenSolver<Mat2> eig(w);
  EXPECT_NEAR(p.sigma_x * p.sigma_x, eig.eigenvalues()(1), 1e-12);
  EXPECT_NEAR(p.sigma_z * p.sigma_z, eig.eigenvalues()(0), 1e-12);
}

TEST(DiagonalizePlaneCovariance, RejectsSingular) {
  Mat2 w;
  w << 1, 1, 1, 1;
  EXPECT_PCOL_ERROR(DiagonalizePlaneCovariance(w),
                    ErrorCode::kDegenerateCovariance);
}

TEST(ReduceConjunction, AxisAlignedScenario) {
  const ObjectState s1 = AxisAligned(3, Vec3(0, 0, 200), Vec3(7500, 0, 0));
  const ObjectState s2 = AxisAligned(2, Vec3::Zero(), Vec3(-7500, 0, 0));
  const EncounterGeometry g = ReduceConjunction(s1, s2);
  EXPECT_DOUBLE_EQ(g.combined_radius, 5.0);
  EXPECT_NEAR(g.sigma_x, 70.71067811865476, 1e-10);
  EXPECT_NEAR(g.sigma_z, 35.35533905932738, 1e-10);
  EXPECT_NEAR(g.relative_speed, 15000.0, 1e-9);
  EXPECT_NEAR(g.miss_vector.norm(), 200.0, 1e-9);
  EXPECT_TRUE(g.warnings.empty());
}

TEST(ReduceConjunction, WarnsWhenNotAtTca) {
  const ObjectState s1 = AxisAligned(3, Vec3(50, 0, 200), Vec3(7500, 0, 0));
  const ObjectState s2 = AxisAligned(2, Vec3::Zero(), Vec3(-7500, 0, 0));
  EXPECT_FALSE(ReduceConjunction(s1, s2).warnings.empty());
}

// Property suites over random valid states.

TEST(ReduceConjunctionProperty, PermutationSymmetry) {
  testutil::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ObjectState s1 = testutil::RandomState(rng);
    const ObjectState s2 = testutil::RandomState(rng);
    const EncounterGeometry a = ReduceConjunction(s1, s2);
    const EncounterGeometry b = ReduceConjunction(s2, s1);
    EXPECT_NEAR(a.combined_radius, b.combined_radius, 1e-12 * a.combined_radius);
    EXPECT_NEAR(a.sigma_x, b.sigma_x, 1e-12 * a.sigma_x);
    EXPECT_NEAR(a.sigma_z, b.sigma_z, 1e-12 * a.sigma_z);
    EXPECT_NEAR(a.miss_vector.norm(), b.miss_vector.norm(),
                1e-9 * (1.0 + a.miss_vector.norm()));
  }
}

TEST(ReduceConjunctionProperty, RotationEquivariance) {
  testutil::Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    ObjectState s1 = testutil::RandomState(rng);
    ObjectState s2 = testutil::RandomState(rng);
    const EncounterGeometry a = ReduceConjunction(s1, s2);
    const Mat3 r = testutil::RandomRotation(rng);
    for (ObjectState* s : {&s1, &s2}) {
      s->position = r * s->position;
      s->velocity = r * s->velocity;
      s->covariance = r * s->covariance * r.transpose();
      s->covariance = 0.5 * (s->covariance + s->covariance.transpose());
    }
    const EncounterGeometry b = ReduceConjunction(s1, s2);
    EXPECT_NEAR(a.sigma_x, b.sigma_x, 1e-9 * a.sigma_x);
    EXPECT_NEAR(a.sigma_z, b.sigma_z, 1e-9 * a.sigma_z);
    EXPECT_NEAR(a.miss_vector.norm(), b.miss_vector.norm(),
                1e-9 * (1.0 + a.miss_vector.norm()));
  }
}

TEST(ReduceConjunctionProperty, PreSummedCovarianceOracle) {
  testutil::Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const ObjectState s1 = testutil::RandomState(rng);
    const ObjectState s2 = testutil::RandomState(rng);
    ObjectState t1 = s1, t2 = s2;
    t1.covariance = s1.covariance + s2.covariance;
    t2.covariance.setZero();
    const EncounterGeometry a = ReduceConjunction(s1, s2);
    const EncounterGeometry b = ReduceConjunction(t1, t2);
    EXPECT_NEAR(a.sigma_x, b.sigma_x, 1e-12 * a.sigma_x);
    EXPECT_NEAR(a.sigma_z, b.sigma_z, 1e-12 * a.sigma_z);
  }
}

TEST(ReduceConjunctionProperty, TraceAndDeterminant) {
  testutil::Rng rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const ObjectState s1 = testutil::RandomState(rng);
    const ObjectState s2 = testutil::RandomState(rng);
    const CombinedObject c = CombineObjects(s1, s2);
    const EncounterFrame f = BuildEncounterFrame(c.rel_velocity, c.rel_position);
    ExpectOrthonormalRightHanded(f);
    Eigen::Matrix<double, 3, 2> b;
    b << f.x_axis, f.z_axis;
    const Mat2 w = b.transpose() * c.combined_covariance * b;
    const PrincipalSigmas p = ProjectAndDiagonalize(c.combined_covariance, f);
    const double sx2 = p.sigma_x * p.sigma_x, sz2 = p.sigma_z * p.sigma_z;
    EXPECT_GE(p.sigma_x, p.sigma_z);
    EXPECT_NEAR(sx2 + sz2, w.trace(), 1e-9 * w.trace());
    EXPECT_NEAR(sx2 * sz2, w.determinant(), 1e-9 * sx2 * sz2);
  }
}

}  // namespace
}  // namespace pcol
