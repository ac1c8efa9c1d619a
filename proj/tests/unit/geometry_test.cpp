#include "planegrasp/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "planegrasp/error.hpp"
#include "test_util.hpp"

namespace planegrasp {
namespace {

using testing::kPi;

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 mul3(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

TEST(RotFromEuler, ZeroIsIdentity) {
  EXPECT_TRUE(rot_from_euler({0, 0, 0}).matrix().isIdentity(0.0));
}

TEST(RotFromEuler, PureYaw) {
  Eigen::Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((rot_from_euler({0, 0, kPi / 2}).matrix() - expected).norm(), 1e-15);
}

TEST(RotFromEuler, MatchesHandMultipliedFactors) {
  const double phi = 0.1, theta = 0.2, psi = 0.3;
  const Mat3 rx{{{1, 0, 0},
                 {0, std::cos(phi), -std::sin(phi)},
                 {0, std::sin(phi), std::cos(phi)}}};
  const Mat3 ry{{{std::cos(theta), 0, std::sin(theta)},
                 {0, 1, 0},
                 {-std::sin(theta), 0, std::cos(theta)}}};
  const Mat3 rz{{{std::cos(psi), -std::sin(psi), 0},
                 {std::sin(psi), std::cos(psi), 0},
                 {0, 0, 1}}};
  const Mat3 m = mul3(rz, mul3(ry, rx));
  const RotationMatrix r = rot_from_euler({phi, theta, psi});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(r(i, j), m[i][j], 1e-15);
  // cos(psi) cos(theta) and cos(theta) sin(phi).
  EXPECT_NEAR(r(0, 0), 0.9362933635841992, 1e-15);
  EXPECT_NEAR(r(2, 1), 0.09784339500725571, 1e-15);
}

TEST(RotFromEuler, AgreesWithAxisAngleComposition) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double phi = rng.uniform(-kPi, kPi);
    const double theta = rng.uniform(-kPi / 2, kPi / 2);
    const double psi = rng.uniform(-kPi, kPi);
    const Eigen::Matrix3d m = rot_from_euler({phi, theta, psi}).matrix();
    EXPECT_LT((m - testing::eigen_zyx(phi, theta, psi)).norm(), 1e-14);
    EXPECT_LT((m.transpose() * m - Eigen::Matrix3d::Identity()).norm(), 1e-14);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-14);
  }
}

TEST(EulerFromRot, Identity) {
  const auto e = euler_from_rot(RotationMatrix::identity());
  EXPECT_EQ(e.angles.phi, 0.0);
  EXPECT_EQ(e.angles.theta, 0.0);
  EXPECT_EQ(e.angles.psi, 0.0);
  EXPECT_FALSE(e.degenerate);
}

TEST(EulerFromRot, RecoversSmallAngles) {
  const auto e = euler_from_rot(rot_from_euler({0.1, 0.2, 0.3}));
  EXPECT_NEAR(e.angles.phi, 0.1, 1e-9);
  EXPECT_NEAR(e.angles.theta, 0.2, 1e-9);
  EXPECT_NEAR(e.angles.psi, 0.3, 1e-9);
  EXPECT_FALSE(e.degenerate);
}

TEST(EulerFromRot, FullQuadrants) {
  // Angles beyond pi/2 for phi and psi need atan2, not atan.
  const auto e = euler_from_rot(rot_from_euler({2.5, -0.4, -2.9}));
  EXPECT_NEAR(e.angles.phi, 2.5, 1e-12);
  EXPECT_NEAR(e.angles.theta, -0.4, 1e-12);
  EXPECT_NEAR(e.angles.psi, -2.9, 1e-12);
}

TEST(EulerFromRot, RoundTripRandomRotations) {
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const RotationMatrix r(testing::random_rotation_matrix(rng));
    const auto e = euler_from_rot(r);
    if (std::abs(e.angles.theta) >= kPi / 2 - 0.01) continue;
    EXPECT_GT(e.angles.phi, -kPi);
    EXPECT_LE(e.angles.phi, kPi);
    EXPECT_GT(e.angles.psi, -kPi);
    EXPECT_LE(e.angles.psi, kPi);
    worst = std::max(worst, (rot_from_euler(e.angles).matrix() - r.matrix()).norm());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(EulerFromRot, GimbalLockPositivePitch) {
  // R31 = -1, theta = +pi/2.
  const RotationMatrix r = rot_from_euler({0.7, kPi / 2, 0.2});
  ASSERT_NEAR(r(2, 0), -1.0, 1e-15);
  const auto e = euler_from_rot(r);
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.angles.phi, 0.0);
  EXPECT_DOUBLE_EQ(e.angles.theta, kPi / 2);
  // Only psi - phi is observable at this pole; the fallback still has to
  // reproduce the matrix.
  EXPECT_LT((rot_from_euler(e.angles).matrix() - r.matrix()).norm(), 1e-12);
  EXPECT_NEAR(e.angles.psi, 0.2 - 0.7, 1e-12);
}

TEST(EulerFromRot, GimbalLockNegativePitch) {
  const RotationMatrix r = rot_from_euler({0.3, -kPi / 2, 1.0});
  const auto e = euler_from_rot(r);
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.angles.phi, 0.0);
  EXPECT_DOUBLE_EQ(e.angles.theta, -kPi / 2);
  EXPECT_LT((rot_from_euler(e.angles).matrix() - r.matrix()).norm(), 1e-12);
}

TEST(RpyFromTransform, IdentityAndSingleAxis) {
  const auto id = rpy_from_transform(RigidTransform::identity());
  EXPECT_EQ(id.gamma, 0.0);
  EXPECT_EQ(id.beta, 0.0);
  EXPECT_EQ(id.alpha, 0.0);
  const auto rx = rpy_from_transform({rot_x(0.4), Vec3(1, 2, 3)});
  EXPECT_NEAR(rx.gamma, 0.4, 1e-15);
  EXPECT_NEAR(rx.beta, 0.0, 1e-15);
  EXPECT_NEAR(rx.alpha, 0.0, 1e-15);
}

TEST(RpyFromTransform, BitEqualToEulerFromRot) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform t = testing::random_transform(rng);
    const auto a = rpy_from_transform(t);
    const auto e = euler_from_rot(t.rotation());
    EXPECT_EQ(a.gamma, e.angles.phi);
    EXPECT_EQ(a.beta, e.angles.theta);
    EXPECT_EQ(a.alpha, e.angles.psi);
    EXPECT_EQ(a.degenerate, e.degenerate);
  }
}

TEST(RpyFromTransform, MatchesTwoArgumentPitchFormula) {
  Rng rng(19);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform t = testing::random_transform(rng);
    const Eigen::Matrix3d& r = t.rotation().matrix();
    const auto a = rpy_from_transform(t);
    EXPECT_NEAR(a.gamma, std::atan2(r(2, 1), r(2, 2)), 1e-12);
    EXPECT_NEAR(a.beta, std::atan2(-r(2, 0), std::hypot(r(2, 1), r(2, 2))), 1e-7);
    EXPECT_NEAR(a.alpha, std::atan2(r(1, 0), r(0, 0)), 1e-12);
  }
}

TEST(Invert, IdentityAndPureTranslation) {
  EXPECT_TRUE(invert(RigidTransform::identity()).matrix().isIdentity(0.0));
  const RigidTransform t = invert(RigidTransform::from_translation({1, 2, 3}));
  EXPECT_TRUE(t.rotation().matrix().isIdentity(0.0));
  EXPECT_EQ(t.translation(), Vec3(-1, -2, -3));
}

TEST(Invert, ComposeWithInverseIsIdentity) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform t = testing::random_transform(rng);
    const Eigen::Matrix4d m = testing::naive_mul4(t.matrix(), invert(t).matrix());
    EXPECT_LT((m - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((invert(invert(t)).matrix() - t.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Compose, IdentityAndTranslations) {
  Rng rng(4);
  const RigidTransform t = testing::random_transform(rng);
  EXPECT_EQ(compose(RigidTransform::identity(), t).matrix(), t.matrix());
  const RigidTransform s = compose(RigidTransform::from_translation({1, 2, 3}),
                                   RigidTransform::from_translation({-4, 0.5, 2}));
  EXPECT_EQ(s.translation(), Vec3(-3, 2.5, 5));
}

TEST(Compose, RotationAppliedToTranslation) {
  const RigidTransform a(rot_z(kPi / 2), Vec3::Zero());
  const RigidTransform b = RigidTransform::from_translation({1, 0, 0});
  const RigidTransform c = compose(a, b);
  EXPECT_LT((c.translation() - Vec3(0, 1, 0)).norm(), 1e-15);
  EXPECT_LT((c.matrix() - testing::naive_mul4(a.matrix(), b.matrix())).norm(), 1e-15);
}

TEST(Compose, MatchesMatrixProductAndIsAssociative) {
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const RigidTransform a = testing::random_transform(rng);
    const RigidTransform b = testing::random_transform(rng);
    const RigidTransform c = testing::random_transform(rng);
    EXPECT_LT((compose(a, b).matrix() - testing::naive_mul4(a.matrix(), b.matrix()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_LT((((a * b) * c).matrix() - (a * (b * c)).matrix()).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(RotationMatrix, RejectsNonRotations) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = -1;  // reflection
  EXPECT_THROW(RotationMatrix{m}, InvalidInput);
  EXPECT_THROW(RotationMatrix{2.0 * Eigen::Matrix3d::Identity()}, InvalidInput);
}

TEST(RotationMatrix, RepairsSmallDriftOnly) {
  Eigen::Matrix3d m = rot_from_euler({0.3, -0.2, 1.1}).matrix();
  Eigen::Matrix3d drift = m;
  drift(0, 1) += 1e-6;
  EXPECT_THROW(RotationMatrix{drift}, InvalidInput);
  const RotationMatrix r = RotationMatrix::repaired(drift);
  EXPECT_LT((r.matrix().transpose() * r.matrix() - Eigen::Matrix3d::Identity()).norm(),
            1e-14);
  EXPECT_LT((r.matrix() - m).norm(), 2e-6);

  Eigen::Matrix3d far = m;
  far(0, 1) += 1e-2;
  EXPECT_THROW(RotationMatrix::repaired(far), InvalidInput);
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(0.25 + 4 * kPi), 0.25, 1e-14);
}

TEST(RotationAngleBetween, KnownAngle) {
  EXPECT_NEAR(rotation_angle_between(rot_x(0.2), rot_x(-0.3)), 0.5, 1e-14);
  EXPECT_NEAR(rotation_angle_between(rot_z(kPi), RotationMatrix::identity()), kPi, 1e-7);
}

TEST(TransformText, RoundTripIsExact) {
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform t = testing::random_transform(rng);
    const RigidTransform u = transform_from_text(to_text(t));
    EXPECT_EQ(u.matrix(), t.matrix());
    EXPECT_EQ(transform_from_row_major(to_row_major(t)).matrix(), t.matrix());
  }
}

TEST(TransformText, RepairsRoundedInput) {
  const RigidTransform t(rot_from_euler({0.3, 0.1, -0.7}), Vec3(0.1, 0.2, 0.3));
  std::ostringstream os;
  os.precision(8);
  const Eigen::Matrix4d m = t.matrix();
  for (int i = 0; i < 16; ++i) os << m(i / 4, i % 4) << ' ';
  const RigidTransform u = transform_from_text(os.str());
  EXPECT_LT((u.matrix() - m).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_NEAR(u.rotation().matrix().determinant(), 1.0, 1e-14);
}

TEST(TransformText, RejectsMalformedInput) {
  EXPECT_THROW(transform_from_text("1 0 0"), InvalidInput);
  EXPECT_THROW(transform_from_text("1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 2"), InvalidInput);
  EXPECT_THROW(transform_from_text("1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 x"), InvalidInput);
}

}  // namespace
}  // namespace planegrasp
