#include "planegrasp/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "planegrasp/error.hpp"

namespace planegrasp {
namespace {

constexpr double kGimbalTolerance = 1e-9;

double orthonormality_defect(const Eigen::Matrix3d& m) {
  return (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
}

}  // namespace

RotationMatrix::RotationMatrix(const Eigen::Matrix3d& m) : m_(m) {
  if (!m.allFinite()) {
    throw InvalidInput("rotation matrix has non-finite entries");
  }
  if (orthonormality_defect(m) > kTolerance ||
      std::abs(m.determinant() - 1.0) > kTolerance) {
    throw InvalidInput("matrix is not a proper rotation");
  }
}

RotationMatrix RotationMatrix::repaired(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw InvalidInput("rotation matrix has non-finite entries");
  }
  const double defect = orthonormality_defect(m);
  if (defect <= kTolerance && std::abs(m.determinant() - 1.0) <= kTolerance) {
    return RotationMatrix(m, Unchecked{});
  }
  if (defect > kRepairLimit || m.determinant() <= 0.0) {
    throw InvalidInput("matrix is too far from a rotation to repair");
  }
  // Nearest rotation in the Frobenius sense: U Vᵀ from the SVD.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  return RotationMatrix(r, Unchecked{});
}

RotationMatrix RotationMatrix::transpose() const {
  return RotationMatrix(m_.transpose(), Unchecked{});
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const {
  return RotationMatrix(m_ * other.m_, Unchecked{});
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) {
    throw InvalidInput("transform has non-finite entries");
  }
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidInput("transform bottom row must be [0 0 0 1]");
  }
  return {RotationMatrix::repaired(m.topLeftCorner<3, 3>()),
          m.topRightCorner<3, 1>()};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RotationMatrix rot_x(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return RotationMatrix(m);
}

RotationMatrix rot_y(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return RotationMatrix(m);
}

RotationMatrix rot_z(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return RotationMatrix(m);
}

RotationMatrix rot_from_euler(const EulerAngles& e) {
  return rot_z(e.psi) * rot_y(e.theta) * rot_x(e.phi);
}

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

EulerDecomposition euler_from_rot(const RotationMatrix& r) {
  // Columns of R are (i, j, k); row index is the world axis X, Y, Z.
  const double i_x = r(0, 0);
  const double i_y = r(1, 0);
  const double i_z = r(2, 0);
  const double j_z = r(2, 1);
  const double k_z = r(2, 2);

  EulerDecomposition out;
  if (std::abs(i_z) >= 1.0 - kGimbalTolerance) {
    out.degenerate = true;
    out.angles.phi = 0.0;
    out.angles.theta = std::copysign(std::numbers::pi / 2.0, -i_z);
    out.angles.psi = wrap_angle(std::atan2(-r(0, 1), r(1, 1)));
    return out;
  }
  out.angles.phi = wrap_angle(std::atan2(j_z, k_z));
  out.angles.theta = std::asin(-i_z);
  out.angles.psi = wrap_angle(std::atan2(i_y, i_x));
  return out;
}

RollPitchYaw rpy_from_transform(const RigidTransform& t) {
  const EulerDecomposition e = euler_from_rot(t.rotation());
  return {e.angles.phi, e.angles.theta, e.angles.psi, e.degenerate};
}

RigidTransform invert(const RigidTransform& t) {
  const RotationMatrix rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(),
          a.rotation() * b.translation() + a.translation()};
}

double rotation_angle_between(const RotationMatrix& a,
                              const RotationMatrix& b) {
  const Eigen::Matrix3d d = a.matrix().transpose() * b.matrix();
  const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

std::array<double, 16> to_row_major(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  std::array<double, 16> out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out[r * 4 + c] = m(r, c);
  }
  return out;
}

RigidTransform transform_from_row_major(const std::array<double, 16>& v) {
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[r * 4 + c];
  }
  return RigidTransform::from_matrix(m);
}

std::string to_text(const RigidTransform& t) {
  const auto v = to_row_major(t);
  std::ostringstream os;
  os << std::setprecision(17);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (c) os << ' ';
      os << v[r * 4 + c] + 0.0;  // prints -0 as 0
    }
    os << '\n';
  }
  return os.str();
}

RigidTransform transform_from_text(const std::string& text) {
  std::istringstream is(text);
  std::array<double, 16> v{};
  for (double& x : v) {
    if (!(is >> x)) {
      throw InvalidInput("expected 16 numbers for a 4x4 transform");
    }
  }
  std::string rest;
  if (is >> rest) {
    throw InvalidInput("trailing data after 4x4 transform: " + rest);
  }
  return transform_from_row_major(v);
}

}  // namespace planegrasp
