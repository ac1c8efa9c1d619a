#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>

namespace planegrasp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Proper rotation (orthonormal, det = +1). Columns are the images of the
/// X, Y and Z axes.
class RotationMatrix {
 public:
  static constexpr double kTolerance = 1e-9;
  /// Upper bound on ||RᵀR - I||_F accepted by `repaired`.
  static constexpr double kRepairLimit = 1e-4;

  RotationMatrix() : m_(Eigen::Matrix3d::Identity()) {}

  /// Throws InvalidInput unless `m` is a rotation within kTolerance.
  explicit RotationMatrix(const Eigen::Matrix3d& m);

  /// Accepts matrices that drifted slightly from SO(3) (e.g. after a text
  /// round trip) and projects them onto the nearest rotation. Anything
  /// further than kRepairLimit from orthonormal is rejected.
  static RotationMatrix repaired(const Eigen::Matrix3d& m);

  static RotationMatrix identity() { return RotationMatrix(); }

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }
  Vec3 column(int c) const { return m_.col(c); }

  RotationMatrix transpose() const;
  RotationMatrix operator*(const RotationMatrix& other) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct Unchecked {};
  RotationMatrix(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}

  Eigen::Matrix3d m_;
};

/// Intrinsic X-Y-Z angles in radians: R = Rz(psi) * Ry(theta) * Rx(phi).
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

/// Result of decomposing a rotation. `degenerate` is set at gimbal lock
/// (|theta| = pi/2), where phi is fixed to zero.
struct EulerDecomposition {
  EulerAngles angles;
  bool degenerate = false;
};

/// Gripper roll/pitch/yaw (gamma, beta, alpha) about X, Y, Z.
struct RollPitchYaw {
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  bool degenerate = false;
};

/// Rigid motion x -> R x + t. Describes frame d relative to frame s, with t
/// the origin of d expressed in s.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const RotationMatrix& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) {
    return {RotationMatrix::identity(), t};
  }
  /// Parses a 4x4 homogeneous matrix. The bottom row must be [0 0 0 1]
  /// within 1e-9; the rotation block goes through RotationMatrix::repaired.
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  const RotationMatrix& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Eigen::Matrix4d matrix() const;
  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

 private:
  RotationMatrix rotation_;
  Vec3 translation_ = Vec3::Zero();
};

RotationMatrix rot_x(double angle);
RotationMatrix rot_y(double angle);
RotationMatrix rot_z(double angle);

/// Rz(psi) * Ry(theta) * Rx(phi).
RotationMatrix rot_from_euler(const EulerAngles& angles);

/// Inverse of rot_from_euler with phi, psi in (-pi, pi] and
/// theta in [-pi/2, pi/2]. At gimbal lock (|r31| >= 1 - 1e-9) returns
/// phi = 0, psi = atan2(-r12, r22) and flags the result degenerate.
EulerDecomposition euler_from_rot(const RotationMatrix& r);

/// Roll/pitch/yaw of the rotation block; same extraction as euler_from_rot.
RollPitchYaw rpy_from_transform(const RigidTransform& t);

/// (Rᵀ, -Rᵀt).
RigidTransform invert(const RigidTransform& t);

/// a * b: applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

inline RigidTransform operator*(const RigidTransform& a,
                                const RigidTransform& b) {
  return compose(a, b);
}

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Geodesic angle between two rotations, radians in [0, pi].
double rotation_angle_between(const RotationMatrix& a,
                              const RotationMatrix& b);

/// 16 numbers, row-major, 17 significant digits, 4 per line.
std::string to_text(const RigidTransform& t);
/// Reads 16 whitespace-separated numbers. Throws InvalidInput.
RigidTransform transform_from_text(const std::string& text);

std::array<double, 16> to_row_major(const RigidTransform& t);
RigidTransform transform_from_row_major(const std::array<double, 16>& v);

}  // namespace planegrasp
