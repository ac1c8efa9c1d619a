#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "planegrasp/geometry.hpp"

namespace planegrasp {

/// Planar projective map, stored at canonical scale: ||H||_F = 1, h33 >= 0.
class Homography {
 public:
  Homography() : h_(Eigen::Matrix3d::Identity() / std::sqrt(3.0)) {}
  /// Normalizes `h` to canonical scale. Throws DegenerateConfiguration when
  /// `h` is singular or not finite.
  explicit Homography(const Eigen::Matrix3d& h);

  static Homography identity() { return Homography(); }

  const Eigen::Matrix3d& matrix() const { return h_; }
  Homography inverse() const;

 private:
  Eigen::Matrix3d h_;
};

struct Correspondence {
  Vec2 source;  ///< reference-image pixel
  Vec2 target;  ///< camera-frame pixel
};

struct RansacConfig {
  double reprojection_threshold = 3.0;  ///< pixels
  double confidence = 0.995;
  int max_iterations = 2000;
  std::uint64_t seed = 0;
  /// Consensus sets smaller than this raise NoConsensus.
  int min_inliers = 10;

  /// Throws InvalidInput when out of range.
  void validate() const;
};

struct RansacResult {
  Homography homography;
  std::vector<bool> inlier_mask;
  int num_inliers = 0;
  int iterations = 0;
};

/// (a/c, b/c) with [a b c]ᵀ = H [x y 1]ᵀ. Throws PointAtInfinity when
/// |c| <= 1e-12.
Vec2 project(const Homography& h, const Vec2& p);

/// Euclidean distance between project(h, source) and target; +inf when the
/// source maps to infinity.
double reprojection_error(const Homography& h, const Correspondence& c);

/// Normalized DLT over all correspondences (least squares for n > 4).
/// Throws DegenerateConfiguration for fewer than 4 points, collinear
/// minimal sets, or a rank-deficient design matrix.
Homography estimate_dlt(std::span<const Correspondence> correspondences);

/// Seeded RANSAC over 4-point samples with adaptive iteration count and a
/// final least-squares refit on the consensus set. The returned mask is
/// consistent with the returned homography: masked-in points have error
/// below the threshold, masked-out ones at or above it.
/// Throws NoConsensus when fewer than cfg.min_inliers support the best model.
RansacResult estimate_ransac(std::span<const Correspondence> correspondences,
                             const RansacConfig& cfg);

/// Twice the signed area of the triangle (a, b, c).
double triangle_area2(const Vec2& a, const Vec2& b, const Vec2& c);

/// 9 numbers, row-major, canonical scale, 17 significant digits.
std::string to_text(const Homography& h);
Homography homography_from_text(const std::string& text);

}  // namespace planegrasp
