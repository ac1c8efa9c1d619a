#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "planegrasp/features.hpp"
#include "planegrasp/geometry.hpp"
#include "planegrasp/homography.hpp"
#include "planegrasp/image.hpp"

namespace planegrasp {

/// Pinhole camera. Camera frame: X right, Y down, Z forward.
struct CameraIntrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;

  /// Throws InvalidInput unless fx, fy > 0 and the principal point lies
  /// strictly inside the image.
  void validate() const;

  /// Projects a camera-frame point with Z > 0.
  Vec2 project(const Vec3& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
  /// Ray through pixel (u, v) with unit Z component.
  Vec3 ray(const Vec2& pixel) const {
    return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0};
  }
};

/// Metric depth in millimeters, 0 = invalid.
class DepthFrame {
 public:
  DepthFrame() = default;
  DepthFrame(CameraIntrinsics intrinsics, std::vector<std::uint16_t> depth_mm);
  /// All-invalid frame.
  explicit DepthFrame(CameraIntrinsics intrinsics);

  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  int width() const { return intrinsics_.width; }
  int height() const { return intrinsics_.height; }

  std::uint16_t at(int x, int y) const { return depth_[index(x, y)]; }
  std::uint16_t& at(int x, int y) { return depth_[index(x, y)]; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width() && y < height();
  }
  const std::vector<std::uint16_t>& samples() const { return depth_; }

  friend bool operator==(const DepthFrame& a, const DepthFrame& b) {
    return a.depth_ == b.depth_ && a.intrinsics_.width == b.intrinsics_.width &&
           a.intrinsics_.height == b.intrinsics_.height;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * intrinsics_.width + x;
  }

  CameraIntrinsics intrinsics_;
  std::vector<std::uint16_t> depth_;
};

/// Trained planar object.
struct ReferenceObject {
  std::string id;
  GrayImage texture;
  ColorImage color;
  FeatureSet features;
  int width_px = 0;
  int height_px = 0;
  std::optional<double> physical_width_m;
  std::optional<double> physical_height_m;
};

/// Builds a reference object from a color texture: converts to gray and
/// extracts features with `detector`.
ReferenceObject make_reference_object(std::string id, const ColorImage& color,
                                      const DetectorDescriptor& detector);

struct PlanarPose {
  Vec3 position = Vec3::Zero();  ///< object center, meters
  RotationMatrix frame;          ///< columns i, j, k
  EulerAngles euler;
  bool degenerate = false;  ///< Euler extraction hit gimbal lock
  int num_matches = 0;
  int num_inliers = 0;
  /// Measured plane basis vectors after shifting by `position`, before
  /// orthogonalization.
  Vec3 x_axis = Vec3::Zero();
  Vec3 y_axis = Vec3::Zero();
  Homography homography;
};

enum class AbsenceReason {
  kNone,
  kInsufficientMatches,
  kNoConsensus,
  kNoDepth,
  kDegeneratePlane,
  kPointAtInfinity,
};

std::string_view to_string(AbsenceReason reason);
std::optional<AbsenceReason> absence_reason_from_string(std::string_view s);

/// Pose or the reason it could not be produced.
struct PoseResult {
  std::optional<PlanarPose> pose;
  AbsenceReason reason = AbsenceReason::kNone;
  std::string detail;
  int num_matches = 0;
  int num_inliers = 0;

  bool present() const { return pose.has_value(); }
};

struct PoseConfig {
  RansacConfig ransac;
  int min_matches = kMinMatches;
};

struct AxisPoints {
  Vec2 center;
  Vec2 x;
  Vec2 y;
};

/// p_c = (w/2, h/2), p_x = (w, h/2), p_y = (w/2, 0).
AxisPoints reference_axis_points(int width_px, int height_px);

/// Radius (pixels) searched for valid depth when the pixel itself is a hole.
inline constexpr int kDepthRepairRadius = 3;

/// Depth in meters at the pixel nearest to `pixel`; holes are filled with
/// the median of valid depths within kDepthRepairRadius. Throws NoDepth.
double depth_at(const Vec2& pixel, const DepthFrame& depth);

/// Lifts a sub-pixel location to the camera frame using depth_at.
Vec3 backproject(const Vec2& pixel, const DepthFrame& depth);

/// Object frame from the measured center c and the 3D points at the ends of
/// the x and y reference axes. With x = x_raw - c and y = y_raw - c:
/// j = y/|y|, k = (x × y)/|x × y|, i = (y × z)/|y × z|. Throws
/// DegeneratePlane when either vector is shorter than 1e-6 m or the angle
/// between them is outside (10°, 170°).
RotationMatrix build_frame(const Vec3& c, const Vec3& x_raw, const Vec3& y_raw);

/// Pose of the reference plane from a homography into the depth frame
/// (everything after homography estimation). Throws PointAtInfinity,
/// NoDepth or DegeneratePlane.
PlanarPose pose_from_homography(const Homography& h, int width_px,
                                int height_px, const DepthFrame& depth);

/// Full detection for one object against precomputed frame features.
PoseResult estimate_pose(const ReferenceObject& obj,
                         const FeatureSet& frame_features,
                         const DepthFrame& depth,
                         const DetectorDescriptor& detector,
                         const PoseConfig& cfg);

/// Extracts frame features, then runs estimate_pose.
PoseResult estimate_pose(const ReferenceObject& obj, const GrayImage& gray,
                         const DepthFrame& depth,
                         const DetectorDescriptor& detector,
                         const PoseConfig& cfg);

/// Detects every object in one frame (features extracted once). Results
/// follow the order of `objects`.
std::vector<PoseResult> estimate_poses(
    std::span<const ReferenceObject* const> objects, const GrayImage& gray,
    const DepthFrame& depth, const DetectorDescriptor& detector,
    const PoseConfig& cfg);

/// Mean Euclidean distance between recomputed and measured vectors.
/// Throws InvalidInput on empty input.
double epsilon_metric(std::span<const std::pair<Vec3, Vec3>> pairs);

/// (recomputed x, measured x) for one pose: the unit i axis rescaled to the
/// measured |x|, paired with the measured x.
std::pair<Vec3, Vec3> recomputed_x_pair(const PlanarPose& pose);

/// Projected endpoints of the pose axes; an endpoint is absent when its
/// segment lies entirely behind the camera. Segments crossing Z = 0 are
/// clipped at a small positive depth.
struct AxisSegment {
  Vec2 from;
  Vec2 to;
};
struct ProjectedAxes {
  std::optional<AxisSegment> x;
  std::optional<AxisSegment> y;
  std::optional<AxisSegment> z;
};
ProjectedAxes project_axes(const PlanarPose& pose,
                           const CameraIntrinsics& intrinsics,
                           double axis_length_m);

/// Draws the x (red), y (green) and z (blue) axes of `pose` onto `image`.
ColorImage overlay_axes(const ColorImage& image, const PlanarPose& pose,
                        const CameraIntrinsics& intrinsics,
                        double axis_length_m);

}  // namespace planegrasp
