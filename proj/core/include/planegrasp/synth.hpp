#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planegrasp/geometry.hpp"
#include "planegrasp/homography.hpp"
#include "planegrasp/image.hpp"
#include "planegrasp/pose.hpp"

namespace planegrasp {

/// Object placement: maps object-frame points into the camera frame. The
/// object frame has its origin at the reference point (w/2, h/2), x along
/// increasing reference column, y along decreasing reference row, z out of
/// the textured face.
struct ScenePose {
  RigidTransform camera_from_object;

  /// Angle between the face normal and the direction back to the camera.
  double out_of_plane_deg() const;
};

/// Object facing the camera at `distance_m`, tilted about its own y axis by
/// `out_of_plane_deg`, rotated in-plane by `in_plane_deg`, and shifted
/// laterally by (offset_x_m, offset_y_m).
ScenePose make_scene_pose(double distance_m, double out_of_plane_deg = 0.0,
                          double in_plane_deg = 0.0, double offset_x_m = 0.0,
                          double offset_y_m = 0.0);

/// Meters per reference pixel along x and y. Defaults to a 0.2 m wide
/// object with square pixels when physical dimensions are absent.
Vec2 meters_per_pixel(const ReferenceObject& obj);

/// Plane-induced homography from reference pixels to frame pixels:
/// K [r1 r2 t] S, with S mapping reference pixels to object-plane meters.
/// Throws BackFacing when the face points away from the camera.
Homography induced_homography(const ScenePose& pose,
                              const CameraIntrinsics& intrinsics,
                              const ReferenceObject& obj);

/// Default virtual camera (640x480, f = 525, principal point at the center).
CameraIntrinsics default_intrinsics();

struct NoiseConfig {
  double pixel_noise_sigma = 0.0;  ///< intensity levels
  double depth_noise_mm = 0.0;
  double hole_rate = 0.0;          ///< fraction of valid depth pixels zeroed
  std::uint64_t seed = 0;
};

struct RenderOptions {
  /// Plain border around the texture, in reference pixels; part of the
  /// physical object (it has depth) but carries no texture.
  double margin_px = 4.0;
  Rgb margin_color{228, 228, 222};
  std::uint64_t background_seed = 7;
};

struct SceneObject {
  const ReferenceObject* object = nullptr;
  ScenePose pose;
};

struct RenderResult {
  ColorImage color;
  DepthFrame depth;
  ScenePose ground_truth;
  Homography homography;
};

struct SceneRender {
  ColorImage color;
  DepthFrame depth;
  std::vector<ScenePose> ground_truth;
  std::vector<Homography> homographies;
};

/// Renders one object over the background. Throws BackFacing.
RenderResult render(const ScenePose& pose, const ReferenceObject& obj,
                    const CameraIntrinsics& intrinsics,
                    const NoiseConfig& noise = {},
                    const RenderOptions& options = {});

/// Renders several objects, farthest first (painter's order).
SceneRender render_scene(std::span<const SceneObject> objects,
                         const CameraIntrinsics& intrinsics,
                         const NoiseConfig& noise = {},
                         const RenderOptions& options = {});

/// Seeded high-texture test card: overlapping colored rectangles, disks and
/// triangles.
ColorImage make_test_card(int width, int height, std::uint64_t seed);

/// Reference object for a test card, scaled so that it appears at roughly
/// its native resolution at 1 m under default_intrinsics().
ReferenceObject make_test_object(std::string id, int width, int height,
                                 std::uint64_t seed,
                                 const DetectorDescriptor& detector);

struct SweepConfig {
  std::vector<double> angles_deg;
  int trials = 1;
  double distance_m = 1.0;
  /// Per-trial random lateral offset bound (meters).
  double position_jitter_m = 0.02;
  NoiseConfig noise;
  CameraIntrinsics intrinsics = default_intrinsics();
  PoseConfig pose;
  std::uint64_t seed = 0;
  RenderOptions render;
};

struct SweepRow {
  double angle_deg = 0.0;
  bool detected = false;
  int successes = 0;
  int trials = 0;
  double num_matches = 0.0;  ///< mean over trials
  double rot_err_deg = 0.0;  ///< mean over successful trials, NaN if none
  double pos_err_m = 0.0;
  double epsilon = 0.0;      ///< over successful trials (frames), NaN if none
};

/// Fraction of trials that must succeed for an angle to count as detected.
inline constexpr double kDetectionRate = 0.8;

/// Renders each angle `trials` times, estimates the pose and compares it
/// with ground truth. Throws InvalidInput for angles outside (-90, 90) or an
/// empty grid.
std::vector<SweepRow> sweep_out_of_plane(const ReferenceObject& obj,
                                         const DetectorDescriptor& detector,
                                         const SweepConfig& cfg);

/// Largest detected angle in a sweep.
std::optional<double> max_out_of_plane(std::span<const SweepRow> rows);

/// CSV with header angle_deg,detected,num_matches,rot_err_deg,pos_err_m,epsilon.
std::string sweep_to_csv(std::span<const SweepRow> rows);

/// Spearman rank correlation with average ranks for ties. NaN when either
/// series is constant or has fewer than two samples.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace planegrasp
