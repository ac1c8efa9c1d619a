#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "planegrasp/features.hpp"
#include "planegrasp/geometry.hpp"
#include "planegrasp/pose.hpp"

namespace planegrasp::cli {

/// On-disk layout of a trained object:
///   metadata.json   format tag, version, detector id and parameters, sizes
///   texture.pgm     8-bit gray texture the features were extracted from
///   color.ppm       color texture (used for synthetic rendering)
///   keypoints.csv   x,y,score
///   descriptors.bin 32 bytes per keypoint, same order as keypoints.csv
struct ObjectBundle {
  static constexpr const char* kFormat = "planegrasp.object";
  static constexpr int kVersion = 1;

  ReferenceObject object;
  std::string detector_id = SegmentTestBrief::kId;
  SegmentTestBriefParams detector_params;
};

/// Throws IoError or InvalidInput.
void save_bundle(const std::filesystem::path& dir, const ObjectBundle& bundle);
ObjectBundle load_bundle(const std::filesystem::path& dir);

/// Camera intrinsics plus an optional camera->base extrinsic.
struct CameraConfig {
  CameraIntrinsics intrinsics;
  std::optional<RigidTransform> base_from_camera;
};

/// JSON object with fx, fy, cx, cy, width, height and optionally
/// "camera_to_base" (16 numbers, row-major). Throws IoError when the file
/// cannot be read and InvalidInput when it is malformed.
CameraConfig load_camera_config(const std::filesystem::path& path);
void save_camera_config(const std::filesystem::path& path,
                        const CameraConfig& config);

/// Reads a 16-bit depth PGM and pairs it with intrinsics. Throws
/// InvalidInput when the sizes disagree.
DepthFrame load_depth(const std::filesystem::path& path,
                      const CameraIntrinsics& intrinsics);
void save_depth(const std::filesystem::path& path, const DepthFrame& depth);

}  // namespace planegrasp::cli
