#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "planegrasp/geometry.hpp"
#include "planegrasp/pose.hpp"

namespace planegrasp::cli {

/// One line of `detect` output. When `present` is false the geometric
/// fields are absent and `reason` names the failure.
struct PoseRecord {
  std::string object_id;
  bool present = false;
  std::string reason;                 ///< empty when present
  std::string reference_frame = "camera";  ///< "camera" or "base"
  std::optional<std::string> frame_name;   ///< input stem in watch mode
  Vec3 position = Vec3::Zero();
  EulerAngles euler;
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
  bool degenerate = false;
  int num_matches = 0;
  int num_inliers = 0;
};

/// Converts a detection result. With an extrinsic the pose is re-expressed
/// in the base frame.
PoseRecord make_record(const std::string& object_id, const PoseResult& result,
                       const std::optional<RigidTransform>& base_from_camera);

/// Single-line JSON, keys in a fixed order, doubles printed round-trip exact.
std::string to_json_line(const PoseRecord& record);

/// Parses JSON lines (blank lines skipped). Throws InvalidInput.
std::vector<PoseRecord> parse_records(const std::string& text);

/// Object pose of a present, non-degenerate record. Throws InvalidInput or
/// DegeneratePose.
RigidTransform record_transform(const PoseRecord& record);

}  // namespace planegrasp::cli
