#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planegrasp/error.hpp"
#include "planegrasp/geometry.hpp"
#include "planegrasp/pose.hpp"

namespace planegrasp {

/// Gripper wrist pose expressed in the object frame.
struct CanonicalGrasp {
  std::string object_id;
  std::string grasp_id;
  RigidTransform object_to_gripper;
};

/// Object->gripper from a base->object and a base->gripper transform:
/// inverse(base_to_object) * base_to_gripper.
CanonicalGrasp train_grasp(const RigidTransform& base_to_object,
                           const RigidTransform& base_to_gripper,
                           std::string object_id = {},
                           std::string grasp_id = {});

/// Gripper target in the base frame for a newly observed object pose.
RigidTransform adapt_grasp(const RigidTransform& base_to_object,
                           const CanonicalGrasp& grasp);

/// Roll/pitch/yaw of a gripper transform.
RollPitchYaw grasp_orientation(const RigidTransform& base_to_gripper);

/// Object pose as a rigid transform (rotation = pose frame, translation =
/// pose position), optionally re-expressed in the base frame through a
/// camera->base extrinsic. Throws DegeneratePose for gimbal-locked poses.
RigidTransform pose_to_transform(
    const PlanarPose& pose,
    const std::optional<RigidTransform>& base_from_camera = std::nullopt);

class DuplicateGrasp : public Error {
 public:
  using Error::Error;
};

/// Canonical grasps keyed by (object_id, grasp_id).
class GraspLibrary {
 public:
  static constexpr const char* kFormat = "planegrasp.grasp_library";
  static constexpr int kVersion = 1;

  /// Throws DuplicateGrasp if the key exists and `replace` is false.
  void add(const CanonicalGrasp& grasp, bool replace = false);
  std::optional<CanonicalGrasp> find(const std::string& object_id,
                                     const std::string& grasp_id) const;
  std::vector<CanonicalGrasp> grasps_for(const std::string& object_id) const;
  std::size_t size() const;

  std::string to_json() const;
  /// Throws InvalidInput on malformed documents or a wrong format tag.
  static GraspLibrary from_json(const std::string& text);

  /// Missing file yields an empty library.
  static GraspLibrary load(const std::filesystem::path& path);
  /// Writes to a temporary sibling and renames it over `path`.
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::map<std::string, RigidTransform>> grasps_;
};

}  // namespace planegrasp
