#include "planegrasp/grasp.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "planegrasp/error.hpp"

namespace planegrasp {

CanonicalGrasp train_grasp(const RigidTransform& base_to_object,
                           const RigidTransform& base_to_gripper,
                           std::string object_id, std::string grasp_id) {
  return {std::move(object_id), std::move(grasp_id),
          compose(invert(base_to_object), base_to_gripper)};
}

RigidTransform adapt_grasp(const RigidTransform& base_to_object,
                           const CanonicalGrasp& grasp) {
  return compose(base_to_object, grasp.object_to_gripper);
}

RollPitchYaw grasp_orientation(const RigidTransform& base_to_gripper) {
  return rpy_from_transform(base_to_gripper);
}

RigidTransform pose_to_transform(
    const PlanarPose& pose,
    const std::optional<RigidTransform>& base_from_camera) {
  if (pose.degenerate) {
    throw DegeneratePose("pose orientation is at gimbal lock");
  }
  const RigidTransform camera_to_object(pose.frame, pose.position);
  return base_from_camera ? compose(*base_from_camera, camera_to_object)
                          : camera_to_object;
}

void GraspLibrary::add(const CanonicalGrasp& grasp, bool replace) {
  if (grasp.object_id.empty() || grasp.grasp_id.empty()) {
    throw InvalidInput("grasp ids must be non-empty");
  }
  auto& per_object = grasps_[grasp.object_id];
  if (!replace && per_object.contains(grasp.grasp_id)) {
    throw DuplicateGrasp("grasp '" + grasp.grasp_id + "' already exists for '" +
                         grasp.object_id + "'");
  }
  per_object.insert_or_assign(grasp.grasp_id, grasp.object_to_gripper);
}

std::optional<CanonicalGrasp> GraspLibrary::find(
    const std::string& object_id, const std::string& grasp_id) const {
  const auto obj = grasps_.find(object_id);
  if (obj == grasps_.end()) return std::nullopt;
  const auto g = obj->second.find(grasp_id);
  if (g == obj->second.end()) return std::nullopt;
  return CanonicalGrasp{object_id, grasp_id, g->second};
}

std::vector<CanonicalGrasp> GraspLibrary::grasps_for(
    const std::string& object_id) const {
  std::vector<CanonicalGrasp> out;
  if (const auto obj = grasps_.find(object_id); obj != grasps_.end()) {
    for (const auto& [id, t] : obj->second) out.push_back({object_id, id, t});
  }
  return out;
}

std::size_t GraspLibrary::size() const {
  std::size_t n = 0;
  for (const auto& [_, per_object] : grasps_) n += per_object.size();
  return n;
}

std::string GraspLibrary::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  nlohmann::ordered_json objects = nlohmann::ordered_json::object();
  for (const auto& [object_id, per_object] : grasps_) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    for (const auto& [grasp_id, t] : per_object) {
      entry[grasp_id] = to_row_major(t);
    }
    objects[object_id] = std::move(entry);
  }
  doc["objects"] = std::move(objects);
  return doc.dump(2) + "\n";
}

GraspLibrary GraspLibrary::from_json(const std::string& text) {
  GraspLibrary lib;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw InvalidInput("not a grasp library document");
    }
    if (doc.at("version").get<int>() != kVersion) {
      throw InvalidInput("unsupported grasp library version");
    }
    for (const auto& [object_id, per_object] : doc.at("objects").items()) {
      for (const auto& [grasp_id, values] : per_object.items()) {
        const auto v = values.get<std::array<double, 16>>();
        lib.add({object_id, grasp_id, transform_from_row_major(v)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed grasp library: ") + e.what());
  } catch (const DuplicateGrasp& e) {
    throw InvalidInput(std::string("malformed grasp library: ") + e.what());
  }
  return lib;
}

GraspLibrary GraspLibrary::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

void GraspLibrary::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw IoError("cannot write " + tmp.string());
    os << to_json();
    if (!os) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace planegrasp
