#include "planegrasp/cli/records.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "planegrasp/error.hpp"
#include "planegrasp/grasp.hpp"

namespace planegrasp::cli {
using nlohmann::json;
using nlohmann::ordered_json;

PoseRecord make_record(const std::string& object_id, const PoseResult& result,
                       const std::optional<RigidTransform>& base_from_camera) {
  PoseRecord rec;
  rec.object_id = object_id;
  rec.num_matches = result.num_matches;
  rec.num_inliers = result.num_inliers;
  rec.reference_frame = base_from_camera ? "base" : "camera";
  if (!result.present()) {
    rec.reason = std::string(to_string(result.reason));
    return rec;
  }
  const PlanarPose& pose = *result.pose;
  rec.present = true;
  RigidTransform t(pose.frame, pose.position);
  if (base_from_camera) t = compose(*base_from_camera, t);
  rec.position = t.translation();
  rec.frame = t.rotation().matrix();
  const EulerDecomposition e = euler_from_rot(t.rotation());
  rec.euler = e.angles;
  rec.degenerate = e.degenerate;
  return rec;
}

std::string to_json_line(const PoseRecord& r) {
  ordered_json j;
  j["object_id"] = r.object_id;
  if (r.frame_name) j["frame_name"] = *r.frame_name;
  j["present"] = r.present;
  j["reason"] = r.present ? ordered_json() : ordered_json(r.reason);
  j["reference_frame"] = r.reference_frame;
  if (r.present) {
    j["position"] = {r.position.x(), r.position.y(), r.position.z()};
    j["euler"] = {r.euler.phi, r.euler.theta, r.euler.psi};
    ordered_json f = ordered_json::array();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) f.push_back(r.frame(row, col));
    }
    j["frame"] = f;
    j["degenerate"] = r.degenerate;
  } else {
    j["position"] = nullptr;
    j["euler"] = nullptr;
    j["frame"] = nullptr;
    j["degenerate"] = nullptr;
  }
  j["num_matches"] = r.num_matches;
  j["num_inliers"] = r.num_inliers;
  return j.dump();
}

std::vector<PoseRecord> parse_records(const std::string& text) {
  std::vector<PoseRecord> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      PoseRecord r;
      r.object_id = j.at("object_id").get<std::string>();
      r.present = j.at("present").get<bool>();
      if (j.contains("frame_name")) r.frame_name = j["frame_name"].get<std::string>();
      if (j.contains("reference_frame")) {
        r.reference_frame = j["reference_frame"].get<std::string>();
      }
      r.num_matches = j.value("num_matches", 0);
      r.num_inliers = j.value("num_inliers", 0);
      if (r.present) {
        const auto p = j.at("position").get<std::array<double, 3>>();
        const auto e = j.at("euler").get<std::array<double, 3>>();
        const auto f = j.at("frame").get<std::array<double, 9>>();
        r.position = Vec3(p[0], p[1], p[2]);
        r.euler = {e[0], e[1], e[2]};
        for (int i = 0; i < 9; ++i) r.frame(i / 3, i % 3) = f[i];
        r.degenerate = j.value("degenerate", false);
      } else if (j.contains("reason") && j["reason"].is_string()) {
        r.reason = j["reason"].get<std::string>();
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw InvalidInput("pose record line " + std::to_string(line_no) + ": " +
                         e.what());
    }
  }
  return out;
}

RigidTransform record_transform(const PoseRecord& record) {
  if (!record.present) {
    throw InvalidInput("object " + record.object_id + " is not present");
  }
  if (record.degenerate) {
    throw DegeneratePose("pose of " + record.object_id + " is gimbal-locked");
  }
  return {RotationMatrix::repaired(record.frame), record.position};
}

}  // namespace planegrasp::cli
