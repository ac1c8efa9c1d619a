#include "planegrasp/cli/bundle.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "planegrasp/error.hpp"
#include "planegrasp/image.hpp"

namespace planegrasp::cli {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace

void save_bundle(const fs::path& dir, const ObjectBundle& bundle) {
  const ReferenceObject& obj = bundle.object;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ordered_json meta;
  meta["format"] = ObjectBundle::kFormat;
  meta["version"] = ObjectBundle::kVersion;
  meta["id"] = obj.id;
  meta["detector"] = bundle.detector_id;
  meta["detector_params"] = {{"threshold", bundle.detector_params.threshold},
                             {"nonmax_radius", bundle.detector_params.nonmax_radius},
                             {"max_keypoints", bundle.detector_params.max_keypoints}};
  meta["width_px"] = obj.width_px;
  meta["height_px"] = obj.height_px;
  meta["physical_width_m"] =
      obj.physical_width_m ? ordered_json(*obj.physical_width_m) : ordered_json();
  meta["physical_height_m"] =
      obj.physical_height_m ? ordered_json(*obj.physical_height_m) : ordered_json();
  meta["keypoint_count"] = obj.features.size();
  meta["descriptor_bytes"] = BinaryDescriptor::kBytes;

  write_pgm(dir / "texture.pgm", obj.texture);
  write_ppm(dir / "color.ppm", obj.color.empty() ? to_color(obj.texture) : obj.color);
  write_keypoints_csv(dir / "keypoints.csv", obj.features.keypoints);
  write_descriptors(dir / "descriptors.bin", obj.features.descriptors);
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

ObjectBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("no bundle directory " + dir.string());
  ObjectBundle bundle;
  ReferenceObject& obj = bundle.object;
  try {
    const json meta = json::parse(read_text(dir / "metadata.json"));
    if (meta.at("format").get<std::string>() != ObjectBundle::kFormat) {
      throw InvalidInput(dir.string() + ": not an object bundle");
    }
    if (meta.at("version").get<int>() != ObjectBundle::kVersion) {
      throw InvalidInput(dir.string() + ": unsupported bundle version");
    }
    bundle.detector_id = meta.at("detector").get<std::string>();
    if (bundle.detector_id != SegmentTestBrief::kId) {
      throw InvalidInput(dir.string() + ": unknown detector " + bundle.detector_id);
    }
    if (meta.at("descriptor_bytes").get<int>() != BinaryDescriptor::kBytes) {
      throw InvalidInput(dir.string() + ": descriptor size mismatch");
    }
    const json& params = meta.at("detector_params");
    bundle.detector_params.threshold = params.at("threshold").get<int>();
    bundle.detector_params.nonmax_radius = params.at("nonmax_radius").get<int>();
    bundle.detector_params.max_keypoints = params.at("max_keypoints").get<int>();
    obj.id = meta.at("id").get<std::string>();
    obj.width_px = meta.at("width_px").get<int>();
    obj.height_px = meta.at("height_px").get<int>();
    if (!meta.at("physical_width_m").is_null()) {
      obj.physical_width_m = meta["physical_width_m"].get<double>();
    }
    if (!meta.at("physical_height_m").is_null()) {
      obj.physical_height_m = meta["physical_height_m"].get<double>();
    }
    const auto count = meta.at("keypoint_count").get<std::size_t>();

    obj.texture = read_pgm(dir / "texture.pgm");
    obj.color = read_ppm(dir / "color.ppm");
    obj.features.keypoints = read_keypoints_csv(dir / "keypoints.csv");
    obj.features.descriptors = read_descriptors(dir / "descriptors.bin");
    if (obj.features.keypoints.size() != count ||
        obj.features.descriptors.size() != count) {
      throw InvalidInput(dir.string() + ": keypoint/descriptor count mismatch");
    }
    if (obj.texture.width() != obj.width_px || obj.texture.height() != obj.height_px) {
      throw InvalidInput(dir.string() + ": texture size mismatch");
    }
    for (const Keypoint& kp : obj.features.keypoints) {
      if (!(kp.x >= 0 && kp.y >= 0 && kp.x < obj.width_px && kp.y < obj.height_px)) {
        throw InvalidInput(dir.string() + ": keypoint outside texture");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(dir.string() + ": malformed metadata: " + e.what());
  }
  return bundle;
}

CameraConfig load_camera_config(const fs::path& path) {
  const std::string text = read_text(path);
  CameraConfig cfg;
  try {
    const json doc = json::parse(text);
    CameraIntrinsics& k = cfg.intrinsics;
    k.fx = doc.at("fx").get<double>();
    k.fy = doc.at("fy").get<double>();
    k.cx = doc.at("cx").get<double>();
    k.cy = doc.at("cy").get<double>();
    k.width = doc.at("width").get<int>();
    k.height = doc.at("height").get<int>();
    if (doc.contains("camera_to_base") && !doc["camera_to_base"].is_null()) {
      cfg.base_from_camera = transform_from_row_major(
          doc["camera_to_base"].get<std::array<double, 16>>());
    }
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": malformed intrinsics: " + e.what());
  }
  cfg.intrinsics.validate();
  return cfg;
}

void save_camera_config(const fs::path& path, const CameraConfig& config) {
  const CameraIntrinsics& k = config.intrinsics;
  ordered_json doc;
  doc["fx"] = k.fx;
  doc["fy"] = k.fy;
  doc["cx"] = k.cx;
  doc["cy"] = k.cy;
  doc["width"] = k.width;
  doc["height"] = k.height;
  if (config.base_from_camera) {
    doc["camera_to_base"] = to_row_major(*config.base_from_camera);
  }
  write_text(path, doc.dump(2) + "\n");
}

DepthFrame load_depth(const fs::path& path, const CameraIntrinsics& intrinsics) {
  Image16 raw = read_pgm16(path);
  if (raw.width != intrinsics.width || raw.height != intrinsics.height) {
    throw InvalidInput(path.string() + ": depth size does not match intrinsics");
  }
  return DepthFrame(intrinsics, std::move(raw.samples));
}

void save_depth(const fs::path& path, const DepthFrame& depth) {
  write_pgm16(path, {depth.width(), depth.height(), depth.samples()});
}

}  // namespace planegrasp::cli
