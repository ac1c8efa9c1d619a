#include "planegrasp/pose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "planegrasp/error.hpp"

namespace planegrasp {

void CameraIntrinsics::validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0)) {
    throw InvalidInput("focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw InvalidInput("image dimensions must be positive");
  }
  if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height)) {
    throw InvalidInput("principal point must lie inside the image");
  }
}

DepthFrame::DepthFrame(CameraIntrinsics intrinsics,
                       std::vector<std::uint16_t> depth_mm)
    : intrinsics_(intrinsics), depth_(std::move(depth_mm)) {
  intrinsics_.validate();
  if (depth_.size() !=
      static_cast<std::size_t>(intrinsics_.width) * intrinsics_.height) {
    throw InvalidInput("depth size does not match intrinsics");
  }
}

DepthFrame::DepthFrame(CameraIntrinsics intrinsics)
    : DepthFrame(intrinsics,
                 std::vector<std::uint16_t>(
                     static_cast<std::size_t>(intrinsics.width) *
                         std::max(intrinsics.height, 0),
                     0)) {}

ReferenceObject make_reference_object(std::string id, const ColorImage& color,
                                      const DetectorDescriptor& detector) {
  ReferenceObject obj;
  obj.id = std::move(id);
  obj.color = color;
  obj.texture = to_gray(color);
  obj.width_px = color.width();
  obj.height_px = color.height();
  obj.features = detector.extract(obj.texture);
  return obj;
}

std::string_view to_string(AbsenceReason reason) {
  switch (reason) {
    case AbsenceReason::kNone:
      return "none";
    case AbsenceReason::kInsufficientMatches:
      return "insufficient_matches";
    case AbsenceReason::kNoConsensus:
      return "no_consensus";
    case AbsenceReason::kNoDepth:
      return "no_depth";
    case AbsenceReason::kDegeneratePlane:
      return "degenerate_plane";
    case AbsenceReason::kPointAtInfinity:
      return "point_at_infinity";
  }
  return "unknown";
}

std::optional<AbsenceReason> absence_reason_from_string(std::string_view s) {
  for (const auto r :
       {AbsenceReason::kNone, AbsenceReason::kInsufficientMatches,
        AbsenceReason::kNoConsensus, AbsenceReason::kNoDepth,
        AbsenceReason::kDegeneratePlane, AbsenceReason::kPointAtInfinity}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

AxisPoints reference_axis_points(int width_px, int height_px) {
  if (width_px < 2 || height_px < 2) {
    throw InvalidInput("reference image must be at least 2x2");
  }
  const double w = width_px;
  const double h = height_px;
  return {{w / 2.0, h / 2.0}, {w, h / 2.0}, {w / 2.0, 0.0}};
}

double depth_at(const Vec2& pixel, const DepthFrame& depth) {
  if (!pixel.allFinite()) throw NoDepth("non-finite pixel");
  const long u = std::lround(pixel.x());
  const long v = std::lround(pixel.y());
  if (!depth.contains(static_cast<int>(u), static_cast<int>(v)) ||
      std::abs(pixel.x()) > 1e7 || std::abs(pixel.y()) > 1e7) {
    throw NoDepth("pixel outside the depth frame");
  }
  const int x = static_cast<int>(u);
  const int y = static_cast<int>(v);
  if (const auto d = depth.at(x, y); d != 0) return d / 1000.0;

  std::vector<std::uint16_t> valid;
  constexpr int r = kDepthRepairRadius;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > r * r) continue;
      if (!depth.contains(x + dx, y + dy)) continue;
      if (const auto d = depth.at(x + dx, y + dy); d != 0) valid.push_back(d);
    }
  }
  if (valid.empty()) throw NoDepth("no valid depth near pixel");
  std::sort(valid.begin(), valid.end());
  const std::size_t m = valid.size() / 2;
  const double median_mm = valid.size() % 2
                               ? static_cast<double>(valid[m])
                               : 0.5 * (static_cast<double>(valid[m - 1]) +
                                        static_cast<double>(valid[m]));
  return median_mm / 1000.0;
}

Vec3 backproject(const Vec2& pixel, const DepthFrame& depth) {
  const double d = depth_at(pixel, depth);
  return depth.intrinsics().ray(pixel) * d;
}

RotationMatrix build_frame(const Vec3& c, const Vec3& x_raw,
                           const Vec3& y_raw) {
  static const double kMaxCos = std::cos(10.0 * std::numbers::pi / 180.0);
  const Vec3 x = x_raw - c;
  const Vec3 y = y_raw - c;
  const double nx = x.norm();
  const double ny = y.norm();
  if (!(nx > 1e-6 && ny > 1e-6)) {
    throw DegeneratePlane("plane basis vector too short");
  }
  if (!(std::abs(x.dot(y)) / (nx * ny) < kMaxCos)) {
    throw DegeneratePlane("plane basis vectors nearly parallel");
  }
  const Vec3 z = x.cross(y);
  const Vec3 y_cross_z = y.cross(z);
  Eigen::Matrix3d m;
  m.col(0) = y_cross_z / y_cross_z.norm();
  m.col(1) = y / ny;
  m.col(2) = z / z.norm();
  return RotationMatrix(m);
}

PlanarPose pose_from_homography(const Homography& h, int width_px,
                                int height_px, const DepthFrame& depth) {
  const AxisPoints ref = reference_axis_points(width_px, height_px);
  const Vec3 c = backproject(project(h, ref.center), depth);
  const Vec3 x_raw = backproject(project(h, ref.x), depth);
  const Vec3 y_raw = backproject(project(h, ref.y), depth);

  PlanarPose pose;
  pose.position = c;
  pose.frame = build_frame(c, x_raw, y_raw);
  const EulerDecomposition e = euler_from_rot(pose.frame);
  pose.euler = e.angles;
  pose.degenerate = e.degenerate;
  pose.x_axis = x_raw - c;
  pose.y_axis = y_raw - c;
  pose.homography = h;
  return pose;
}

PoseResult estimate_pose(const ReferenceObject& obj,
                         const FeatureSet& frame_features,
                         const DepthFrame& depth,
                         const DetectorDescriptor& detector,
                         const PoseConfig& cfg) {
  PoseResult result;
  const std::vector<Match> matches = detector.match(obj.features, frame_features);
  result.num_matches = static_cast<int>(matches.size());
  if (!object_present(matches, cfg.min_matches)) {
    result.reason = AbsenceReason::kInsufficientMatches;
    return result;
  }

  std::vector<Correspondence> corr;
  corr.reserve(matches.size());
  for (const Match& m : matches) {
    const Keypoint& a = obj.features.keypoints[m.query_index];
    const Keypoint& b = frame_features.keypoints[m.train_index];
    corr.push_back({{a.x, a.y}, {b.x, b.y}});
  }

  RansacConfig ransac = cfg.ransac;
  ransac.min_inliers = cfg.min_matches;
  RansacResult fit;
  try {
    fit = estimate_ransac(corr, ransac);
  } catch (const NoConsensus& e) {
    result.reason = AbsenceReason::kNoConsensus;
    result.detail = e.what();
    return result;
  }
  result.num_inliers = fit.num_inliers;

  try {
    PlanarPose pose =
        pose_from_homography(fit.homography, obj.width_px, obj.height_px, depth);
    pose.num_matches = result.num_matches;
    pose.num_inliers = result.num_inliers;
    result.pose = std::move(pose);
  } catch (const NoDepth& e) {
    result.reason = AbsenceReason::kNoDepth;
    result.detail = e.what();
  } catch (const DegeneratePlane& e) {
    result.reason = AbsenceReason::kDegeneratePlane;
    result.detail = e.what();
  } catch (const PointAtInfinity& e) {
    result.reason = AbsenceReason::kPointAtInfinity;
    result.detail = e.what();
  }
  return result;
}

PoseResult estimate_pose(const ReferenceObject& obj, const GrayImage& gray,
                         const DepthFrame& depth,
                         const DetectorDescriptor& detector,
                         const PoseConfig& cfg) {
  if (gray.width() != depth.width() || gray.height() != depth.height()) {
    throw InvalidInput("image and depth dimensions differ");
  }
  return estimate_pose(obj, detector.extract(gray), depth, detector, cfg);
}

std::vector<PoseResult> estimate_poses(
    std::span<const ReferenceObject* const> objects, const GrayImage& gray,
    const DepthFrame& depth, const DetectorDescriptor& detector,
    const PoseConfig& cfg) {
  if (gray.width() != depth.width() || gray.height() != depth.height()) {
    throw InvalidInput("image and depth dimensions differ");
  }
  const FeatureSet frame = detector.extract(gray);
  std::vector<PoseResult> out;
  out.reserve(objects.size());
  for (const ReferenceObject* obj : objects) {
    out.push_back(estimate_pose(*obj, frame, depth, detector, cfg));
  }
  return out;
}

double epsilon_metric(std::span<const std::pair<Vec3, Vec3>> pairs) {
  if (pairs.empty()) throw InvalidInput("epsilon needs at least one frame");
  double sum = 0.0;
  for (const auto& [recalc, orig] : pairs) sum += (recalc - orig).norm();
  return sum / static_cast<double>(pairs.size());
}

std::pair<Vec3, Vec3> recomputed_x_pair(const PlanarPose& pose) {
  return {pose.frame.column(0) * pose.x_axis.norm(), pose.x_axis};
}

namespace {

constexpr double kNearPlane = 1e-3;

std::optional<AxisSegment> project_segment(Vec3 a, Vec3 b,
                                           const CameraIntrinsics& k) {
  if (a.z() < kNearPlane && b.z() < kNearPlane) return std::nullopt;
  if (a.z() < kNearPlane) {
    a = a + (b - a) * ((kNearPlane - a.z()) / (b.z() - a.z()));
  } else if (b.z() < kNearPlane) {
    b = b + (a - b) * ((kNearPlane - b.z()) / (a.z() - b.z()));
  }
  return AxisSegment{k.project(a), k.project(b)};
}

// Liang-Barsky clip of a 2D segment to [0, w-1] x [0, h-1].
bool clip_to_image(Vec2& p0, Vec2& p1, int w, int h) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = p1 - p0;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {p0.x(), (w - 1) - p0.x(), p0.y(), (h - 1) - p0.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  const Vec2 start = p0 + t0 * d;
  p1 = p0 + t1 * d;
  p0 = start;
  return true;
}

void draw_segment(ColorImage& img, AxisSegment s, Rgb color) {
  if (!clip_to_image(s.from, s.to, img.width(), img.height())) return;
  const Vec2 d = s.to - s.from;
  const int steps =
      static_cast<int>(std::ceil(std::max(std::abs(d.x()), std::abs(d.y())))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const Vec2 p = s.from + d * (static_cast<double>(i) / steps);
    const int x = static_cast<int>(std::lround(p.x()));
    const int y = static_cast<int>(std::lround(p.y()));
    for (int oy = 0; oy <= 1; ++oy) {
      for (int ox = 0; ox <= 1; ++ox) {
        if (img.contains(x + ox, y + oy)) img.at(x + ox, y + oy) = color;
      }
    }
  }
}

}  // namespace

ProjectedAxes project_axes(const PlanarPose& pose,
                           const CameraIntrinsics& intrinsics,
                           double axis_length_m) {
  const Vec3& c = pose.position;
  return {project_segment(c, c + axis_length_m * pose.frame.column(0), intrinsics),
          project_segment(c, c + axis_length_m * pose.frame.column(1), intrinsics),
          project_segment(c, c + axis_length_m * pose.frame.column(2), intrinsics)};
}

ColorImage overlay_axes(const ColorImage& image, const PlanarPose& pose,
                        const CameraIntrinsics& intrinsics,
                        double axis_length_m) {
  ColorImage out = image;
  const ProjectedAxes axes = project_axes(pose, intrinsics, axis_length_m);
  if (axes.x) draw_segment(out, *axes.x, {255, 0, 0});
  if (axes.y) draw_segment(out, *axes.y, {0, 255, 0});
  if (axes.z) draw_segment(out, *axes.z, {0, 0, 255});
  return out;
}

}  // namespace planegrasp
