#include "planegrasp/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "planegrasp/error.hpp"
#include "planegrasp/random.hpp"

namespace planegrasp {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kDefaultObjectWidthM = 0.2;
constexpr double kNativeFocal = 525.0;

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Rgb sample_bilinear(const ColorImage& img, double x, double y) {
  x = std::clamp(x, 0.0, img.width() - 1.0);
  y = std::clamp(y, 0.0, img.height() - 1.0);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const auto mix = [&](auto channel) {
    const double top = (1 - fx) * channel(img.at(x0, y0)) + fx * channel(img.at(x1, y0));
    const double bottom = (1 - fx) * channel(img.at(x0, y1)) + fx * channel(img.at(x1, y1));
    return clamp_u8((1 - fy) * top + fy * bottom);
  };
  return {mix([](const Rgb& c) { return double(c.r); }),
          mix([](const Rgb& c) { return double(c.g); }),
          mix([](const Rgb& c) { return double(c.b); })};
}

ColorImage make_background(int width, int height, std::uint64_t seed) {
  constexpr int kTile = 64;
  constexpr int kCell = 8;
  Rng rng(seed);
  std::array<std::uint8_t, (kTile / kCell) * (kTile / kCell)> cells{};
  for (auto& c : cells) c = static_cast<std::uint8_t>(100 + rng.below(57));
  ColorImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int cx = (x % kTile) / kCell;
      const int cy = (y % kTile) / kCell;
      const int g = cells[cy * (kTile / kCell) + cx];
      out.at(x, y) = {clamp_u8(g), clamp_u8(g + 4), clamp_u8(g - 4)};
    }
  }
  return out;
}

struct PlacedObject {
  const ReferenceObject* obj;
  ScenePose pose;
  Vec3 normal;
  double plane_offset;  // normal · t
  Vec2 scale;           // meters per reference pixel
};

}  // namespace

double ScenePose::out_of_plane_deg() const {
  const Vec3& t = camera_from_object.translation();
  const Vec3 normal = camera_from_object.rotation().column(2);
  const double c = std::clamp(normal.dot(-t.normalized()), -1.0, 1.0);
  return std::acos(c) / kDegToRad;
}

ScenePose make_scene_pose(double distance_m, double out_of_plane_deg,
                          double in_plane_deg, double offset_x_m,
                          double offset_y_m) {
  // Frontal: object x -> camera X, object y -> camera -Y, face normal -> -Z.
  const RotationMatrix frontal = rot_x(std::numbers::pi);
  const RotationMatrix r = frontal * rot_z(in_plane_deg * kDegToRad) *
                           rot_y(out_of_plane_deg * kDegToRad);
  return {RigidTransform(r, Vec3(offset_x_m, offset_y_m, distance_m))};
}

Vec2 meters_per_pixel(const ReferenceObject& obj) {
  if (obj.width_px < 1 || obj.height_px < 1) {
    throw InvalidInput("reference object has no size");
  }
  const double sx = obj.physical_width_m.value_or(kDefaultObjectWidthM) /
                    obj.width_px;
  const double sy = obj.physical_height_m
                        ? *obj.physical_height_m / obj.height_px
                        : sx;
  return {sx, sy};
}

CameraIntrinsics default_intrinsics() { return {}; }

Homography induced_homography(const ScenePose& pose,
                              const CameraIntrinsics& intrinsics,
                              const ReferenceObject& obj) {
  const RigidTransform& t = pose.camera_from_object;
  if (t.rotation().column(2).dot(t.translation()) >= 0.0) {
    throw BackFacing("object faces away from the camera");
  }
  const Vec2 s = meters_per_pixel(obj);
  Eigen::Matrix3d k;
  k << intrinsics.fx, 0, intrinsics.cx, 0, intrinsics.fy, intrinsics.cy, 0, 0, 1;
  Eigen::Matrix3d rt;
  rt.col(0) = t.rotation().column(0);
  rt.col(1) = t.rotation().column(1);
  rt.col(2) = t.translation();
  Eigen::Matrix3d plane;
  plane << s.x(), 0, -s.x() * obj.width_px / 2.0,  //
      0, -s.y(), s.y() * obj.height_px / 2.0,       //
      0, 0, 1;
  return Homography(k * rt * plane);
}

SceneRender render_scene(std::span<const SceneObject> objects,
                         const CameraIntrinsics& intrinsics,
                         const NoiseConfig& noise,
                         const RenderOptions& options) {
  intrinsics.validate();
  if (noise.hole_rate < 0.0 || noise.hole_rate > 1.0) {
    throw InvalidInput("hole_rate must lie in [0, 1]");
  }
  SceneRender out;
  std::vector<PlacedObject> placed;
  for (const SceneObject& so : objects) {
    out.homographies.push_back(
        induced_homography(so.pose, intrinsics, *so.object));
    out.ground_truth.push_back(so.pose);
    const RigidTransform& t = so.pose.camera_from_object;
    const Vec3 n = t.rotation().column(2);
    placed.push_back({so.object, so.pose, n, n.dot(t.translation()),
                      meters_per_pixel(*so.object)});
  }
  // Farthest first so nearer objects paint over them.
  std::stable_sort(placed.begin(), placed.end(),
                   [](const PlacedObject& a, const PlacedObject& b) {
                     return a.pose.camera_from_object.translation().z() >
                            b.pose.camera_from_object.translation().z();
                   });

  const int w = intrinsics.width;
  const int h = intrinsics.height;
  out.color = make_background(w, h, options.background_seed);
  std::vector<std::uint16_t> depth(static_cast<std::size_t>(w) * h, 0);

  for (const PlacedObject& p : placed) {
    const RigidTransform& t = p.pose.camera_from_object;
    const Eigen::Matrix3d rt = t.rotation().matrix().transpose();
    const double w_ref = p.obj->width_px;
    const double h_ref = p.obj->height_px;
    const double lo_x = -0.5 - options.margin_px;
    const double hi_x = w_ref - 0.5 + options.margin_px;
    const double lo_y = -0.5 - options.margin_px;
    const double hi_y = h_ref - 0.5 + options.margin_px;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const Vec3 ray = intrinsics.ray({double(u), double(v)});
        const double denom = p.normal.dot(ray);
        if (std::abs(denom) < 1e-12) continue;
        const double z = p.plane_offset / denom;
        if (!(z > 0.0)) continue;
        const Vec3 local = rt * (ray * z - t.translation());
        const double ur = local.x() / p.scale.x() + w_ref / 2.0;
        const double vr = h_ref / 2.0 - local.y() / p.scale.y();
        if (ur < lo_x || ur > hi_x || vr < lo_y || vr > hi_y) continue;
        const bool textured = ur >= -0.5 && ur <= w_ref - 0.5 &&
                              vr >= -0.5 && vr <= h_ref - 0.5;
        out.color.at(u, v) = textured ? sample_bilinear(p.obj->color, ur, vr)
                                      : options.margin_color;
        const double mm = std::round(z * 1000.0);
        depth[static_cast<std::size_t>(v) * w + u] =
            static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
      }
    }
  }

  if (noise.pixel_noise_sigma > 0.0 || noise.depth_noise_mm > 0.0 ||
      noise.hole_rate > 0.0) {
    Rng rng(noise.seed);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (noise.pixel_noise_sigma > 0.0) {
          Rgb& c = out.color.at(u, v);
          c.r = clamp_u8(c.r + noise.pixel_noise_sigma * rng.gaussian());
          c.g = clamp_u8(c.g + noise.pixel_noise_sigma * rng.gaussian());
          c.b = clamp_u8(c.b + noise.pixel_noise_sigma * rng.gaussian());
        }
        auto& d = depth[static_cast<std::size_t>(v) * w + u];
        if (d == 0) continue;
        if (noise.hole_rate > 0.0 && rng.uniform() < noise.hole_rate) {
          d = 0;
          continue;
        }
        if (noise.depth_noise_mm > 0.0) {
          const double noisy =
              std::round(d + noise.depth_noise_mm * rng.gaussian());
          d = static_cast<std::uint16_t>(std::clamp(noisy, 1.0, 65535.0));
        }
      }
    }
  }

  out.depth = DepthFrame(intrinsics, std::move(depth));
  return out;
}

RenderResult render(const ScenePose& pose, const ReferenceObject& obj,
                    const CameraIntrinsics& intrinsics,
                    const NoiseConfig& noise, const RenderOptions& options) {
  const SceneObject so{&obj, pose};
  SceneRender scene = render_scene({&so, 1}, intrinsics, noise, options);
  return {std::move(scene.color), std::move(scene.depth), pose,
          scene.homographies.front()};
}

ColorImage make_test_card(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  const auto random_color = [&]() -> Rgb {
    return {static_cast<std::uint8_t>(20 + rng.below(216)),
            static_cast<std::uint8_t>(20 + rng.below(216)),
            static_cast<std::uint8_t>(20 + rng.below(216))};
  };
  ColorImage img(width, height, random_color());
  const double area = static_cast<double>(width) * height;
  const int shapes = std::max(8, static_cast<int>(area / 400.0));

  for (int s = 0; s < shapes; ++s) {
    const Rgb color = random_color();
    const int kind = static_cast<int>(rng.below(3));
    const double cx = rng.uniform(-10.0, width + 10.0);
    const double cy = rng.uniform(-10.0, height + 10.0);
    const double size = rng.uniform(4.0, 28.0);
    if (kind == 0) {
      const double hw = size * rng.uniform(0.4, 1.6);
      const double hh = size * rng.uniform(0.4, 1.6);
      for (int y = std::max(0, int(cy - hh)); y < std::min(height, int(cy + hh)); ++y) {
        for (int x = std::max(0, int(cx - hw)); x < std::min(width, int(cx + hw)); ++x) {
          img.at(x, y) = color;
        }
      }
    } else if (kind == 1) {
      const double r2 = size * size * 0.5;
      for (int y = std::max(0, int(cy - size)); y < std::min(height, int(cy + size) + 1); ++y) {
        for (int x = std::max(0, int(cx - size)); x < std::min(width, int(cx + size) + 1); ++x) {
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r2) img.at(x, y) = color;
        }
      }
    } else {
      std::array<Vec2, 3> p;
      for (auto& q : p) {
        q = {cx + rng.uniform(-size, size) * 1.5, cy + rng.uniform(-size, size) * 1.5};
      }
      const double area2 = triangle_area2(p[0], p[1], p[2]);
      if (std::abs(area2) < 1.0) continue;
      const int x0 = std::max(0, int(std::min({p[0].x(), p[1].x(), p[2].x()})));
      const int x1 = std::min(width - 1, int(std::max({p[0].x(), p[1].x(), p[2].x()})));
      const int y0 = std::max(0, int(std::min({p[0].y(), p[1].y(), p[2].y()})));
      const int y1 = std::min(height - 1, int(std::max({p[0].y(), p[1].y(), p[2].y()})));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const Vec2 q(x, y);
          const double a = triangle_area2(p[0], p[1], q);
          const double b = triangle_area2(p[1], p[2], q);
          const double c = triangle_area2(p[2], p[0], q);
          if ((a >= 0 && b >= 0 && c >= 0) || (a <= 0 && b <= 0 && c <= 0)) {
            img.at(x, y) = color;
          }
        }
      }
    }
  }
  return img;
}

ReferenceObject make_test_object(std::string id, int width, int height,
                                 std::uint64_t seed,
                                 const DetectorDescriptor& detector) {
  ReferenceObject obj =
      make_reference_object(std::move(id), make_test_card(width, height, seed), detector);
  obj.physical_width_m = width / kNativeFocal;
  obj.physical_height_m = height / kNativeFocal;
  return obj;
}

std::vector<SweepRow> sweep_out_of_plane(const ReferenceObject& obj,
                                         const DetectorDescriptor& detector,
                                         const SweepConfig& cfg) {
  if (cfg.angles_deg.empty()) throw InvalidInput("empty angle list");
  if (cfg.trials < 1) throw InvalidInput("trials must be >= 1");
  for (const double a : cfg.angles_deg) {
    if (!(a > -90.0 && a < 90.0)) {
      throw InvalidInput("sweep angles must lie in (-90, 90)");
    }
  }

  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < cfg.angles_deg.size(); ++ai) {
    const double angle = cfg.angles_deg[ai];
    SweepRow row;
    row.angle_deg = angle;
    row.trials = cfg.trials;
    double matches = 0.0, rot = 0.0, pos = 0.0;
    std::vector<std::pair<Vec3, Vec3>> eps_pairs;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t trial_seed =
          mix_seed(cfg.seed, static_cast<std::uint64_t>(ai) * 1000003u + trial);
      Rng rng(trial_seed);
      const double ox = rng.uniform(-cfg.position_jitter_m, cfg.position_jitter_m);
      const double oy = rng.uniform(-cfg.position_jitter_m, cfg.position_jitter_m);
      const ScenePose pose = make_scene_pose(cfg.distance_m, angle, 0.0, ox, oy);
      NoiseConfig noise = cfg.noise;
      noise.seed = mix_seed(trial_seed, cfg.noise.seed);
      const RenderResult scene =
          render(pose, obj, cfg.intrinsics, noise, cfg.render);
      const PoseResult est = estimate_pose(obj, to_gray(scene.color), scene.depth,
                                           detector, cfg.pose);
      matches += est.num_matches;
      if (!est.present()) continue;
      ++row.successes;
      const RigidTransform& gt = pose.camera_from_object;
      rot += rotation_angle_between(est.pose->frame, gt.rotation()) / kDegToRad;
      pos += (est.pose->position - gt.translation()).norm();
      eps_pairs.push_back(recomputed_x_pair(*est.pose));
    }
    row.num_matches = matches / cfg.trials;
    row.detected = row.successes >= std::ceil(kDetectionRate * cfg.trials - 1e-9);
    if (row.successes > 0) {
      row.rot_err_deg = rot / row.successes;
      row.pos_err_m = pos / row.successes;
      row.epsilon = epsilon_metric(eps_pairs);
    } else {
      row.rot_err_deg = row.pos_err_m = row.epsilon =
          std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> max_out_of_plane(std::span<const SweepRow> rows) {
  std::optional<double> best;
  for (const SweepRow& r : rows) {
    if (r.detected && (!best || std::abs(r.angle_deg) > *best)) {
      best = std::abs(r.angle_deg);
    }
  }
  return best;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "angle_deg,detected,num_matches,rot_err_deg,pos_err_m,epsilon\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%d,%.1f,%.6f,%.9f,%.9f\n", r.angle_deg,
                  r.detected ? 1 : 0, r.num_matches, r.rot_err_deg, r.pos_err_m,
                  r.epsilon);
    os << buf;
  }
  return os.str();
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("series lengths differ");
  const std::size_t n = a.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace planegrasp
