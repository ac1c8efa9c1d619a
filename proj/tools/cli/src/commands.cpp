#include "planegrasp/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "planegrasp/cli/bundle.hpp"
#include "planegrasp/cli/records.hpp"
#include "planegrasp/error.hpp"
#include "planegrasp/grasp.hpp"
#include "planegrasp/image.hpp"
#include "planegrasp/pose.hpp"
#include "planegrasp/synth.hpp"

namespace planegrasp::cli {
namespace fs = std::filesystem;

namespace {

/// Carries an exit code out of a command body.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

/// Runs `fn`, mapping library exceptions to `code`.
template <typename Fn>
auto guarded(int code, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const CliError&) {
    throw;
  } catch (const IoError& e) {
    throw CliError(kExitIo, e.what());
  } catch (const Error& e) {
    throw CliError(code, e.what());
  }
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string read_source(const std::string& path, std::istream& in) {
  std::stringstream ss;
  if (path == "-") {
    ss << in.rdbuf();
  } else {
    std::ifstream is(path);
    if (!is) throw CliError(kExitIo, "cannot open " + path);
    ss << is.rdbuf();
  }
  return ss.str();
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - since)
      .count();
}

// ---------------------------------------------------------------------------
// Shared option groups.

struct MatchOptions {
  std::uint64_t seed = 0;
  double ratio = kDefaultMatchRatio;
  double ransac_threshold = 3.0;
  int min_matches = kMinMatches;

  void add_to(CLI::App& app) {
    app.add_option("--seed", seed, "RANSAC seed")->capture_default_str();
    app.add_option("--ratio", ratio, "descriptor ratio test")->capture_default_str();
    app.add_option("--ransac-threshold", ransac_threshold,
                   "inlier threshold in pixels")
        ->capture_default_str();
    app.add_option("--min-matches", min_matches,
                   "matches required for presence")
        ->capture_default_str();
  }

  PoseConfig pose_config() const {
    if (!(ratio > 0.0 && ratio < 1.0)) {
      throw CliError(kExitBadArgs, "--ratio must lie in (0, 1)");
    }
    if (min_matches < 4) throw CliError(kExitBadArgs, "--min-matches must be >= 4");
    PoseConfig cfg;
    cfg.min_matches = min_matches;
    cfg.ransac.reprojection_threshold = ransac_threshold;
    cfg.ransac.seed = seed;
    guarded(kExitBadArgs, [&] { cfg.ransac.validate(); });
    return cfg;
  }

  SegmentTestBrief detector(SegmentTestBriefParams params) const {
    params.ratio = ratio;
    return SegmentTestBrief(params);
  }
};

std::vector<ObjectBundle> load_bundles(const std::vector<std::string>& dirs) {
  std::vector<ObjectBundle> bundles;
  for (const std::string& d : dirs) {
    bundles.push_back(guarded(kExitIo, [&] { return load_bundle(d); }));
  }
  for (const ObjectBundle& b : bundles) {
    const SegmentTestBriefParams& p = b.detector_params;
    const SegmentTestBriefParams& q = bundles.front().detector_params;
    if (p.threshold != q.threshold || p.nonmax_radius != q.nonmax_radius ||
        p.max_keypoints != q.max_keypoints) {
      throw CliError(kExitBadArgs, "bundles were trained with different detector settings");
    }
  }
  return bundles;
}

CameraConfig load_camera(const std::string& path) {
  return guarded(kExitBadArgs, [&] { return load_camera_config(path); });
}

struct Frame {
  ColorImage color;
  DepthFrame depth;
};

Frame load_frame(const std::string& rgb, const std::string& depth,
                 const CameraIntrinsics& k) {
  Frame f;
  f.color = guarded(kExitIo, [&] { return read_any_image(rgb); });
  if (f.color.width() != k.width || f.color.height() != k.height) {
    throw CliError(kExitBadArgs, rgb + ": image size does not match intrinsics");
  }
  Image16 raw = guarded(kExitIo, [&] { return read_pgm16(depth); });
  if (raw.width != k.width || raw.height != k.height) {
    throw CliError(kExitBadArgs, depth + ": depth size does not match intrinsics");
  }
  f.depth = DepthFrame(k, std::move(raw.samples));
  return f;
}

/// Extracts frame features once, then estimates each pose; per-object wall
/// time goes to `err` when given.
std::vector<PoseResult> detect_all(const std::vector<ObjectBundle>& bundles,
                                   const Frame& frame,
                                   const DetectorDescriptor& detector,
                                   const PoseConfig& cfg, std::ostream* err) {
  auto t0 = std::chrono::steady_clock::now();
  const FeatureSet features = detector.extract(to_gray(frame.color));
  if (err) {
    *err << "timing extract " << format("%.3f", elapsed_ms(t0)) << " ms\n";
  }
  std::vector<PoseResult> results;
  results.reserve(bundles.size());
  for (const ObjectBundle& b : bundles) {
    t0 = std::chrono::steady_clock::now();
    results.push_back(estimate_pose(b.object, features, frame.depth, detector, cfg));
    if (err) {
      *err << "timing object " << b.object.id << " "
           << format("%.3f", elapsed_ms(t0)) << " ms\n";
    }
  }
  return results;
}

/// Distance at which the object's texture appears at its native resolution;
/// the descriptor is not scale invariant, so this is the natural default.
double native_distance(const ReferenceObject& obj, const CameraIntrinsics& k) {
  return k.fx * meters_per_pixel(obj).x();
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string image;
  std::string out_dir;
  std::string id;
  SegmentTestBriefParams params;
  std::optional<double> width_m;
  std::optional<double> height_m;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const ColorImage color = guarded(kExitIo, [&] { return read_any_image(a.image); });
  if (a.params.threshold < 1 || a.params.threshold > 255 ||
      a.params.nonmax_radius < 0 || a.params.max_keypoints < 1) {
    throw CliError(kExitBadArgs, "invalid detector settings");
  }
  if ((a.width_m && !(*a.width_m > 0)) || (a.height_m && !(*a.height_m > 0))) {
    throw CliError(kExitBadArgs, "physical dimensions must be positive");
  }
  ObjectBundle bundle;
  bundle.detector_params = a.params;
  const SegmentTestBrief detector(a.params);
  const std::string id = a.id.empty() ? fs::path(a.image).stem().string() : a.id;
  bundle.object = make_reference_object(id, color, detector);
  bundle.object.physical_width_m = a.width_m;
  bundle.object.physical_height_m = a.height_m;
  if (a.width_m && !a.height_m) {
    bundle.object.physical_height_m = *a.width_m * color.height() / color.width();
  }
  if (a.height_m && !a.width_m) {
    bundle.object.physical_width_m = *a.height_m * color.width() / color.height();
  }

  const std::size_t n = bundle.object.features.size();
  if (static_cast<int>(n) < kMinMatches) {
    err << "untrainable: " << n << " keypoints, need at least " << kMinMatches
        << "\n";
    return kExitUntrainable;
  }
  guarded(kExitIo, [&] { save_bundle(a.out_dir, bundle); });
  out << "keypoints " << n << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
  std::vector<std::string> bundles;
  std::string rgb;
  std::string depth;
  std::string intrinsics;
  std::string overlay;
  double axis_length = 0.1;
  std::string watch_dir;
  int max_frames = 0;
  int poll_ms = 200;
  int idle_timeout_ms = 0;
  MatchOptions match;
};

void write_overlay(const std::string& path, const Frame& frame,
                   const std::vector<PoseResult>& results, double axis_length) {
  ColorImage img = frame.color;
  for (const PoseResult& r : results) {
    if (r.present()) img = overlay_axes(img, *r.pose, frame.depth.intrinsics(), axis_length);
  }
  guarded(kExitIo, [&] { write_ppm(path, img); });
}

void emit_records(const std::vector<ObjectBundle>& bundles,
                  const std::vector<PoseResult>& results,
                  const CameraConfig& camera,
                  const std::optional<std::string>& frame_name,
                  std::ostream& out) {
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    PoseRecord rec =
        make_record(bundles[i].object.id, results[i], camera.base_from_camera);
    rec.frame_name = frame_name;
    out << to_json_line(rec) << "\n";
  }
  out.flush();
}

int run_watch(const DetectArgs& a, const std::vector<ObjectBundle>& bundles,
              const CameraConfig& camera, const DetectorDescriptor& detector,
              const PoseConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(a.watch_dir)) {
    throw CliError(kExitIo, "not a directory: " + a.watch_dir);
  }
  if (!a.overlay.empty()) {
    std::error_code ec;
    fs::create_directories(a.overlay, ec);
    if (ec) throw CliError(kExitIo, "cannot create " + a.overlay);
  }
  constexpr int kMaxAttempts = 3;
  std::set<std::string> done;
  std::map<std::string, int> attempts;
  int processed = 0;
  auto last_activity = std::chrono::steady_clock::now();
  static constexpr std::string_view kDepthSuffix = ".depth.pgm";

  while (true) {
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(a.watch_dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.path().extension() != ".ppm") continue;
      const std::string stem = entry.path().stem().string();
      if (done.count(stem)) continue;
      if (!fs::exists(fs::path(a.watch_dir) / (stem + std::string(kDepthSuffix)))) {
        continue;
      }
      stems.push_back(stem);
    }
    std::sort(stems.begin(), stems.end());

    for (const std::string& stem : stems) {
      const fs::path dir(a.watch_dir);
      Frame frame;
      try {
        frame = load_frame((dir / (stem + ".ppm")).string(),
                           (dir / (stem + std::string(kDepthSuffix))).string(),
                           camera.intrinsics);
      } catch (const CliError& e) {
        // The writer may not have finished; retry on later polls.
        if (++attempts[stem] < kMaxAttempts) continue;
        err << "skipping frame " << stem << ": " << e.what() << "\n";
        done.insert(stem);
        continue;
      }
      done.insert(stem);
      const auto results = detect_all(bundles, frame, detector, cfg, &err);
      emit_records(bundles, results, camera, stem, out);
      if (!a.overlay.empty()) {
        write_overlay((fs::path(a.overlay) / (stem + ".overlay.ppm")).string(),
                      frame, results, a.axis_length);
      }
      last_activity = std::chrono::steady_clock::now();
      if (a.max_frames > 0 && ++processed >= a.max_frames) return kExitOk;
    }
    if (a.idle_timeout_ms > 0 && elapsed_ms(last_activity) >= a.idle_timeout_ms) {
      return kExitOk;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(a.poll_ms));
  }
}

int run_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  const bool watch = !a.watch_dir.empty();
  if (watch == (!a.rgb.empty() || !a.depth.empty())) {
    throw CliError(kExitBadArgs, "give either --rgb and --depth, or --watch");
  }
  if (!watch && (a.rgb.empty() || a.depth.empty())) {
    throw CliError(kExitBadArgs, "--rgb and --depth are both required");
  }
  if (a.max_frames < 0 || a.poll_ms < 1 || a.idle_timeout_ms < 0 ||
      !(a.axis_length > 0)) {
    throw CliError(kExitBadArgs, "invalid watch or overlay settings");
  }
  const PoseConfig cfg = a.match.pose_config();
  const CameraConfig camera = load_camera(a.intrinsics);
  const std::vector<ObjectBundle> bundles = load_bundles(a.bundles);
  const SegmentTestBrief detector = a.match.detector(bundles.front().detector_params);

  if (watch) return run_watch(a, bundles, camera, detector, cfg, out, err);

  const Frame frame = load_frame(a.rgb, a.depth, camera.intrinsics);
  const auto results = detect_all(bundles, frame, detector, cfg, &err);
  emit_records(bundles, results, camera, std::nullopt, out);
  if (!a.overlay.empty()) write_overlay(a.overlay, frame, results, a.axis_length);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-sweep

/// "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_angles(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw CliError(kExitBadArgs, "bad angle '" + s + "'");
    }
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw CliError(kExitBadArgs, "angle range needs start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0)) throw CliError(kExitBadArgs, "angle step must be positive");
    for (int i = 0;; ++i) {
      const double v = start + i * step;
      if (v > stop + 1e-9 * step) break;
      out.push_back(v);
    }
    return out;
  }
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) {
    p.erase(0, p.find_first_not_of(" \t"));
    p.erase(p.find_last_not_of(" \t") + 1);
    if (!p.empty()) out.push_back(number(p));
  }
  return out;
}

struct SweepArgs {
  std::string bundle;
  std::string angles = "0:45:5";
  int trials = 1;
  double distance = 0.0;  ///< 0: native_distance
  double jitter = 0.02;
  double pixel_noise = 0.0;
  double depth_noise = 0.0;
  double hole_rate = 0.0;
  std::string intrinsics;
  std::string out_path;
  MatchOptions match;
};

int run_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  SweepConfig cfg;
  cfg.angles_deg = parse_angles(a.angles);
  if (cfg.angles_deg.empty()) throw CliError(kExitBadArgs, "empty angle list");
  if (a.trials < 1 || !(a.distance >= 0) || !(a.jitter >= 0) ||
      !(a.pixel_noise >= 0) || !(a.depth_noise >= 0) ||
      !(a.hole_rate >= 0 && a.hole_rate <= 1)) {
    throw CliError(kExitBadArgs, "invalid sweep settings");
  }
  cfg.trials = a.trials;
  cfg.distance_m = a.distance;
  cfg.position_jitter_m = a.jitter;
  cfg.noise.pixel_noise_sigma = a.pixel_noise;
  cfg.noise.depth_noise_mm = a.depth_noise;
  cfg.noise.hole_rate = a.hole_rate;
  cfg.seed = a.match.seed;
  cfg.pose = a.match.pose_config();
  if (!a.intrinsics.empty()) cfg.intrinsics = load_camera(a.intrinsics).intrinsics;

  const std::vector<ObjectBundle> bundles = load_bundles({a.bundle});
  const SegmentTestBrief detector = a.match.detector(bundles.front().detector_params);
  if (a.distance == 0) {
    cfg.distance_m = native_distance(bundles.front().object, cfg.intrinsics);
  }
  const auto rows = guarded(kExitBadArgs, [&] {
    return sweep_out_of_plane(bundles.front().object, detector, cfg);
  });
  const std::string csv = sweep_to_csv(rows);
  const auto max_angle = max_out_of_plane(rows);
  const std::string summary =
      "max_out_of_plane_deg " +
      (max_angle ? format("%.6g", *max_angle) : std::string("none")) + "\n";

  if (a.out_path.empty()) {
    out << csv;
    err << summary;
  } else {
    std::ofstream os(a.out_path, std::ios::binary);
    if (!os || !(os << csv)) throw CliError(kExitIo, "cannot write " + a.out_path);
    out << summary;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::vector<std::string> bundles;
  std::string rgb;
  std::string depth;
  std::string intrinsics;
  int repetitions = 10;
  MatchOptions match;
};

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& /*err*/) {
  if (a.repetitions < 1) throw CliError(kExitBadArgs, "--repetitions must be >= 1");
  const PoseConfig cfg = a.match.pose_config();
  const CameraConfig camera = load_camera(a.intrinsics);
  const std::vector<ObjectBundle> all = load_bundles(a.bundles);
  const SegmentTestBrief detector = a.match.detector(all.front().detector_params);
  const Frame frame = load_frame(a.rgb, a.depth, camera.intrinsics);

  const std::size_t n = all.size();
  std::vector<std::vector<ObjectBundle>> prefixes(n);
  for (std::size_t k = 0; k < n; ++k) {
    prefixes[k].assign(all.begin(), all.begin() + static_cast<long>(k) + 1);
  }
  detect_all(all, frame, detector, cfg, nullptr);  // warm-up

  // Object counts are interleaved within each repetition so slow drift of
  // the host affects every count alike.
  std::vector<std::vector<double>> samples(n);
  for (int rep = 0; rep < a.repetitions; ++rep) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      detect_all(prefixes[k], frame, detector, cfg, nullptr);
      samples[k].push_back(elapsed_ms(t0));
    }
  }

  std::vector<double> xs, medians;
  out << "objects,median_ms\n";
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double>& s = samples[k];
    std::sort(s.begin(), s.end());
    const std::size_t m = s.size();
    const double med = m % 2 ? s[m / 2] : 0.5 * (s[m / 2 - 1] + s[m / 2]);
    xs.push_back(static_cast<double>(k + 1));
    medians.push_back(med);
    out << k + 1 << "," << format("%.3f", med) << "\n";
  }

  if (n < 2) {
    out << "slope_ms n/a\nr2 n/a\n";
    return kExitOk;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(medians.begin(), medians.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (medians[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (medians[i] - my) * (medians[i] - my);
  }
  const double slope = sxy / sxx;
  out << "slope_ms " << format("%.4f", slope) << "\n";
  out << "intercept_ms " << format("%.4f", my - slope * mx) << "\n";
  if (syy > 0) {
    out << "r2 " << format("%.6f", sxy * sxy / (sxx * syy)) << "\n";
  } else {
    out << "r2 n/a\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// grasp-train / grasp-adapt

/// A pose source is either a 4x4 transform or `detect` output; for the
/// latter the record for `object_id` is used.
RigidTransform load_object_pose(const std::string& path,
                                const std::string& object_id, std::istream& in) {
  const std::string text = read_source(path, in);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto records = guarded(kExitBadArgs, [&] { return parse_records(text); });
    bool seen = false;
    for (const PoseRecord& r : records) {
      if (r.object_id != object_id) continue;
      seen = true;
      if (r.present) return guarded(kExitBadArgs, [&] { return record_transform(r); });
    }
    throw CliError(kExitNotFound, seen ? "object " + object_id + " not present in pose records"
                                       : "no pose record for object " + object_id);
  }
  return guarded(kExitBadArgs, [&] { return transform_from_text(text); });
}

GraspLibrary load_library(const std::string& path) {
  return guarded(kExitIo, [&] { return GraspLibrary::load(path); });
}

struct GraspTrainArgs {
  std::string object_pose;
  std::string gripper;
  std::string library;
  std::string object_id;
  std::string grasp_id;
  bool force = false;
};

int run_grasp_train(const GraspTrainArgs& a, std::istream& in, std::ostream& out,
                    std::ostream& err) {
  if (a.object_pose == "-" && a.gripper == "-") {
    throw CliError(kExitBadArgs, "only one input can come from standard input");
  }
  const RigidTransform base_to_object = load_object_pose(a.object_pose, a.object_id, in);
  const RigidTransform base_to_gripper = guarded(
      kExitBadArgs, [&] { return transform_from_text(read_source(a.gripper, in)); });
  GraspLibrary library = load_library(a.library);
  const CanonicalGrasp grasp =
      train_grasp(base_to_object, base_to_gripper, a.object_id, a.grasp_id);
  try {
    library.add(grasp, a.force);
  } catch (const DuplicateGrasp& e) {
    err << e.what() << " (use --force to replace)\n";
    return kExitDuplicate;
  }
  guarded(kExitIo, [&] { library.save(a.library); });
  out << to_text(grasp.object_to_gripper);
  return kExitOk;
}

struct GraspAdaptArgs {
  std::string library;
  std::string object_id;
  std::string grasp_id;
  std::string object_pose;
};

int run_grasp_adapt(const GraspAdaptArgs& a, std::istream& in, std::ostream& out,
                    std::ostream& err) {
  const GraspLibrary library = load_library(a.library);
  const auto grasp = library.find(a.object_id, a.grasp_id);
  if (!grasp) {
    err << "unknown grasp " << a.object_id << "/" << a.grasp_id << "\n";
    return kExitNotFound;
  }
  const RigidTransform base_to_object = load_object_pose(a.object_pose, a.object_id, in);
  const RigidTransform target = adapt_grasp(base_to_object, *grasp);
  const RollPitchYaw rpy = grasp_orientation(target);
  out << to_text(target);
  out << "rpy " << format("%.17g", rpy.gamma + 0.0) << " " << format("%.17g", rpy.beta + 0.0)
      << " " << format("%.17g", rpy.alpha + 0.0) << (rpy.degenerate ? " degenerate" : "")
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// make-card / render (synthetic data for the other commands)

struct CardArgs {
  int width = 240;
  int height = 180;
  std::uint64_t seed = 1;
  std::string out_path;
};

int run_make_card(const CardArgs& a, std::ostream& out) {
  if (a.width < 16 || a.height < 16) throw CliError(kExitBadArgs, "card too small");
  guarded(kExitIo, [&] { write_ppm(a.out_path, make_test_card(a.width, a.height, a.seed)); });
  out << a.out_path << "\n";
  return kExitOk;
}

struct RenderArgs {
  std::vector<std::string> bundles;
  std::string out_dir;
  std::string intrinsics;
  double distance = 0.0;  ///< 0: native_distance of the first bundle
  double angle = 0.0;
  double in_plane = 0.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  double gap = 0.02;
  double pixel_noise = 0.0;
  double depth_noise = 0.0;
  double hole_rate = 0.0;
  std::uint64_t seed = 0;
};

int run_render(const RenderArgs& a, std::ostream& out) {
  if (!(a.distance >= 0) || !(a.gap >= 0) || !(a.pixel_noise >= 0) ||
      !(a.depth_noise >= 0) || !(a.hole_rate >= 0 && a.hole_rate <= 1) ||
      !(std::abs(a.angle) < 90)) {
    throw CliError(kExitBadArgs, "invalid render settings");
  }
  const std::vector<ObjectBundle> bundles = load_bundles(a.bundles);
  CameraConfig camera;
  camera.intrinsics = default_intrinsics();
  if (!a.intrinsics.empty()) camera = load_camera(a.intrinsics);
  const double distance = a.distance > 0
                              ? a.distance
                              : native_distance(bundles.front().object, camera.intrinsics);

  // Objects sit on a grid of equal cells centred on the optical axis.
  const std::size_t n = bundles.size();
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = static_cast<int>((n + cols - 1) / cols);
  const RenderOptions options;
  double cell_w = 0, cell_h = 0;
  for (const ObjectBundle& b : bundles) {
    const Vec2 mpp = meters_per_pixel(b.object);
    cell_w = std::max(cell_w, mpp.x() * (b.object.width_px + 2 * options.margin_px));
    cell_h = std::max(cell_h, mpp.y() * (b.object.height_px + 2 * options.margin_px));
  }
  cell_w += a.gap;
  cell_h += a.gap;

  std::vector<SceneObject> scene;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = static_cast<int>(i) / cols, c = static_cast<int>(i) % cols;
    const double ox = a.offset_x + (c - 0.5 * (cols - 1)) * cell_w;
    const double oy = a.offset_y + (r - 0.5 * (rows - 1)) * cell_h;
    scene.push_back({&bundles[i].object,
                     make_scene_pose(distance, a.angle, a.in_plane, ox, oy)});
  }
  NoiseConfig noise;
  noise.pixel_noise_sigma = a.pixel_noise;
  noise.depth_noise_mm = a.depth_noise;
  noise.hole_rate = a.hole_rate;
  noise.seed = a.seed;
  const SceneRender frame = guarded(kExitBadArgs, [&] {
    return render_scene(scene, camera.intrinsics, noise, options);
  });

  const fs::path dir(a.out_dir);
  guarded(kExitIo, [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    write_ppm(dir / "rgb.ppm", frame.color);
    save_depth(dir / "depth.pgm", frame.depth);
    save_camera_config(dir / "intrinsics.json", camera);
    for (std::size_t i = 0; i < n; ++i) {
      std::ofstream os(dir / ("truth_" + bundles[i].object.id + ".txt"));
      os << to_text(frame.ground_truth[i].camera_from_object);
      if (!os) throw IoError("cannot write ground truth");
    }
  });
  out << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in,
            std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar object pose estimation and grasp adaptation", "planegrasp"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "extract features from a texture into a bundle");
  c_train->add_option("image", train.image, "PPM or PGM texture")->required();
  c_train->add_option("-o,--out", train.out_dir, "bundle directory")->required();
  c_train->add_option("--id", train.id, "object id (default: image stem)");
  c_train->add_option("--fast-threshold", train.params.threshold, "corner contrast threshold")
      ->capture_default_str();
  c_train->add_option("--nonmax-radius", train.params.nonmax_radius)->capture_default_str();
  c_train->add_option("--max-keypoints", train.params.max_keypoints)->capture_default_str();
  c_train->add_option("--width-m", train.width_m, "physical width in meters");
  c_train->add_option("--height-m", train.height_m, "physical height in meters");

  DetectArgs detect;
  auto* c_detect = app.add_subcommand("detect", "estimate object poses in an RGB-D frame");
  c_detect->add_option("bundles", detect.bundles, "object bundles")->required();
  c_detect->add_option("--rgb", detect.rgb, "color frame (PPM)");
  c_detect->add_option("--depth", detect.depth, "depth frame (16-bit PGM, mm)");
  c_detect->add_option("--intrinsics", detect.intrinsics, "camera JSON")->required();
  c_detect->add_option("--overlay", detect.overlay, "write axes visualization");
  c_detect->add_option("--axis-length", detect.axis_length, "overlay axis length (m)")
      ->capture_default_str();
  c_detect->add_option("--watch", detect.watch_dir,
                       "process <stem>.ppm + <stem>.depth.pgm as they appear");
  c_detect->add_option("--max-frames", detect.max_frames, "stop after N frames (0: never)");
  c_detect->add_option("--poll-ms", detect.poll_ms)->capture_default_str();
  c_detect->add_option("--idle-timeout-ms", detect.idle_timeout_ms,
                       "stop after this long without a new frame (0: never)");
  detect.match.add_to(*c_detect);

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("eval-sweep", "out-of-plane rotation sweep on synthetic renders");
  c_sweep->add_option("bundle", sweep.bundle)->required();
  c_sweep->add_option("--angles", sweep.angles, "start:stop:step or a comma list (degrees)")
      ->capture_default_str();
  c_sweep->add_option("--trials", sweep.trials)->capture_default_str();
  c_sweep->add_option("--distance", sweep.distance, "meters (default: native texture scale)");
  c_sweep->add_option("--jitter", sweep.jitter, "lateral offset bound (m)")->capture_default_str();
  c_sweep->add_option("--pixel-noise", sweep.pixel_noise, "intensity sigma");
  c_sweep->add_option("--depth-noise", sweep.depth_noise, "depth sigma (mm)");
  c_sweep->add_option("--hole-rate", sweep.hole_rate);
  c_sweep->add_option("--intrinsics", sweep.intrinsics);
  c_sweep->add_option("-o,--out", sweep.out_path, "CSV path (default: standard output)");
  sweep.match.add_to(*c_sweep);

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "detection time against object count");
  c_bench->add_option("bundles", bench.bundles)->required();
  c_bench->add_option("--rgb", bench.rgb)->required();
  c_bench->add_option("--depth", bench.depth)->required();
  c_bench->add_option("--intrinsics", bench.intrinsics)->required();
  c_bench->add_option("--repetitions", bench.repetitions)->capture_default_str();
  bench.match.add_to(*c_bench);

  GraspTrainArgs gtrain;
  auto* c_gtrain = app.add_subcommand("grasp-train", "record a canonical grasp");
  c_gtrain->add_option("--object-pose", gtrain.object_pose,
                       "4x4 transform or detect output ('-': stdin)")
      ->required();
  c_gtrain->add_option("--gripper", gtrain.gripper, "base->gripper 4x4 transform")->required();
  c_gtrain->add_option("--library", gtrain.library)->required();
  c_gtrain->add_option("--object-id", gtrain.object_id)->required();
  c_gtrain->add_option("--grasp-id", gtrain.grasp_id)->required();
  c_gtrain->add_flag("--force", gtrain.force, "replace an existing grasp");

  GraspAdaptArgs gadapt;
  auto* c_gadapt = app.add_subcommand("grasp-adapt", "gripper target for a new object pose");
  c_gadapt->add_option("--library", gadapt.library)->required();
  c_gadapt->add_option("--object-id", gadapt.object_id)->required();
  c_gadapt->add_option("--grasp-id", gadapt.grasp_id)->required();
  c_gadapt->add_option("--object-pose", gadapt.object_pose,
                       "4x4 transform or detect output ('-': stdin)")
      ->required();

  CardArgs card;
  auto* c_card = app.add_subcommand("make-card", "write a seeded high-texture test card");
  c_card->add_option("-o,--out", card.out_path)->required();
  c_card->add_option("--width", card.width)->capture_default_str();
  c_card->add_option("--height", card.height)->capture_default_str();
  c_card->add_option("--seed", card.seed)->capture_default_str();

  RenderArgs render;
  auto* c_render = app.add_subcommand("render", "render bundles into a synthetic RGB-D frame");
  c_render->add_option("bundles", render.bundles)->required();
  c_render->add_option("-o,--out-dir", render.out_dir)->required();
  c_render->add_option("--intrinsics", render.intrinsics);
  c_render->add_option("--distance", render.distance, "meters (default: native texture scale)");
  c_render->add_option("--angle", render.angle, "out-of-plane tilt (degrees)");
  c_render->add_option("--in-plane", render.in_plane, "in-plane rotation (degrees)");
  c_render->add_option("--offset-x", render.offset_x);
  c_render->add_option("--offset-y", render.offset_y);
  c_render->add_option("--gap", render.gap, "spacing between objects (m)")->capture_default_str();
  c_render->add_option("--pixel-noise", render.pixel_noise);
  c_render->add_option("--depth-noise", render.depth_noise);
  c_render->add_option("--hole-rate", render.hole_rate);
  c_render->add_option("--seed", render.seed);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("planegrasp");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadArgs;
  }

  try {
    if (*c_train) return run_train(train, out, err);
    if (*c_detect) return run_detect(detect, out, err);
    if (*c_sweep) return run_sweep(sweep, out, err);
    if (*c_bench) return run_bench(bench, out, err);
    if (*c_gtrain) return run_grasp_train(gtrain, in, out, err);
    if (*c_gadapt) return run_grasp_adapt(gadapt, in, out, err);
    if (*c_card) return run_make_card(card, out);
    if (*c_render) return run_render(render, out);
  } catch (const CliError& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitBadArgs;
}

}  // namespace planegrasp::cli
