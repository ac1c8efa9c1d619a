#include "planegrasp/cli/commands.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "planegrasp/cli/bundle.hpp"
#include "planegrasp/cli/records.hpp"
#include "planegrasp/grasp.hpp"
#include "planegrasp/image.hpp"
#include "planegrasp/pose.hpp"
#include "planegrasp/synth.hpp"

namespace planegrasp::cli {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string tmpl = (fs::temp_directory_path() / "planegrasp_cli_XXXXXX").string();
    ASSERT_NE(mkdtemp(tmpl.data()), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Card texture plus its bundle; returns the bundle path.
  std::string train_card(const std::string& id, int seed, int w = 240, int h = 180) {
    const std::string img = path(id + ".pgm");
    EXPECT_EQ(run({"make-card", "-o", img, "--width", std::to_string(w), "--height",
                   std::to_string(h), "--seed", std::to_string(seed)})
                  .code,
              kExitOk);
    const std::string bundle = path(id);
    const CliRun r = run({"train", img, "-o", bundle, "--id", id});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return bundle;
  }

  fs::path dir_;
};

TEST_F(CliTest, TrainReportsKeypointsAndWritesBundle) {
  const std::string img = path("card.pgm");
  ASSERT_EQ(run({"make-card", "-o", img}).code, kExitOk);
  const CliRun r = run({"train", img, "-o", path("card"), "--id", "card"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  ASSERT_EQ(r.out.rfind("keypoints ", 0), 0u);
  EXPECT_GE(std::stoi(r.out.substr(10)), 100);
  const ObjectBundle b = load_bundle(path("card"));
  EXPECT_EQ(b.object.id, "card");
  EXPECT_EQ(b.object.width_px, 240);
  EXPECT_EQ(static_cast<int>(b.object.features.size()), std::stoi(r.out.substr(10)));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"train", path("missing.pgm"), "-o", path("x")}).code, kExitIo);
  write_pgm(path("flat.pgm"), GrayImage(64, 64, 128));
  EXPECT_EQ(run({"train", path("flat.pgm"), "-o", path("flat")}).code, kExitUntrainable);
  EXPECT_EQ(run({"no-such-command"}).code, kExitBadArgs);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  const std::string bundle = train_card("card", 1);
  EXPECT_EQ(run({"eval-sweep", bundle, "--angles", ""}).code, kExitBadArgs);
  EXPECT_EQ(run({"eval-sweep", bundle, "--angles", "0", "--ratio", "1.5"}).code, kExitBadArgs);
  EXPECT_EQ(run({"eval-sweep", bundle, "--angles", "0", "--min-matches", "3"}).code,
            kExitBadArgs);
  EXPECT_EQ(run({"eval-sweep", path("nope"), "--angles", "0"}).code, kExitIo);
}

TEST_F(CliTest, RenderThenDetectMatchesTruth) {
  const std::string bundle = train_card("card", 1);
  const CliRun rr = run({"render", bundle, "-o", path("scene"), "--angle", "10"});
  ASSERT_EQ(rr.code, kExitOk) << rr.err;
  const CliRun d = run({"detect", bundle, "--rgb", path("scene/rgb.ppm"), "--depth",
                     path("scene/depth.pgm"), "--intrinsics", path("scene/intrinsics.json"),
                     "--overlay", path("overlay.ppm")});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  const std::vector<PoseRecord> recs = parse_records(d.out);
  ASSERT_EQ(recs.size(), 1u);
  ASSERT_TRUE(recs[0].present);
  EXPECT_EQ(recs[0].object_id, "card");
  EXPECT_EQ(recs[0].reference_frame, "camera");
  const RigidTransform truth = transform_from_text(slurp(path("scene/truth_card.txt")));
  EXPECT_LT((recs[0].position - truth.translation()).norm(), 0.01);
  EXPECT_LT(rotation_angle_between(RotationMatrix::repaired(recs[0].frame), truth.rotation()),
            3.0 * std::numbers::pi / 180);
  EXPECT_NE(d.err.find("timing extract"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("overlay.ppm")));
}

TEST_F(CliTest, DetectAgreesWithLibrary) {
  const std::string bundle = train_card("card", 1);
  ASSERT_EQ(run({"render", bundle, "-o", path("scene"), "--angle", "15", "--pixel-noise", "1",
                 "--seed", "4"})
                .code,
            kExitOk);
  const CliRun d = run({"detect", bundle, "--rgb", path("scene/rgb.ppm"), "--depth",
                     path("scene/depth.pgm"), "--intrinsics", path("scene/intrinsics.json")});
  ASSERT_EQ(d.code, kExitOk);
  const PoseRecord rec = parse_records(d.out).at(0);

  const ObjectBundle b = load_bundle(bundle);
  const CameraConfig cam = load_camera_config(path("scene/intrinsics.json"));
  const DepthFrame depth = load_depth(path("scene/depth.pgm"), cam.intrinsics);
  const GrayImage gray = to_gray(read_ppm(path("scene/rgb.ppm")));
  const PoseResult res = estimate_pose(b.object, gray, depth, SegmentTestBrief(b.detector_params),
                                       PoseConfig{});
  ASSERT_TRUE(res.present());
  EXPECT_EQ(rec.num_matches, res.pose->num_matches);
  EXPECT_EQ(rec.num_inliers, res.pose->num_inliers);
  // JSON carries 17 significant digits.
  EXPECT_LT((rec.position - res.pose->position).norm(), 1e-12);
  EXPECT_LT((rec.frame - res.pose->frame.matrix()).norm(), 1e-12);
}

TEST_F(CliTest, AbsentObjectStillReported) {
  const std::string a = train_card("a", 1);
  const std::string b = train_card("b", 77);
  ASSERT_EQ(run({"render", a, "-o", path("scene")}).code, kExitOk);
  const CliRun d = run({"detect", a, b, "--rgb", path("scene/rgb.ppm"), "--depth",
                     path("scene/depth.pgm"), "--intrinsics", path("scene/intrinsics.json")});
  ASSERT_EQ(d.code, kExitOk);
  const auto recs = parse_records(d.out);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_TRUE(recs[0].present);
  EXPECT_FALSE(recs[1].present);
  EXPECT_EQ(recs[1].object_id, "b");
  EXPECT_NE(d.out.find("\"reason\":\"insufficient_matches\""), std::string::npos);
}

TEST_F(CliTest, SixObjectsSixRecords) {
  std::vector<std::string> args{"render"};
  std::vector<std::string> bundles;
  for (int i = 0; i < 6; ++i) bundles.push_back(train_card("o" + std::to_string(i), 10 + i, 160, 120));
  args.insert(args.end(), bundles.begin(), bundles.end());
  args.insert(args.end(), {"-o", path("scene")});
  ASSERT_EQ(run(args).code, kExitOk);
  std::vector<std::string> det{"detect"};
  det.insert(det.end(), bundles.begin(), bundles.end());
  det.insert(det.end(), {"--rgb", path("scene/rgb.ppm"), "--depth", path("scene/depth.pgm"),
                         "--intrinsics", path("scene/intrinsics.json")});
  const CliRun d = run(det);
  ASSERT_EQ(d.code, kExitOk) << d.err;
  const auto recs = parse_records(d.out);
  ASSERT_EQ(recs.size(), 6u);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(recs[i].object_id, "o" + std::to_string(i));
    EXPECT_TRUE(recs[i].present) << i;
  }
}

TEST_F(CliTest, WatchProcessesFramesInNameOrder) {
  const std::string bundle = train_card("card", 1);
  ASSERT_EQ(run({"render", bundle, "-o", path("scene")}).code, kExitOk);
  fs::create_directories(path("watch"));
  for (const std::string stem : {"f002", "f001"}) {
    fs::copy_file(path("scene/rgb.ppm"), path("watch/" + stem + ".ppm"));
    fs::copy_file(path("scene/depth.pgm"), path("watch/" + stem + ".depth.pgm"));
  }
  std::ofstream(path("watch/f003.ppm")) << "P6 garbage";
  std::ofstream(path("watch/f003.depth.pgm")) << "P5 garbage";
  fs::copy_file(path("scene/rgb.ppm"), path("watch/f004.ppm"));  // no depth: ignored

  const CliRun r = run({"detect", bundle, "--watch", path("watch"), "--intrinsics",
                        path("scene/intrinsics.json"), "--poll-ms", "5", "--idle-timeout-ms",
                        "100", "--overlay", path("overlays")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto recs = parse_records(r.out);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].frame_name, "f001");
  EXPECT_EQ(recs[1].frame_name, "f002");
  EXPECT_TRUE(recs[0].present && recs[1].present);
  EXPECT_NE(r.err.find("skipping frame f003"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("overlays/f001.overlay.ppm")));
  EXPECT_EQ(run({"detect", bundle, "--watch", path("watch"), "--rgb", path("scene/rgb.ppm"),
                 "--intrinsics", path("scene/intrinsics.json")})
                .code,
            kExitBadArgs);
}

TEST_F(CliTest, SweepCsvIsDeterministic) {
  const std::string bundle = train_card("card", 1);
  const std::vector<std::string> args{"eval-sweep", bundle, "--angles", "0:45:5", "--trials", "2",
                                      "--pixel-noise", "0.5", "--seed", "3"};
  const CliRun a = run(args);
  const CliRun b = run(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 11);
  EXPECT_NE(a.err.find("max_out_of_plane_deg"), std::string::npos);

  const CliRun f = run({"eval-sweep", bundle, "--angles", "0,10", "-o", path("s.csv")});
  ASSERT_EQ(f.code, kExitOk);
  EXPECT_EQ(f.out.rfind("max_out_of_plane_deg 10", 0), 0u);
  const std::string csv = slurp(path("s.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(CliTest, BenchSingleObjectHasNoSlope) {
  const std::string bundle = train_card("card", 1);
  ASSERT_EQ(run({"render", bundle, "-o", path("scene")}).code, kExitOk);
  const std::vector<std::string> base{"bench", bundle, "--rgb", path("scene/rgb.ppm"), "--depth",
                                      path("scene/depth.pgm"), "--intrinsics",
                                      path("scene/intrinsics.json")};
  std::vector<std::string> args = base;
  args.insert(args.end(), {"--repetitions", "2"});
  const CliRun r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("objects,median_ms\n1,", 0), 0u);
  EXPECT_NE(r.out.find("slope_ms n/a"), std::string::npos);
  EXPECT_NE(r.out.find("r2 n/a"), std::string::npos);
  args = base;
  args.insert(args.end(), {"--repetitions", "0"});
  EXPECT_EQ(run(args).code, kExitBadArgs);
}

TEST_F(CliTest, GraspTrainAndAdaptRoundTrip) {
  const RigidTransform object_pose(rot_from_euler({0.3, -0.2, 1.1}), Vec3(0.4, -0.1, 0.7));
  const RigidTransform gripper(rot_from_euler({3.0, 0.1, -0.4}), Vec3(0.45, -0.05, 0.6));
  std::ofstream(path("obj.txt")) << to_text(object_pose);
  std::ofstream(path("grip.txt")) << to_text(gripper);
  const std::vector<std::string> train{"grasp-train", "--object-pose", path("obj.txt"), "--gripper",
                                       path("grip.txt"), "--library", path("lib.json"),
                                       "--object-id", "card", "--grasp-id", "top"};
  const CliRun t = run(train);
  ASSERT_EQ(t.code, kExitOk) << t.err;
  EXPECT_EQ(run(train).code, kExitDuplicate);
  std::vector<std::string> forced = train;
  forced.push_back("--force");
  EXPECT_EQ(run(forced).code, kExitOk);

  // Same object pose: the adapted grasp is the taught gripper pose.
  const CliRun a = run({"grasp-adapt", "--library", path("lib.json"), "--object-id", "card",
                     "--grasp-id", "top", "--object-pose", path("obj.txt")});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const std::string matrix_text = a.out.substr(0, a.out.find("rpy"));
  const RigidTransform adapted = transform_from_text(matrix_text);
  EXPECT_LT((adapted.matrix() - gripper.matrix()).norm(), 1e-12);
  EXPECT_NE(a.out.find("rpy "), std::string::npos);

  EXPECT_EQ(run({"grasp-adapt", "--library", path("lib.json"), "--object-id", "card",
                 "--grasp-id", "side", "--object-pose", path("obj.txt")})
                .code,
            kExitNotFound);
  std::ofstream(path("bad.txt")) << "1 2 3";
  EXPECT_EQ(run({"grasp-adapt", "--library", path("lib.json"), "--object-id", "card",
                 "--grasp-id", "top", "--object-pose", path("bad.txt")})
                .code,
            kExitBadArgs);
}

TEST_F(CliTest, GraspAdaptReadsDetectOutputFromStdin) {
  const std::string bundle = train_card("card", 1);
  ASSERT_EQ(run({"render", bundle, "-o", path("scene"), "--angle", "5"}).code, kExitOk);
  const CliRun d = run({"detect", bundle, "--rgb", path("scene/rgb.ppm"), "--depth",
                     path("scene/depth.pgm"), "--intrinsics", path("scene/intrinsics.json")});
  ASSERT_EQ(d.code, kExitOk);
  const RigidTransform detected = record_transform(parse_records(d.out).at(0));

  const RigidTransform gripper(rot_x(std::numbers::pi), Vec3(0.0, 0.0, 0.9));
  std::ofstream(path("grip.txt")) << to_text(gripper);
  ASSERT_EQ(run({"grasp-train", "--object-pose", "-", "--gripper", path("grip.txt"), "--library",
                 path("lib.json"), "--object-id", "card", "--grasp-id", "g"},
                d.out)
                .code,
            kExitOk);
  const GraspLibrary lib = GraspLibrary::load(path("lib.json"));
  const std::optional<CanonicalGrasp> g = lib.find("card", "g");
  ASSERT_TRUE(g);
  const RigidTransform expected = compose(invert(detected), gripper);
  EXPECT_LT((g->object_to_gripper.matrix() - expected.matrix()).norm(), 1e-12);
}

}  // namespace
}  // namespace planegrasp::cli
