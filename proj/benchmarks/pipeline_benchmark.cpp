#include <benchmark/benchmark.h>

#include <vector>

#include "planegrasp/features.hpp"
#include "planegrasp/homography.hpp"
#include "planegrasp/pose.hpp"
#include "planegrasp/random.hpp"
#include "planegrasp/synth.hpp"

namespace planegrasp {
namespace {

struct Frame {
  GrayImage gray;
  DepthFrame depth;
};

const ReferenceObject& card() {
  static const ReferenceObject obj = make_test_object("card", 240, 180, 1, SegmentTestBrief());
  return obj;
}

const Frame& frame() {
  static const Frame f = [] {
    NoiseConfig noise;
    noise.pixel_noise_sigma = 0.5;
    const RenderResult r = render(make_scene_pose(1.0, 15.0), card(), default_intrinsics(), noise);
    return Frame{to_gray(r.color), r.depth};
  }();
  return f;
}

void BM_DetectCorners(benchmark::State& state) {
  const SegmentTestBriefParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        detect_corners(frame().gray, p.threshold, p.nonmax_radius, p.max_keypoints));
  }
}
BENCHMARK(BM_DetectCorners)->Unit(benchmark::kMillisecond);

void BM_Describe(benchmark::State& state) {
  const SegmentTestBriefParams p;
  const auto corners = detect_corners(frame().gray, p.threshold, p.nonmax_radius, p.max_keypoints);
  for (auto _ : state) benchmark::DoNotOptimize(describe_binary(frame().gray, corners));
  state.counters["keypoints"] = static_cast<double>(corners.size());
}
BENCHMARK(BM_Describe)->Unit(benchmark::kMillisecond);

void BM_MatchRatio(benchmark::State& state) {
  const FeatureSet scene = SegmentTestBrief().extract(frame().gray);
  for (auto _ : state) {
    benchmark::DoNotOptimize(match_ratio(card().features.descriptors, scene.descriptors));
  }
}
BENCHMARK(BM_MatchRatio)->Unit(benchmark::kMicrosecond);

void BM_Ransac(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  Eigen::Matrix3d truth;
  truth << 0.9, 0.1, 20, -0.05, 1.1, -10, 1e-4, -5e-5, 1;
  std::vector<Correspondence> set;
  for (int i = 0; i < n; ++i) {
    const Vec2 p{rng.uniform(0, 640), rng.uniform(0, 480)};
    if (i % 10 < 6) {
      const Vec2 q = (truth * p.homogeneous()).hnormalized();
      set.push_back({p, q});
    } else {
      set.push_back({p, Vec2{rng.uniform(0, 640), rng.uniform(0, 480)}});
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(estimate_ransac(set, RansacConfig{}));
}
BENCHMARK(BM_Ransac)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

// Detection time against the number of reference objects in one frame.
void BM_EstimatePoses(benchmark::State& state) {
  static const std::vector<ReferenceObject> objects = [] {
    std::vector<ReferenceObject> v{card()};
    for (int i = 1; i < 8; ++i) {
      v.push_back(make_test_object("card" + std::to_string(i), 240, 180, 100 + i, SegmentTestBrief()));
    }
    return v;
  }();
  std::vector<const ReferenceObject*> ptrs;
  for (int i = 0; i < state.range(0); ++i) ptrs.push_back(&objects[i]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimate_poses(ptrs, frame().gray, frame().depth, SegmentTestBrief(), PoseConfig{}));
  }
}
BENCHMARK(BM_EstimatePoses)->DenseRange(1, 8)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace planegrasp

BENCHMARK_MAIN();
