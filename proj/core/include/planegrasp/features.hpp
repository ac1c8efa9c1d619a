#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "planegrasp/image.hpp"

namespace planegrasp {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// 256-bit string of pairwise intensity comparisons. Bit b lives in
/// words[b / 64] at position b % 64.
struct BinaryDescriptor {
  static constexpr int kBits = 256;
  static constexpr int kBytes = kBits / 8;

  std::array<std::uint64_t, 4> words{};

  bool bit(int b) const { return (words[b >> 6] >> (b & 63)) & 1u; }
  void set_bit(int b) { words[b >> 6] |= std::uint64_t{1} << (b & 63); }

  friend bool operator==(const BinaryDescriptor&,
                         const BinaryDescriptor&) = default;
};

inline int hamming_distance(const BinaryDescriptor& a,
                            const BinaryDescriptor& b) {
  int d = 0;
  for (int i = 0; i < 4; ++i) d += std::popcount(a.words[i] ^ b.words[i]);
  return d;
}

struct Match {
  int query_index = 0;
  int train_index = 0;
  double distance = 0.0;
  friend bool operator==(const Match&, const Match&) = default;
};

/// Keypoints with one descriptor each (parallel arrays).
struct FeatureSet {
  std::vector<Keypoint> keypoints;
  std::vector<BinaryDescriptor> descriptors;

  std::size_t size() const { return keypoints.size(); }
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// Default nearest/second-nearest ratio.
inline constexpr double kDefaultMatchRatio = 0.7;
/// Acceptance cap (bits) when the train set has a single descriptor and the
/// ratio test is undefined.
inline constexpr double kSingleTrainDistanceCap = 64.0;
/// Minimum number of matches for an object to be considered present.
inline constexpr int kMinMatches = 10;
inline constexpr int kDefaultMaxKeypoints = 1000;

/// Pluggable detector + descriptor + matcher.
class DetectorDescriptor {
 public:
  virtual ~DetectorDescriptor() = default;

  /// Stable identifier stored with trained objects; descriptors produced by
  /// different ids are not comparable.
  virtual std::string id() const = 0;
  virtual std::vector<Keypoint> detect(const GrayImage& image) const = 0;
  /// At most one descriptor per keypoint; keypoints whose sampling support
  /// leaves the image are dropped.
  virtual FeatureSet describe(const GrayImage& image,
                              std::span<const Keypoint> keypoints) const = 0;
  virtual std::vector<Match> match(const FeatureSet& query,
                                   const FeatureSet& train) const = 0;

  FeatureSet extract(const GrayImage& image) const {
    const auto kps = detect(image);
    return describe(image, kps);
  }
};

struct SegmentTestBriefParams {
  int threshold = 20;
  int nonmax_radius = 3;
  int max_keypoints = kDefaultMaxKeypoints;
  double ratio = kDefaultMatchRatio;
};

/// Built-in pair: 9-of-16 segment-test corners with a 256-bit
/// smoothed-intensity comparison descriptor.
class SegmentTestBrief final : public DetectorDescriptor {
 public:
  static constexpr const char* kId = "segment9-brief256-v1";

  SegmentTestBrief() = default;
  explicit SegmentTestBrief(SegmentTestBriefParams params) : params_(params) {}

  std::string id() const override { return kId; }
  std::vector<Keypoint> detect(const GrayImage& image) const override;
  FeatureSet describe(const GrayImage& image,
                      std::span<const Keypoint> keypoints) const override;
  std::vector<Match> match(const FeatureSet& query,
                           const FeatureSet& train) const override;

  const SegmentTestBriefParams& params() const { return params_; }

 private:
  SegmentTestBriefParams params_;
};

/// Offsets of the 16-pixel Bresenham circle of radius 3, clockwise from
/// 12 o'clock.
extern const std::array<std::array<int, 2>, 16> kSegmentCircle;

/// Segment-test corner detection. A pixel is a corner when at least 9
/// contiguous circle pixels are all brighter than center + threshold or all
/// darker than center - threshold. The score is the sum of absolute
/// differences over that arc. Non-maximum suppression keeps a candidate only
/// if no other candidate within `nonmax_radius` (Euclidean) has a higher
/// score, ties going to the earlier raster position. Output is sorted by
/// descending score and truncated to `max_keypoints`.
std::vector<Keypoint> detect_corners(const GrayImage& image, int threshold,
                                     int nonmax_radius,
                                     int max_keypoints = kDefaultMaxKeypoints);

/// Sampling pattern: {x1, y1, x2, y2} offsets within [-13, 13].
std::span<const std::array<int, 4>> brief_pattern();

/// Half-width of the square support of the descriptor (31x31 patch).
inline constexpr int kPatchHalf = 15;

/// Bit b = 1 iff the 5x5 box sum at the first point of pair b is less than
/// at the second. Keypoints are sampled at their rounded positions; those
/// whose 31x31 patch is not fully inside the image are dropped.
FeatureSet describe_binary(const GrayImage& image,
                           std::span<const Keypoint> keypoints);

/// Brute-force two-nearest-neighbour search with the ratio test, generic
/// over the distance. `distance(q, t)` returns the distance between query
/// q and train t. Ties prefer the lower train index.
template <typename Distance>
std::vector<Match> match_ratio_generic(int num_query, int num_train,
                                       Distance&& distance, double ratio,
                                       double single_train_cap) {
  std::vector<Match> out;
  if (num_train <= 0) return out;
  for (int q = 0; q < num_query; ++q) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    int best_index = -1;
    for (int t = 0; t < num_train; ++t) {
      const double d = static_cast<double>(distance(q, t));
      if (d < best) {
        second = best;
        best = d;
        best_index = t;
      } else if (d < second) {
        second = d;
      }
    }
    const bool keep = num_train == 1 ? best <= single_train_cap
                                     : best < ratio * second;
    if (keep) out.push_back({q, best_index, best});
  }
  return out;
}

/// Ratio-test matching of binary descriptors under Hamming distance.
/// Throws InvalidInput unless 0 < ratio < 1.
std::vector<Match> match_ratio(std::span<const BinaryDescriptor> query,
                               std::span<const BinaryDescriptor> train,
                               double ratio = kDefaultMatchRatio);

/// Presence rule: at least `min_matches` matches.
inline bool object_present(std::span<const Match> matches,
                           int min_matches = kMinMatches) {
  return static_cast<int>(matches.size()) >= min_matches;
}

// File formats.

/// Raw binary, 32 bytes per descriptor, bit b stored in byte b / 8 at bit
/// position b % 8 (least significant first).
void write_descriptors(const std::filesystem::path& path,
                       std::span<const BinaryDescriptor> descriptors);
std::vector<BinaryDescriptor> read_descriptors(
    const std::filesystem::path& path);

/// CSV with header "x,y,score".
void write_keypoints_csv(const std::filesystem::path& path,
                         std::span<const Keypoint> keypoints);
std::vector<Keypoint> read_keypoints_csv(const std::filesystem::path& path);

}  // namespace planegrasp
