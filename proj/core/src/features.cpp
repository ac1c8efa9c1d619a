#include "planegrasp/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "planegrasp/error.hpp"

namespace planegrasp {

const std::array<std::array<int, 2>, 16> kSegmentCircle = {{
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
    {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
}};

namespace {

constexpr std::array<std::array<int, 4>, 256> kPattern = {{
#include "brief_pattern.inc"
}};

constexpr int kArcLength = 9;
constexpr int kBorder = 3;

// Returns the arc score, or 0 when the pixel fails the segment test.
int segment_score(const GrayImage& img, int x, int y, int threshold) {
  const int center = img.at(x, y);
  const int hi = center + threshold;
  const int lo = center - threshold;

  // Any 9 contiguous circle pixels include two of the four compass points.
  int quick_bright = 0;
  int quick_dark = 0;
  for (int k = 0; k < 16; k += 4) {
    const int v = img.at(x + kSegmentCircle[k][0], y + kSegmentCircle[k][1]);
    quick_bright += v > hi;
    quick_dark += v < lo;
  }
  if (quick_bright < 2 && quick_dark < 2) return 0;

  std::array<int, 16> values{};
  std::array<int, 16> state{};  // +1 brighter, -1 darker, 0 similar
  for (int k = 0; k < 16; ++k) {
    const int v = img.at(x + kSegmentCircle[k][0], y + kSegmentCircle[k][1]);
    values[k] = v;
    state[k] = v > hi ? 1 : (v < lo ? -1 : 0);
  }

  for (const int want : {1, -1}) {
    // Longest circular run of `want`.
    int best_len = 0;
    int best_start = 0;
    int run = 0;
    for (int k = 0; k < 32; ++k) {
      if (state[k & 15] == want) {
        ++run;
        if (run > best_len) {
          best_len = std::min(run, 16);
          best_start = k - run + 1;
        }
      } else {
        run = 0;
      }
    }
    if (best_len >= kArcLength) {
      int score = 0;
      for (int k = 0; k < best_len; ++k) {
        score += std::abs(values[(best_start + k) & 15] - center);
      }
      return score;
    }
  }
  return 0;
}

// Integral image with one row/column of zero padding.
class BoxSums {
 public:
  explicit BoxSums(const GrayImage& img)
      : w_(img.width() + 1), sums_(static_cast<std::size_t>(w_) * (img.height() + 1), 0) {
    for (int y = 0; y < img.height(); ++y) {
      std::uint32_t row = 0;
      for (int x = 0; x < img.width(); ++x) {
        row += img.at(x, y);
        sums_[idx(x + 1, y + 1)] = sums_[idx(x + 1, y)] + row;
      }
    }
  }

  // Sum over the 5x5 box centered at (x, y).
  std::uint32_t box5(int x, int y) const {
    const int x0 = x - 2, y0 = y - 2, x1 = x + 3, y1 = y + 3;
    return sums_[idx(x1, y1)] - sums_[idx(x0, y1)] - sums_[idx(x1, y0)] +
           sums_[idx(x0, y0)];
  }

 private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * w_ + x;
  }

  int w_;
  std::vector<std::uint32_t> sums_;
};

}  // namespace

std::vector<Keypoint> detect_corners(const GrayImage& image, int threshold,
                                     int nonmax_radius, int max_keypoints) {
  if (threshold < 1) throw InvalidInput("corner threshold must be >= 1");
  if (nonmax_radius < 0) throw InvalidInput("nonmax radius must be >= 0");
  const int w = image.width();
  const int h = image.height();
  std::vector<Keypoint> out;
  if (w < 2 * kBorder + 1 || h < 2 * kBorder + 1) return out;

  std::vector<int> scores(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> candidates;
  for (int y = kBorder; y < h - kBorder; ++y) {
    for (int x = kBorder; x < w - kBorder; ++x) {
      const int s = segment_score(image, x, y, threshold);
      if (s > 0) {
        scores[static_cast<std::size_t>(y) * w + x] = s;
        candidates.push_back(y * w + x);
      }
    }
  }

  const int r2 = nonmax_radius * nonmax_radius;
  for (const int c : candidates) {
    const int cx = c % w;
    const int cy = c / w;
    const int s = scores[c];
    bool is_max = true;
    for (int dy = -nonmax_radius; dy <= nonmax_radius && is_max; ++dy) {
      const int ny = cy + dy;
      if (ny < 0 || ny >= h) continue;
      for (int dx = -nonmax_radius; dx <= nonmax_radius; ++dx) {
        const int nx = cx + dx;
        if ((dx == 0 && dy == 0) || nx < 0 || nx >= w) continue;
        if (dx * dx + dy * dy > r2) continue;
        const int n = ny * w + nx;
        const int ns = scores[n];
        if (ns > s || (ns == s && n < c)) {
          is_max = false;
          break;
        }
      }
    }
    if (is_max) {
      out.push_back({static_cast<double>(cx), static_cast<double>(cy),
                     static_cast<double>(s)});
    }
  }

  // Candidates are in raster order, so a stable sort keeps raster order
  // among equal scores.
  std::stable_sort(out.begin(), out.end(),
                   [](const Keypoint& a, const Keypoint& b) {
                     return a.score > b.score;
                   });
  if (max_keypoints >= 0 && static_cast<int>(out.size()) > max_keypoints) {
    out.resize(static_cast<std::size_t>(max_keypoints));
  }
  return out;
}

std::span<const std::array<int, 4>> brief_pattern() { return kPattern; }

FeatureSet describe_binary(const GrayImage& image,
                           std::span<const Keypoint> keypoints) {
  FeatureSet out;
  const BoxSums sums(image);
  for (const Keypoint& kp : keypoints) {
    const int x = static_cast<int>(std::lround(kp.x));
    const int y = static_cast<int>(std::lround(kp.y));
    if (x - kPatchHalf < 0 || y - kPatchHalf < 0 ||
        x + kPatchHalf >= image.width() || y + kPatchHalf >= image.height()) {
      continue;
    }
    BinaryDescriptor d;
    for (int b = 0; b < BinaryDescriptor::kBits; ++b) {
      const auto& p = kPattern[b];
      if (sums.box5(x + p[0], y + p[1]) < sums.box5(x + p[2], y + p[3])) {
        d.set_bit(b);
      }
    }
    out.keypoints.push_back(kp);
    out.descriptors.push_back(d);
  }
  return out;
}

std::vector<Match> match_ratio(std::span<const BinaryDescriptor> query,
                               std::span<const BinaryDescriptor> train,
                               double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidInput("match ratio must lie in (0, 1)");
  }
  return match_ratio_generic(
      static_cast<int>(query.size()), static_cast<int>(train.size()),
      [&](int q, int t) { return hamming_distance(query[q], train[t]); },
      ratio, kSingleTrainDistanceCap);
}

std::vector<Keypoint> SegmentTestBrief::detect(const GrayImage& image) const {
  return detect_corners(image, params_.threshold, params_.nonmax_radius,
                        params_.max_keypoints);
}

FeatureSet SegmentTestBrief::describe(
    const GrayImage& image, std::span<const Keypoint> keypoints) const {
  return describe_binary(image, keypoints);
}

std::vector<Match> SegmentTestBrief::match(const FeatureSet& query,
                                           const FeatureSet& train) const {
  return match_ratio(query.descriptors, train.descriptors, params_.ratio);
}

void write_descriptors(const std::filesystem::path& path,
                       std::span<const BinaryDescriptor> descriptors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  for (const auto& d : descriptors) {
    std::array<char, BinaryDescriptor::kBytes> bytes{};
    for (int i = 0; i < BinaryDescriptor::kBytes; ++i) {
      bytes[i] = static_cast<char>((d.words[i / 8] >> (8 * (i % 8))) & 0xff);
    }
    os.write(bytes.data(), bytes.size());
  }
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<BinaryDescriptor> read_descriptors(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(is)),
                        std::istreambuf_iterator<char>());
  if (raw.size() % BinaryDescriptor::kBytes != 0) {
    throw InvalidInput(path.string() +
                       ": size is not a multiple of 32 bytes");
  }
  std::vector<BinaryDescriptor> out(raw.size() / BinaryDescriptor::kBytes);
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int i = 0; i < BinaryDescriptor::kBytes; ++i) {
      const auto byte = static_cast<std::uint8_t>(
          raw[k * BinaryDescriptor::kBytes + i]);
      out[k].words[i / 8] |= std::uint64_t{byte} << (8 * (i % 8));
    }
  }
  return out;
}

void write_keypoints_csv(const std::filesystem::path& path,
                         std::span<const Keypoint> keypoints) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "x,y,score\n" << std::setprecision(17);
  for (const auto& kp : keypoints) {
    os << kp.x << ',' << kp.y << ',' << kp.score << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<Keypoint> read_keypoints_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,score", 0) != 0) {
    throw InvalidInput(path.string() + ": missing x,y,score header");
  }
  std::vector<Keypoint> out;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Keypoint kp;
    if (!(ls >> kp.x >> kp.y >> kp.score)) {
      throw InvalidInput(path.string() + ": malformed keypoint row: " + line);
    }
    out.push_back(kp);
  }
  return out;
}

}  // namespace planegrasp
