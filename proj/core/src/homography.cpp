#include "planegrasp/homography.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "planegrasp/error.hpp"
#include "planegrasp/random.hpp"

namespace planegrasp {
namespace {

constexpr double kInfinityTolerance = 1e-12;
constexpr double kRankTolerance = 1e-10;
constexpr double kSingularTolerance = 1e-12;
// Twice the minimum triangle area (1e-6 px^2) for minimal samples.
constexpr double kMinArea2 = 2e-6;

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Vec2> pts) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 1e-12) || !std::isfinite(mean_dist)) {
    throw DegenerateConfiguration("coincident points");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

Vec2 apply(const Eigen::Matrix3d& t, const Vec2& p) {
  const Eigen::Vector3d q = t * p.homogeneous();
  return q.hnormalized();
}

bool has_collinear_triple(const std::array<Vec2, 4>& p) {
  static constexpr int kTriples[4][3] = {
      {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    if (std::abs(triangle_area2(p[t[0]], p[t[1]], p[t[2]])) < kMinArea2) {
      return true;
    }
  }
  return false;
}

int count_inliers(const Homography& h,
                  std::span<const Correspondence> corr, double threshold,
                  std::vector<bool>* mask) {
  int n = 0;
  if (mask) mask->assign(corr.size(), false);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    if (reprojection_error(h, corr[i]) < threshold) {
      ++n;
      if (mask) (*mask)[i] = true;
    }
  }
  return n;
}

int required_iterations(double inlier_ratio, double confidence, int cap) {
  if (inlier_ratio >= 1.0) return 0;
  const double w4 = std::pow(inlier_ratio, 4);
  if (w4 <= 0.0) return cap;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - w4);
  if (!std::isfinite(n) || n >= cap) return cap;
  return static_cast<int>(std::ceil(n));
}

}  // namespace

Homography::Homography(const Eigen::Matrix3d& h) {
  if (!h.allFinite()) {
    throw DegenerateConfiguration("homography has non-finite entries");
  }
  const double norm = h.norm();
  if (!(norm > 0.0)) throw DegenerateConfiguration("zero homography");
  h_ = h / norm;
  if (h_(2, 2) < 0.0) h_ = -h_;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h_);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > kSingularTolerance * sv(0))) {
    throw DegenerateConfiguration("singular homography");
  }
}

Homography Homography::inverse() const { return Homography(h_.inverse()); }

void RansacConfig::validate() const {
  if (!(reprojection_threshold > 0.0)) {
    throw InvalidInput("RANSAC threshold must be positive");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidInput("RANSAC confidence must lie in (0, 1)");
  }
  if (max_iterations < 1) {
    throw InvalidInput("RANSAC max_iterations must be >= 1");
  }
  if (min_inliers < 4) {
    throw InvalidInput("RANSAC min_inliers must be >= 4");
  }
}

Vec2 project(const Homography& h, const Vec2& p) {
  const Eigen::Vector3d abc = h.matrix() * p.homogeneous();
  if (std::abs(abc.z()) <= kInfinityTolerance) {
    throw PointAtInfinity("point maps to infinity under homography");
  }
  return {abc.x() / abc.z(), abc.y() / abc.z()};
}

double reprojection_error(const Homography& h, const Correspondence& c) {
  const Eigen::Vector3d abc = h.matrix() * c.source.homogeneous();
  if (std::abs(abc.z()) <= kInfinityTolerance) {
    return std::numeric_limits<double>::infinity();
  }
  return (Vec2(abc.x() / abc.z(), abc.y() / abc.z()) - c.target).norm();
}

double triangle_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

Homography estimate_dlt(std::span<const Correspondence> corr) {
  const std::size_t n = corr.size();
  if (n < 4) {
    throw DegenerateConfiguration("need at least 4 correspondences");
  }
  if (n == 4) {
    std::array<Vec2, 4> src, dst;
    for (int i = 0; i < 4; ++i) {
      src[i] = corr[i].source;
      dst[i] = corr[i].target;
    }
    if (has_collinear_triple(src) || has_collinear_triple(dst)) {
      throw DegenerateConfiguration("collinear minimal sample");
    }
  }

  std::vector<Vec2> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = corr[i].source;
    dst[i] = corr[i].target;
  }
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = apply(ts, src[i]);
    const Vec2 q = apply(td, dst[i]);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // sv(7) is the eighth largest singular value; a unique solution needs
  // rank 8.
  if (!(sv(7) >= kRankTolerance * sv(0))) {
    throw DegenerateConfiguration("rank-deficient DLT system");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(td.inverse() * hn * ts);
}

RansacResult estimate_ransac(std::span<const Correspondence> corr,
                             const RansacConfig& cfg) {
  cfg.validate();
  const std::size_t n = corr.size();
  if (n < 4) throw NoConsensus("fewer than 4 correspondences");

  Rng rng(cfg.seed);
  int best_count = -1;
  Homography best;
  int required = cfg.max_iterations;
  int iter = 0;
  while (iter < required) {
    ++iter;
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = static_cast<std::size_t>(rng.below(n));
        fresh = true;
        for (int j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
      } while (!fresh);
    }
    std::array<Correspondence, 4> sample{};
    for (int k = 0; k < 4; ++k) sample[k] = corr[idx[k]];

    Homography model;
    try {
      model = estimate_dlt(sample);
    } catch (const DegenerateConfiguration&) {
      continue;
    }
    const int count =
        count_inliers(model, corr, cfg.reprojection_threshold, nullptr);
    // Strict improvement: on ties the earliest iteration wins.
    if (count > best_count) {
      best_count = count;
      best = model;
      required = std::min(
          cfg.max_iterations,
          std::max(iter, required_iterations(static_cast<double>(count) / n,
                                             cfg.confidence,
                                             cfg.max_iterations)));
    }
  }

  if (best_count < cfg.min_inliers) {
    throw NoConsensus("best model has " + std::to_string(std::max(best_count, 0)) +
                      " inliers");
  }

  RansacResult result;
  result.iterations = iter;
  result.homography = best;
  result.num_inliers = count_inliers(best, corr, cfg.reprojection_threshold,
                                     &result.inlier_mask);

  // Least-squares refit on the consensus set, repeated until the set is
  // stable. A refit may shed borderline points the minimal model accepted;
  // it is kept unless support drops below min_inliers.
  for (int round = 0; round < 5; ++round) {
    std::vector<Correspondence> inliers;
    for (std::size_t i = 0; i < n; ++i) {
      if (result.inlier_mask[i]) inliers.push_back(corr[i]);
    }
    Homography refit;
    try {
      refit = estimate_dlt(inliers);
    } catch (const DegenerateConfiguration&) {
      break;
    }
    std::vector<bool> mask;
    const int count =
        count_inliers(refit, corr, cfg.reprojection_threshold, &mask);
    if (count < cfg.min_inliers) break;
    const bool stable = mask == result.inlier_mask;
    result.homography = refit;
    result.inlier_mask = std::move(mask);
    result.num_inliers = count;
    if (stable) break;
  }
  return result;
}

std::string to_text(const Homography& h) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (c) os << ' ';
      os << h.matrix()(r, c);
    }
    os << '\n';
  }
  return os.str();
}

Homography homography_from_text(const std::string& text) {
  std::istringstream is(text);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (!(is >> m(r, c))) {
        throw InvalidInput("expected 9 numbers for a homography");
      }
    }
  }
  return Homography(m);
}

}  // namespace planegrasp
