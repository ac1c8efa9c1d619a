#include "planegrasp/homography.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "planegrasp/error.hpp"
#include "planegrasp/random.hpp"

namespace planegrasp {
namespace {

// Random homography that keeps [0, 640] x [0, 480] well inside the
// positive-depth half plane: a similarity plus mild projective terms.
Eigen::Matrix3d random_homography(Rng& rng) {
  const double a = rng.uniform(-0.5, 0.5), s = rng.uniform(0.6, 1.6);
  Eigen::Matrix3d h;
  h << s * std::cos(a), -s * std::sin(a), rng.uniform(-50, 50),
      s * std::sin(a), s * std::cos(a), rng.uniform(-50, 50),
      rng.uniform(-2e-4, 2e-4), rng.uniform(-2e-4, 2e-4), 1.0;
  h.block<2, 2>(0, 0) += Eigen::Matrix2d::NullaryExpr([&] { return rng.uniform(-0.1, 0.1); });
  return h;
}

// Projection written out independently of project().
Vec2 apply(const Eigen::Matrix3d& h, const Vec2& p) {
  const double a = h(0, 0) * p.x() + h(0, 1) * p.y() + h(0, 2);
  const double b = h(1, 0) * p.x() + h(1, 1) * p.y() + h(1, 2);
  const double c = h(2, 0) * p.x() + h(2, 1) * p.y() + h(2, 2);
  return {a / c, b / c};
}

std::vector<Correspondence> exact_set(const Eigen::Matrix3d& h, int n, Rng& rng) {
  std::vector<Correspondence> out;
  for (int i = 0; i < n; ++i) {
    const Vec2 p{rng.uniform(0, 640), rng.uniform(0, 480)};
    out.push_back({p, apply(h, p)});
  }
  return out;
}

double max_error(const Homography& h, std::span<const Correspondence> set) {
  double e = 0;
  for (const auto& c : set) e = std::max(e, reprojection_error(h, c));
  return e;
}

double rms_error(const Homography& h, std::span<const Correspondence> set) {
  double e = 0;
  for (const auto& c : set) e += std::pow(reprojection_error(h, c), 2);
  return std::sqrt(e / set.size());
}

TEST(Homography, CanonicalScale) {
  Eigen::Matrix3d m;
  m << 2, 0, 1, 0, 2, 3, 0, 0, -4;
  const Homography h(m);
  EXPECT_NEAR(h.matrix().norm(), 1.0, 1e-15);
  EXPECT_GE(h.matrix()(2, 2), 0.0);
  EXPECT_LT((h.matrix() + m / m.norm()).norm(), 1e-15);
  EXPECT_THROW(Homography(Eigen::Matrix3d::Zero()), DegenerateConfiguration);
  Eigen::Matrix3d rank2 = Eigen::Matrix3d::Identity();
  rank2(2, 2) = 0;
  EXPECT_THROW(Homography{rank2}, DegenerateConfiguration);
}

TEST(Project, IdentityTranslationAndScale) {
  EXPECT_LT((project(Homography::identity(), {3.5, 7.0}) - Vec2(3.5, 7.0)).norm(), 1e-14);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = 5;
  t(1, 2) = 7;
  EXPECT_LT((project(Homography(t), {0, 0}) - Vec2(5, 7)).norm(), 1e-14);

  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix3d h = random_homography(rng);
    const Vec2 p{rng.uniform(0, 640), rng.uniform(0, 480)};
    EXPECT_LT((project(Homography(5.0 * h), p) - project(Homography(h), p)).norm(), 1e-9);
    EXPECT_LT((project(Homography(h), p) - apply(h, p)).norm(), 1e-9);
  }
}

TEST(Project, PointAtInfinity) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(2, 0) = 1.0;
  h(2, 2) = -2.0;  // c = x - 2
  EXPECT_THROW(project(Homography(h), {2.0, 5.0}), PointAtInfinity);
  EXPECT_TRUE(std::isinf(reprojection_error(Homography(h), {{2.0, 5.0}, {0, 0}})));
}

TEST(EstimateDlt, UnitSquareIdentityAndTranslation) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Correspondence> same, shifted;
  for (const Vec2& p : sq) {
    same.push_back({p, p});
    shifted.push_back({p, p + Vec2(5, 7)});
  }
  EXPECT_LT((estimate_dlt(same).matrix() - Homography::identity().matrix()).norm(), 1e-12);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = 5;
  t(1, 2) = 7;
  EXPECT_LT((estimate_dlt(shifted).matrix() - Homography(t).matrix()).norm(), 1e-12);
}

TEST(EstimateDlt, MinimalSetMatchesLinearSolve) {
  // Oracle: fix h33 = 1 and solve the 8x8 system directly.
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = exact_set(random_homography(rng), 4, rng);
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
      const double x = set[i].source.x(), y = set[i].source.y();
      const double u = set[i].target.x(), v = set[i].target.y();
      a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
      a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
      b(2 * i) = u;
      b(2 * i + 1) = v;
    }
    const Eigen::Matrix<double, 8, 1> sol = a.fullPivLu().solve(b);
    Eigen::Matrix3d h;
    h << sol(0), sol(1), sol(2), sol(3), sol(4), sol(5), sol(6), sol(7), 1.0;
    EXPECT_LT((estimate_dlt(set).matrix() - Homography(h).matrix()).norm(), 1e-9);
  }
}

TEST(EstimateDlt, ExactCorrespondences) {
  Rng rng(1);
  double worst = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto set = exact_set(random_homography(rng), 20, rng);
    worst = std::max(worst, max_error(estimate_dlt(set), set));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(EstimateDlt, SimilarityEquivariance) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = exact_set(random_homography(rng), 12, rng);
    const double a = rng.uniform(-3, 3), s = rng.uniform(0.5, 2);
    Eigen::Matrix3d sim;
    sim << s * std::cos(a), -s * std::sin(a), rng.uniform(-100, 100),
        s * std::sin(a), s * std::cos(a), rng.uniform(-100, 100), 0, 0, 1;
    std::vector<Correspondence> moved = set;
    for (auto& c : moved) c.target = apply(sim, c.target);
    const Homography h = estimate_dlt(set);
    const Homography g = estimate_dlt(moved);
    EXPECT_LT((g.matrix() - Homography(sim * h.matrix()).matrix()).norm(), 1e-8);
  }
}

TEST(EstimateDlt, LeastSquaresBeatsMinimalSamples) {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    auto set = exact_set(random_homography(rng), 30, rng);
    for (auto& c : set) c.target += Vec2{rng.gaussian(), rng.gaussian()};
    const double full = rms_error(estimate_dlt(set), set);
    for (int k = 0; k + 4 <= 28; k += 4) {
      const std::span<const Correspondence> minimal(set.data() + k, 4);
      EXPECT_LE(full, rms_error(estimate_dlt(minimal), set) + 1e-9);
    }
  }
}

TEST(EstimateDlt, DegenerateInputs) {
  std::vector<Correspondence> three{{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  EXPECT_THROW(estimate_dlt(three), DegenerateConfiguration);
  std::vector<Correspondence> collinear;
  for (int i = 0; i < 4; ++i) collinear.push_back({{double(i), 2.0 * i}, {double(i), 0}});
  EXPECT_THROW(estimate_dlt(collinear), DegenerateConfiguration);
  std::vector<Correspondence> three_on_line{
      {{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, {{2, 2}, {2, 2}}, {{0, 5}, {0, 5}}};
  EXPECT_THROW(estimate_dlt(three_on_line), DegenerateConfiguration);
  std::vector<Correspondence> many_collinear;
  for (int i = 0; i < 12; ++i) many_collinear.push_back({{double(i), 3.0}, {2.0 * i, 1.0}});
  EXPECT_THROW(estimate_dlt(many_collinear), DegenerateConfiguration);
}

TEST(EstimateRansac, OutlierFreeMatchesDlt) {
  Rng rng(31);
  const auto set = exact_set(random_homography(rng), 20, rng);
  const RansacResult r = estimate_ransac(set, {});
  EXPECT_EQ(r.num_inliers, 20);
  EXPECT_TRUE(std::all_of(r.inlier_mask.begin(), r.inlier_mask.end(), [](bool b) { return b; }));
  EXPECT_LT((r.homography.matrix() - estimate_dlt(set).matrix()).norm(), 1e-9);
}

struct Contaminated {
  std::vector<Correspondence> set;
  std::vector<bool> truth;
  Eigen::Matrix3d h;
};

Contaminated contaminated(std::uint64_t seed) {
  Rng rng(seed);
  Contaminated out;
  out.h = random_homography(rng);
  for (int i = 0; i < 60; ++i) {
    const Vec2 p{rng.uniform(0, 640), rng.uniform(0, 480)};
    out.set.push_back({p, apply(out.h, p) + 0.5 * Vec2{rng.gaussian(), rng.gaussian()}});
    out.truth.push_back(true);
  }
  for (int i = 0; i < 40; ++i) {
    out.set.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)},
                       {rng.uniform(0, 640), rng.uniform(0, 480)}});
    out.truth.push_back(false);
  }
  for (int i = 99; i > 0; --i) {
    const auto j = rng.below(i + 1);
    std::swap(out.set[i], out.set[j]);
    std::swap(out.truth[i], out.truth[j]);
  }
  // A random outlier can land near the true model; label by the truth.
  for (std::size_t i = 0; i < out.set.size(); ++i) {
    if (!out.truth[i] && (apply(out.h, out.set[i].source) - out.set[i].target).norm() < 3.0) {
      out.truth[i] = true;
    }
  }
  return out;
}

TEST(EstimateRansac, SixtyFortyContamination) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const Contaminated c = contaminated(seed);
    RansacConfig cfg;
    cfg.seed = seed;
    const RansacResult r = estimate_ransac(c.set, cfg);
    int true_in = 0, false_in = 0, true_total = 0;
    for (std::size_t i = 0; i < c.set.size(); ++i) {
      true_total += c.truth[i];
      if (r.inlier_mask[i]) (c.truth[i] ? true_in : false_in)++;
    }
    EXPECT_GE(true_in, 57) << "seed " << seed << " of " << true_total;
    EXPECT_LE(false_in, 2) << "seed " << seed;
  }
}

TEST(EstimateRansac, ReturnsLeastSquaresFitOfItsMask) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Contaminated c = contaminated(seed);
    RansacConfig cfg;
    cfg.seed = seed;
    const RansacResult r = estimate_ransac(c.set, cfg);
    std::vector<Correspondence> inliers;
    for (std::size_t i = 0; i < c.set.size(); ++i) {
      if (r.inlier_mask[i]) inliers.push_back(c.set[i]);
    }
    EXPECT_LT((r.homography.matrix() - estimate_dlt(inliers).matrix()).norm(), 1e-9)
        << "seed " << seed;
  }
}

TEST(EstimateRansac, MaskConsistentWithReturnedModel) {
  const Contaminated c = contaminated(9);
  const RansacResult r = estimate_ransac(c.set, {});
  int count = 0;
  for (std::size_t i = 0; i < c.set.size(); ++i) {
    const double e = reprojection_error(r.homography, c.set[i]);
    if (r.inlier_mask[i]) {
      EXPECT_LT(e, 3.0);
      ++count;
    } else {
      EXPECT_GE(e, 3.0);
    }
  }
  EXPECT_EQ(count, r.num_inliers);
  EXPECT_GE(r.iterations, 1);
  EXPECT_LE(r.iterations, 2000);
}

TEST(EstimateRansac, SameSeedSameResult) {
  const Contaminated c = contaminated(12);
  RansacConfig cfg;
  cfg.seed = 77;
  const RansacResult a = estimate_ransac(c.set, cfg);
  const RansacResult b = estimate_ransac(c.set, cfg);
  EXPECT_EQ(a.homography.matrix(), b.homography.matrix());
  EXPECT_EQ(a.inlier_mask, b.inlier_mask);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(EstimateRansac, Failures) {
  std::vector<Correspondence> collinear;
  for (int i = 0; i < 8; ++i) collinear.push_back({{double(i), double(i)}, {2.0 * i, 1.0 * i}});
  EXPECT_THROW(estimate_ransac(collinear, {}), Error);

  Rng rng(4);
  auto few = exact_set(random_homography(rng), 9, rng);
  EXPECT_THROW(estimate_ransac(few, {}), NoConsensus);
  EXPECT_THROW(estimate_ransac(std::span<const Correspondence>(few.data(), 3), {}), Error);

  RansacConfig bad;
  bad.confidence = 1.0;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = {};
  bad.reprojection_threshold = 0;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = {};
  bad.max_iterations = 0;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(HomographyText, RoundTrip) {
  Rng rng(6);
  const Homography h(random_homography(rng));
  EXPECT_LT((homography_from_text(to_text(h)).matrix() - h.matrix()).norm(), 1e-15);
  EXPECT_THROW(homography_from_text("1 2 3"), InvalidInput);
}

TEST(Homography, InverseUndoesProjection) {
  Rng rng(8);
  const Homography h(random_homography(rng));
  const Vec2 p(100, 200);
  EXPECT_LT((project(h.inverse(), project(h, p)) - p).norm(), 1e-9);
}

}  // namespace
}  // namespace planegrasp
