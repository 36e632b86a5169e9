#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "tgan/data.hpp"
#include "tgan/error.hpp"

using namespace tgan;
using data::DistributionKind;

namespace {

data::DataDistributionSpec ring(std::size_t m, double radius, double sigma = 0.05) {
  data::DataDistributionSpec s;
  s.kind = DistributionKind::ring;
  s.mode_count = m;
  s.radius = radius;
  s.sigma = sigma;
  return s;
}

data::DataDistributionSpec grid(std::size_t side, double spacing, double sigma = 0.05) {
  data::DataDistributionSpec s;
  s.kind = DistributionKind::grid;
  s.grid_side = side;
  s.spacing = spacing;
  s.sigma = sigma;
  return s;
}

std::size_t nearest(const std::vector<data::Point2>& centers, double x, double y) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = std::hypot(x - centers[i][0], y - centers[i][1]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST(Noise, SameSeedSameBatch) {
  Rng a(1), b(1);
  EXPECT_EQ(data::sample_noise({8}, 32, a), data::sample_noise({8}, 32, b));
}

TEST(Noise, Shape) {
  Rng r(2);
  EXPECT_EQ(data::sample_noise({5}, 3, r).shape(), (std::vector<std::size_t>{3, 5}));
}

TEST(Noise, MomentsAtLargeN) {
  Rng r(3);
  const std::size_t n = 100000, dim = 4;
  const Tensor z = data::sample_noise({dim}, n, r);
  for (std::size_t c = 0; c < dim; ++c) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += z(i, c);
      sq += z(i, c) * z(i, c);
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.05);
  }
}

TEST(Noise, IndependentStreamsHaveNoSharedState) {
  Rng a(4), b(5), a2(4);
  const Tensor first = data::sample_noise({3}, 10, a);
  data::sample_noise({3}, 1000, b);  // drawing from b must not disturb a
  EXPECT_EQ(first, data::sample_noise({3}, 10, a2));
  EXPECT_NE(data::sample_noise({3}, 10, a), data::sample_noise({3}, 10, b));
}

TEST(Data, DegenerateRingHitsExactCenters) {
  Rng r(6);
  const auto spec = ring(8, 2.0, 0.0);
  const auto centers = data::mode_centers(spec);
  const Tensor x = data::sample_data(spec, 500, r);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto& c = centers[nearest(centers, x(i, 0), x(i, 1))];
    EXPECT_LE(std::hypot(x(i, 0) - c[0], x(i, 1) - c[1]), 1e-6);
  }
}

TEST(Data, FourModeRingCenters) {
  const auto c = data::mode_centers(ring(4, 1.0));
  const std::vector<data::Point2> expected{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  ASSERT_EQ(c.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(c[i][0], expected[i][0], 1e-15);
    EXPECT_NEAR(c[i][1], expected[i][1], 1e-15);
  }
}

TEST(Data, GridFrequenciesUniform) {
  Rng r(7);
  const auto spec = grid(5, 2.0);
  const auto centers = data::mode_centers(spec);
  const std::size_t n = 100000;
  const Tensor x = data::sample_data(spec, n, r);
  std::vector<std::size_t> counts(centers.size(), 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[nearest(centers, x(i, 0), x(i, 1))];
  for (std::size_t k = 0; k < counts.size(); ++k) {
    EXPECT_NEAR(static_cast<double>(counts[k]) / n, 1.0 / 25.0, 0.01) << k;
  }
}

TEST(Data, SingleGaussianMoments) {
  data::DataDistributionSpec spec;
  spec.kind = DistributionKind::single_gaussian;
  spec.sigma = 0.7;
  Rng r(8);
  const std::size_t n = 100000;
  const Tensor x = data::sample_data(spec, n, r);
  for (std::size_t c = 0; c < 2; ++c) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += x(i, c);
      sq += x(i, c) * x(i, c);
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(sq / n - mean * mean, 0.49, 0.02);
  }
}

TEST(Data, SameSeedSameBatch) {
  Rng a(9), b(9);
  EXPECT_EQ(data::sample_data(ring(8, 2.0), 64, a), data::sample_data(ring(8, 2.0), 64, b));
}

TEST(Centers, SingleModeRing) {
  const auto c = data::mode_centers(ring(1, 3.5));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0][0], 3.5);
  EXPECT_EQ(c[0][1], 0.0);
}

TEST(Centers, TwoByTwoGrid) {
  const auto c = data::mode_centers(grid(2, 2.0));
  const std::set<std::pair<double, double>> got{{c[0][0], c[0][1]}, {c[1][0], c[1][1]}, {c[2][0], c[2][1]},
                                                {c[3][0], c[3][1]}};
  const std::set<std::pair<double, double>> expected{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  EXPECT_EQ(got, expected);
}

TEST(Centers, RingPointsOnCircleAndDistinct) {
  for (std::size_t m : {2u, 8u, 25u}) {
    const auto c = data::mode_centers(ring(m, 2.0));
    ASSERT_EQ(c.size(), m);
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_NEAR(std::hypot(c[i][0], c[i][1]), 2.0, 1e-12);
      EXPECT_NEAR(std::atan2(c[i][1], c[i][0]),
                  std::remainder(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m),
                                 2.0 * std::numbers::pi),
                  1e-12);
      for (std::size_t j = 0; j < i; ++j) EXPECT_GT(std::hypot(c[i][0] - c[j][0], c[i][1] - c[j][1]), 1e-9);
    }
  }
  const auto g = data::mode_centers(grid(5, 2.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) EXPECT_GT(std::hypot(g[i][0] - g[j][0], g[i][1] - g[j][1]), 1e-9);
  }
}

TEST(Spec, InvalidRejected) {
  Rng r(10);
  EXPECT_THROW(data::sample_data(ring(0, 1.0), 4, r), ConfigError);
  EXPECT_THROW(data::sample_data(ring(8, -1.0), 4, r), ConfigError);
  EXPECT_THROW(data::sample_data(grid(3, 0.0), 4, r), ConfigError);
  EXPECT_THROW(data::sample_data(ring(8, 1.0, NAN), 4, r), ConfigError);
  EXPECT_THROW(data::parse_distribution("moons"), ConfigError);
}

TEST(SampleCsv, HeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() / "tgan_points_test.csv";
  data::write_points_csv(path, Tensor::matrix({{0.5, -1}, {2, 3.25}}));
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "x,y");
  EXPECT_EQ(lines[1], "0.5,-1");
  EXPECT_EQ(lines[2], "2,3.25");
  std::filesystem::remove(path);
}
