#include <gtest/gtest.h>

#include <limits>

#include "nnscit/dataset.hpp"
#include "nnscit/error.hpp"
#include "nnscit/nn_index.hpp"
#include "nnscit/rng.hpp"

namespace nnscit {
namespace {

RowMatrix random_points(std::size_t n, std::size_t d, Rng& rng, bool lattice = false) {
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = lattice ? static_cast<double>(rng.below(4)) : rng.normal();
    }
  }
  return m;
}

// Linear scan with first-minimum tie breaking.
NeighborHit scan(const RowMatrix& ref, std::span<const double> q) {
  NeighborHit best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < ref.cols(); ++j) {
      const double diff = ref(i, j) - q[static_cast<std::size_t>(j)];
      s += diff * diff;
    }
    if (s < best.squared_distance) best = {static_cast<std::size_t>(i), s};
  }
  return best;
}

void check_against_scan(std::size_t n, std::size_t d, SearchStrategy strategy, bool lattice,
                        std::uint64_t seed) {
  Rng rng(seed);
  const RowMatrix ref = random_points(n, d, rng, lattice);
  const RowMatrix queries = random_points(200, d, rng, lattice);
  std::vector<double> payload(n);
  for (std::size_t i = 0; i < n; ++i) payload[i] = static_cast<double>(i);
  const NnIndex index(ref, payload, strategy);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const std::span<const double> row(queries.data() + q * queries.cols(), d);
    const NeighborHit want = scan(ref, row);
    const NeighborHit got = index.nearest(row);
    ASSERT_EQ(got.index, want.index) << "n=" << n << " d=" << d << " q=" << q;
    ASSERT_EQ(got.squared_distance, want.squared_distance);
  }
}

TEST(NnIndex, KdTreeMatchesScan) {
  for (const std::size_t d : {1u, 2u, 5u, 15u}) {
    for (const std::size_t n : {1u, 7u, 100u, 1000u}) {
      check_against_scan(n, d, SearchStrategy::kKdTree, false, 100 + d * 7 + n);
    }
  }
}

TEST(NnIndex, TiesResolveToLowestIndex) {
  for (const std::size_t d : {1u, 2u, 3u}) {
    check_against_scan(300, d, SearchStrategy::kKdTree, true, 7 + d);
    check_against_scan(300, d, SearchStrategy::kBruteForce, true, 7 + d);
  }
}

TEST(NnIndex, BruteForceMatchesScanInHighDimension) {
  check_against_scan(400, 50, SearchStrategy::kAuto, false, 3);
  check_against_scan(400, 50, SearchStrategy::kKdTree, false, 4);
}

TEST(NnIndex, AutoPicksStrategyByDimension) {
  Rng rng(1);
  EXPECT_TRUE(NnIndex(random_points(50, kKdTreeMaxDim, rng), std::vector<double>(50)).uses_kd_tree());
  EXPECT_FALSE(
      NnIndex(random_points(50, kKdTreeMaxDim + 1, rng), std::vector<double>(50)).uses_kd_tree());
}

TEST(NnIndex, KdTreePrunesInLowDimension) {
  Rng rng(2);
  const std::size_t n = 5000;
  const NnIndex index(random_points(n, 2, rng), std::vector<double>(n), SearchStrategy::kKdTree);
  const std::vector<double> q = {0.1, -0.2};
  index.nearest(q);
  EXPECT_LT(NnIndex::last_distance_evaluations(), n / 10);
}

TEST(NnIndex, ExactMatchReturnsSelf) {
  Rng rng(4);
  const RowMatrix ref = random_points(100, 3, rng);
  std::vector<double> payload(100);
  for (std::size_t i = 0; i < 100; ++i) payload[i] = static_cast<double>(i) * 10;
  const NnIndex index(ref, payload);
  const auto out = sample_1nn(index, ref);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(out[i], static_cast<double>(i) * 10);
}

TEST(NnIndex, Errors) {
  Rng rng(5);
  EXPECT_THROW(NnIndex(RowMatrix(0, 2), {}), TooFewSamplesError);
  EXPECT_THROW(NnIndex(random_points(4, 2, rng), std::vector<double>(3)), DimensionError);
  const NnIndex index(random_points(4, 2, rng), std::vector<double>(4));
  const std::vector<double> q = {1.0, 2.0, 3.0};
  EXPECT_THROW(index.nearest(q), DimensionError);
  EXPECT_THROW(sample_1nn(index, random_points(3, 3, rng)), DimensionError);
}

TEST(NnIndex, BuildFromDatasetCarriesX) {
  RowMatrix z(3, 1);
  z << 0.0, 10.0, 20.0;
  const Dataset ref({1.5, 2.5, 3.5}, {0, 0, 0}, z);
  RowMatrix qz(2, 1);
  qz << 11.0, -4.0;
  const Dataset queries({0, 0}, {0, 0}, qz);
  const auto out = sample_1nn(build_index(ref), queries);
  EXPECT_EQ(out, (std::vector<double>{2.5, 1.5}));
}

}  // namespace
}  // namespace nnscit
