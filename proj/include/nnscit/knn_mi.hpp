#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nnscit {

inline constexpr std::size_t kDefaultNeighbors = 3;

struct MiEstimate {
  double value;  // nats, clamped at zero
  std::size_t k;
  std::size_t n;
};

/// Per-point neighborhood statistics behind the k-NN estimator.
struct KnnCounts {
  std::vector<double> radius;    // l-inf distance to the k-th neighbor (half the box width)
  std::vector<std::size_t> nx;   // #{j != i : |x_i - x_j| <= radius_i}
  std::vector<std::size_t> ny;   // #{j != i : |y_i - y_j| <= radius_i}
};

/// Neighborhood statistics in O(n log n + n * scan), where the scan walks
/// outward along x until no closer joint neighbor is possible.
KnnCounts knn_counts(std::span<const double> xs, std::span<const double> ys, std::size_t k);

/// k-NN estimate of I(X;Y) for scalar X, Y:
///   max{ mean_i[psi(k) - psi(nx_i) - psi(ny_i) + psi(n)], 0 }.
/// Requires equal lengths and 1 <= k < n.
MiEstimate estimate_mi(std::span<const double> xs, std::span<const double> ys,
                       std::size_t k = kDefaultNeighbors);

}  // namespace nnscit
