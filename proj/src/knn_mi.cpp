#include "nnscit/knn_mi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "nnscit/digamma.hpp"
#include "nnscit/error.hpp"

namespace nnscit {
namespace {

void validate(std::span<const double> xs, std::span<const double> ys, std::size_t k) {
  if (xs.size() != ys.size()) {
    throw DimensionError("estimate_mi: length mismatch (" + std::to_string(xs.size()) + " vs " +
                         std::to_string(ys.size()) + ")");
  }
  if (k == 0) throw DomainError("estimate_mi: k must be positive");
  if (k >= xs.size()) {
    throw TooFewSamplesError("estimate_mi: k=" + std::to_string(k) + " needs more than k samples, got " +
                             std::to_string(xs.size()));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw DomainError("estimate_mi: non-finite sample at index " + std::to_string(i));
    }
  }
}

// Number of v in `sorted` with |center - v| <= r, computed with the same
// floating-point differences a direct |x_i - x_j| <= r scan would use.
std::size_t count_within(std::span<const double> sorted, double center, double r) {
  const auto lo = std::partition_point(sorted.begin(), sorted.end(), [&](double v) {
    return v < center && center - v > r;
  });
  const auto hi = std::partition_point(lo, sorted.end(), [&](double v) {
    return !(v > center && v - center > r);
  });
  return static_cast<std::size_t>(hi - lo);
}

}  // namespace

KnnCounts knn_counts(std::span<const double> xs, std::span<const double> ys, std::size_t k) {
  validate(xs, ys, k);
  const std::size_t n = xs.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] < xs[b] || (xs[a] == xs[b] && a < b);
  });

  KnnCounts out;
  out.radius.resize(n);
  out.nx.resize(n);
  out.ny.resize(n);

  std::priority_queue<double> heap;  // k smallest distances seen so far
  auto offer = [&](double d) {
    if (heap.size() < k) {
      heap.push(d);
    } else if (d < heap.top()) {
      heap.pop();
      heap.push(d);
    }
  };
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    heap = {};
    for (std::size_t q = pos + 1; q < n; ++q) {
      const std::size_t j = order[q];
      const double dx = std::abs(xs[i] - xs[j]);
      if (heap.size() == k && dx >= heap.top()) break;
      offer(std::max(dx, std::abs(ys[i] - ys[j])));
    }
    for (std::size_t q = pos; q-- > 0;) {
      const std::size_t j = order[q];
      const double dx = std::abs(xs[i] - xs[j]);
      if (heap.size() == k && dx >= heap.top()) break;
      offer(std::max(dx, std::abs(ys[i] - ys[j])));
    }
    out.radius[i] = heap.top();
  }

  std::vector<double> sx(xs.begin(), xs.end());
  std::vector<double> sy(ys.begin(), ys.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  for (std::size_t i = 0; i < n; ++i) {
    // The point itself always satisfies the bound; exclude it.
    out.nx[i] = count_within(sx, xs[i], out.radius[i]) - 1;
    out.ny[i] = count_within(sy, ys[i], out.radius[i]) - 1;
  }
  return out;
}

MiEstimate estimate_mi(std::span<const double> xs, std::span<const double> ys, std::size_t k) {
  const KnnCounts counts = knn_counts(xs, ys, k);
  const std::size_t n = xs.size();
  const double base = digamma(static_cast<double>(k)) + digamma(static_cast<double>(n));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Grouped so that swapping the roles of x and y is bit-exact.
    sum += base - (digamma(static_cast<double>(counts.nx[i])) +
                   digamma(static_cast<double>(counts.ny[i])));
  }
  return MiEstimate{std::max(sum / static_cast<double>(n), 0.0), k, n};
}

}  // namespace nnscit
