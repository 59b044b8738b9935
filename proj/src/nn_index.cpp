#include "nnscit/nn_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "nnscit/error.hpp"

namespace nnscit {
namespace {

constexpr std::uint32_t kLeafSize = 8;

thread_local std::size_t distance_evaluations = 0;

inline bool better(double d2, std::size_t idx, const NeighborHit& best) {
  return d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index);
}

}  // namespace

NnIndex::NnIndex(RowMatrix points, std::vector<double> payload, SearchStrategy strategy)
    : points_(std::move(points)), payload_(std::move(payload)) {
  if (points_.rows() == 0) throw TooFewSamplesError("nearest-neighbor index needs reference rows");
  if (points_.cols() == 0) throw DimensionError("nearest-neighbor index needs dimension >= 1");
  if (payload_.size() != static_cast<std::size_t>(points_.rows())) {
    throw DimensionError("payload length does not match the number of reference rows");
  }
  if (points_.rows() > std::numeric_limits<std::int32_t>::max()) {
    throw DimensionError("reference set too large");
  }
  const bool use_tree = strategy == SearchStrategy::kKdTree ||
                        (strategy == SearchStrategy::kAuto && dim() <= kKdTreeMaxDim);
  if (use_tree) {
    order_.resize(size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(size()));
  }
}

std::int32_t NnIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{-1, -1, begin, end, 0, 0.0});
  if (end - begin <= kLeafSize) return id;

  std::uint32_t best_dim = 0;
  double best_spread = 0.0;
  for (std::uint32_t d = 0; d < dim(); ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = points_(order_[i], d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = d;
    }
  }
  if (best_spread == 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points_(a, best_dim);
                     const double vb = points_(b, best_dim);
                     return va < vb || (va == vb && a < b);
                   });
  const double split_value = points_(order_[mid], best_dim);
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.left = left;
  node.right = right;
  node.split_dim = best_dim;
  node.split_value = split_value;
  return id;
}

double NnIndex::squared_distance(std::size_t row, std::span<const double> q) const {
  ++distance_evaluations;
  const double* p = points_.data() + row * dim();
  double sum = 0.0;
  for (std::size_t d = 0; d < q.size(); ++d) {
    const double diff = p[d] - q[d];
    sum += diff * diff;
  }
  return sum;
}

void NnIndex::search(std::int32_t node_id, std::span<const double> q, NeighborHit& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::size_t row = order_[i];
      const double d2 = squared_distance(row, q);
      if (better(d2, row, best)) best = {row, d2};
    }
    return;
  }
  const double diff = q[node.split_dim] - node.split_value;
  const auto near_child = diff < 0.0 ? node.left : node.right;
  const auto far_child = diff < 0.0 ? node.right : node.left;
  search(near_child, q, best);
  // Non-strict: an equidistant point with a lower row id may sit on the far side.
  if (diff * diff <= best.squared_distance) search(far_child, q, best);
}

NeighborHit NnIndex::nearest(std::span<const double> query) const {
  if (query.size() != dim()) {
    throw DimensionError("query dimension " + std::to_string(query.size()) +
                         " does not match index dimension " + std::to_string(dim()));
  }
  distance_evaluations = 0;
  NeighborHit best{std::numeric_limits<std::size_t>::max(),
                   std::numeric_limits<double>::infinity()};
  if (uses_kd_tree()) {
    search(0, query, best);
  } else {
    for (std::size_t row = 0; row < size(); ++row) {
      const double d2 = squared_distance(row, query);
      if (better(d2, row, best)) best = {row, d2};
    }
  }
  return best;
}

std::size_t NnIndex::last_distance_evaluations() { return distance_evaluations; }

NnIndex build_index(const Dataset& reference, SearchStrategy strategy) {
  return NnIndex(reference.z(), std::vector<double>(reference.x().begin(), reference.x().end()),
                 strategy);
}

std::vector<double> sample_1nn(const NnIndex& index, const RowMatrix& queries) {
  if (static_cast<std::size_t>(queries.cols()) != index.dim()) {
    throw DimensionError("query dimension " + std::to_string(queries.cols()) +
                         " does not match index dimension " + std::to_string(index.dim()));
  }
  std::vector<double> out(static_cast<std::size_t>(queries.rows()));
  const auto dim = index.dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto hit = index.nearest({queries.data() + i * dim, dim});
    out[i] = index.payload()[hit.index];
  }
  return out;
}

std::vector<double> sample_1nn(const NnIndex& index, const Dataset& queries) {
  return sample_1nn(index, queries.z());
}

}  // namespace nnscit
