#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nnscit/dataset.hpp"

namespace nnscit {

enum class SearchStrategy { kAuto, kKdTree, kBruteForce };

/// Dimension above which kAuto switches from the k-d tree to a linear scan.
inline constexpr std::size_t kKdTreeMaxDim = 15;

struct NeighborHit {
  std::size_t index;
  double squared_distance;
};

/// Exact 1-nearest-neighbor index over z (squared l2), carrying one payload
/// value per reference row.
///
/// Ties on distance resolve to the lowest reference row index, for both
/// search strategies, so the two paths always agree.
class NnIndex {
 public:
  NnIndex(RowMatrix points, std::vector<double> payload,
          SearchStrategy strategy = SearchStrategy::kAuto);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  bool uses_kd_tree() const { return !nodes_.empty(); }
  std::span<const double> payload() const { return payload_; }

  NeighborHit nearest(std::span<const double> query) const;

  /// Number of point distance evaluations made by the most recent `nearest`
  /// call on this thread.
  static std::size_t last_distance_evaluations();

 private:
  struct Node {
    // Leaf when `left < 0`; then [begin, end) indexes `order_`.
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t split_dim = 0;
    double split_value = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, std::span<const double> q, NeighborHit& best) const;
  double squared_distance(std::size_t row, std::span<const double> q) const;

  RowMatrix points_;
  std::vector<double> payload_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

NnIndex build_index(const Dataset& reference, SearchStrategy strategy = SearchStrategy::kAuto);

/// For each query row, the payload (x) of the reference row whose z is nearest.
std::vector<double> sample_1nn(const NnIndex& index, const Dataset& queries);
std::vector<double> sample_1nn(const NnIndex& index, const RowMatrix& queries);

}  // namespace nnscit
