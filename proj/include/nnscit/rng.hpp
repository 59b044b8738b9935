#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace nnscit {

/// Counter-based generator (Philox4x32-10) keyed by a seed and a stream id.
///
/// The draw sequence is a pure function of (seed, stream), so independent
/// tasks can each own a stream and reproduce the same numbers regardless of
/// how they are scheduled. All distributions are implemented here rather than
/// through <random> so sequences do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double sd = 1.0);
  double laplace(double location, double scale);

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Child generator for a sub-task; deterministic in (seed, stream, id).
  Rng split(std::uint64_t id) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

namespace detail {
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);
}  // namespace detail

/// SplitMix64 finalizer, used to derive seeds from (seed, tag) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace nnscit
