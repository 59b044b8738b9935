#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nnscit/dataset.hpp"
#include "nnscit/knn_mi.hpp"
#include "nnscit/mlp.hpp"
#include "nnscit/synthgen.hpp"

namespace nnscit {

/// Which statistics are compared in the randomization p-value.
enum class Variant {
  kCmiNull,  // null: classifier CMI of (X~, Y | Z); observed: classifier CMI. Ablation, slow.
  kMiNull,   // null: k-NN MI of (X~, Y);          observed: classifier CMI. Default.
  kMiOnly,   // null: k-NN MI of (X~, Y);          observed: k-NN MI of (X, Y). Ablation.
};

enum class Decision { kAcceptH0, kRejectH0 };

std::string_view to_string(Variant variant);
std::string_view to_string(Decision decision);
Variant parse_variant(std::string_view name);

struct TestConfig {
  std::size_t repetitions = 500;  // M
  std::size_t k = kDefaultNeighbors;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  Variant variant = Variant::kMiNull;
  TrainConfig classifier;
  /// Rotate the classifier train/evaluation split over all folds.
  bool cross_fit = true;
  /// Workers for the repetition loop; 0 = one per hardware thread.
  std::size_t threads = 1;

  void validate() const;
};

/// Smallest dataset `run_nnscit` accepts; the held-out third then has 30 rows.
inline constexpr std::size_t kMinTestRows = 90;

struct CrtResult {
  double p_value = 1.0;
  double observed = 0.0;
  std::vector<double> null_stats;
  Decision decision = Decision::kAcceptH0;
  Variant variant = Variant::kMiNull;
  std::uint64_t seed = 0;
  std::chrono::duration<double, std::milli> wall_time{0};
};

/// (1 + #{m : null_m >= observed}) / (1 + M). Ties count against rejection.
double crt_p_value(std::span<const double> null_stats, double observed);

/// Nearest-neighbor sampling conditional independence test.
///
/// Splits the data into a 2/3 pool and a 1/3 test fold. Each repetition
/// subsamples the pool to the test-fold size, draws X~ at the test-fold Z via
/// 1-NN and scores it against the test-fold Y; the observed statistic is
/// computed once on the test fold. Repetitions run on independent RNG
/// streams, so results do not depend on the thread count.
CrtResult run_nnscit(const Dataset& data, const TestConfig& cfg);

/// Same pipeline with X~ drawn from a known conditional law instead of 1-NN.
CrtResult run_crt_with_oracle(const Dataset& data, const ConditionalSampler& sampler,
                              const TestConfig& cfg);

}  // namespace nnscit
