#include "nnscit/crt.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "nnscit/classifier_cmi.hpp"
#include "nnscit/error.hpp"
#include "nnscit/nn_index.hpp"
#include "nnscit/parallel.hpp"

namespace nnscit {
namespace {

constexpr std::uint64_t kSplitTag = 1;
constexpr std::uint64_t kObservedTag = 2;
constexpr std::uint64_t kRepetitionTag = 3;
constexpr std::uint64_t kNullClassifierTag = 4;

using PseudoSampler = std::function<std::vector<double>(const SplitPair&, Rng&)>;

CrtResult run_pipeline(const Dataset& data, const TestConfig& cfg, const PseudoSampler& draw) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  if (data.n() < kMinTestRows) {
    throw TooFewSamplesError("the test needs at least " + std::to_string(kMinTestRows) +
                             " rows, got " + std::to_string(data.n()));
  }
  const SplitPair parts = split(data, mix_seed(cfg.seed, kSplitTag));
  const Dataset& test = parts.u2;
  const std::size_t reps = cfg.repetitions;

  CrtResult result;
  result.variant = cfg.variant;
  result.seed = cfg.seed;
  result.null_stats.assign(reps, 0.0);

  // Slot 0 is the observed statistic; slots 1..M are the repetitions.
  parallel_for(reps + 1, cfg.threads, [&](std::size_t slot) {
    if (slot == 0) {
      if (cfg.variant == Variant::kMiOnly) {
        result.observed = estimate_mi(test.x(), test.y(), cfg.k).value;
      } else {
        TrainConfig cls = cfg.classifier;
        cls.seed = mix_seed(cfg.seed, kObservedTag);
        result.observed = estimate_cmi(test, cls, cfg.cross_fit).value;
      }
      return;
    }
    try {
      Rng rng(mix_seed(cfg.seed, kRepetitionTag), slot);
      std::vector<double> pseudo_x = draw(parts, rng);
      if (cfg.variant == Variant::kCmiNull) {
        TrainConfig cls = cfg.classifier;
        cls.seed = mix_seed(mix_seed(cfg.seed, kNullClassifierTag), slot);
        result.null_stats[slot - 1] =
            estimate_cmi(test.with_x(std::move(pseudo_x)), cls, cfg.cross_fit).value;
      } else {
        result.null_stats[slot - 1] = estimate_mi(pseudo_x, test.y(), cfg.k).value;
      }
    } catch (const Error& e) {
      throw RepetitionError(slot, e.what());
    }
  });

  result.p_value = crt_p_value(result.null_stats, result.observed);
  result.decision = result.p_value < cfg.alpha ? Decision::kRejectH0 : Decision::kAcceptH0;
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kCmiNull: return "cmi-null";
    case Variant::kMiNull: return "mi-null";
    case Variant::kMiOnly: return "mi-only";
  }
  return "unknown";
}

std::string_view to_string(Decision decision) {
  return decision == Decision::kRejectH0 ? "reject-H0" : "accept-H0";
}

Variant parse_variant(std::string_view name) {
  if (name == "cmi-null") return Variant::kCmiNull;
  if (name == "mi-null") return Variant::kMiNull;
  if (name == "mi-only") return Variant::kMiOnly;
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected cmi-null, mi-null or mi-only)");
}

void TestConfig::validate() const {
  if (repetitions < 1) throw ConfigError("test config: the number of repetitions M must be >= 1");
  if (k < 1) throw ConfigError("test config: k must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("test config: alpha must lie in (0, 1)");
  classifier.validate();
}

double crt_p_value(std::span<const double> null_stats, double observed) {
  std::size_t at_least = 0;
  for (const double s : null_stats) {
    if (s >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(1 + null_stats.size());
}

CrtResult run_nnscit(const Dataset& data, const TestConfig& cfg) {
  return run_pipeline(data, cfg, [](const SplitPair& parts, Rng& rng) {
    const Dataset reference = subsample(parts.u1, parts.u2.n(), rng);
    const NnIndex index = build_index(reference);
    return sample_1nn(index, parts.u2);
  });
}

CrtResult run_crt_with_oracle(const Dataset& data, const ConditionalSampler& sampler,
                              const TestConfig& cfg) {
  if (!sampler) throw ConfigError("oracle CRT needs a conditional sampler");
  return run_pipeline(data, cfg, [&sampler](const SplitPair& parts, Rng& rng) {
    const Dataset& test = parts.u2;
    std::vector<double> out(test.n());
    for (std::size_t i = 0; i < test.n(); ++i) out[i] = sampler(test.z_row(i), rng);
    return out;
  });
}

}  // namespace nnscit
