#include "nnscit/classifier_cmi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nnscit/error.hpp"

namespace nnscit {
namespace {

constexpr std::uint64_t kSplitStream = 0xc1a5;
constexpr std::uint64_t kPermuteXyzStream = 0x9e01;
constexpr std::uint64_t kPermuteXzStream = 0x9e02;

using Rows = std::vector<std::size_t>;

struct Fold {
  Rows train;
  Rows eval;
};

RowMatrix gather(const RowMatrix& src, std::span<const std::size_t> rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

// Shuffled rows cut into kKlFolds contiguous blocks; block k is fold k's
// evaluation part. Without cross-fitting only fold 0 is returned.
std::vector<Fold> make_folds(std::size_t n, Rng& rng, bool cross_fit) {
  Rows order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  std::vector<Fold> folds;
  const std::size_t used = cross_fit ? kKlFolds : 1;
  for (std::size_t k = 0; k < used; ++k) {
    const std::size_t lo = k * n / kKlFolds;
    const std::size_t hi = k + 1 == kKlFolds ? n : (k + 1) * n / kKlFolds;
    Fold fold;
    for (std::size_t i = 0; i < n; ++i) (i >= lo && i < hi ? fold.eval : fold.train).push_back(order[i]);
    folds.push_back(std::move(fold));
  }
  return folds;
}

// Columns [x, (y,) z] for the given rows, with x taken from `x_rows`.
RowMatrix features(const Dataset& data, std::span<const std::size_t> rows,
                   std::span<const std::size_t> x_rows, bool with_y) {
  const auto offset = with_y ? 2 : 1;
  RowMatrix out(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(data.dz()) + offset);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out(r, 0) = data.x()[x_rows[i]];
    if (with_y) out(r, 1) = data.y()[rows[i]];
    out.row(r).tail(static_cast<Eigen::Index>(data.dz())) =
        data.z().row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Rows permuted(const Rows& rows, Rng& rng) {
  Rows out = rows;
  rng.shuffle(std::span(out));
  return out;
}

// Held-out classifier probabilities, appended across folds.
struct Pooled {
  std::vector<double> f;
  std::vector<double> g;

  void add(const RowMatrix& train_f, const RowMatrix& train_g, const RowMatrix& eval_f,
           const RowMatrix& eval_g, const TrainConfig& cfg) {
    const MlpClassifier model = train(train_f, train_g, cfg);
    const auto pf = model.predict_proba(eval_f);
    const auto pg = model.predict_proba(eval_g);
    f.insert(f.end(), pf.begin(), pf.end());
    g.insert(g.end(), pg.begin(), pg.end());
  }

  KlEstimate estimate() const {
    return KlEstimate{dv_kl_from_probabilities(f, g), f.size(), g.size()};
  }
};

TrainConfig fold_config(const TrainConfig& cfg, std::uint64_t stream, std::size_t fold) {
  TrainConfig out = cfg;
  out.seed = mix_seed(mix_seed(cfg.seed, stream), fold);
  return out;
}

double mutual_information_term(const Dataset& data, const std::vector<Fold>& folds, bool with_y,
                               std::uint64_t permute_stream, const TrainConfig& cfg) {
  Rng rng(cfg.seed, permute_stream);
  Pooled pooled;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const Fold& fold = folds[k];
    const Rows train_perm = permuted(fold.train, rng);
    const Rows eval_perm = permuted(fold.eval, rng);
    pooled.add(features(data, fold.train, fold.train, with_y),
               features(data, fold.train, train_perm, with_y),
               features(data, fold.eval, fold.eval, with_y),
               features(data, fold.eval, eval_perm, with_y), fold_config(cfg, permute_stream, k));
  }
  return pooled.estimate().value;
}

}  // namespace

double dv_kl_from_probabilities(std::span<const double> prob_f, std::span<const double> prob_g,
                                double clip) {
  if (prob_f.empty() || prob_g.empty()) {
    throw TooFewSamplesError("KL plug-in needs at least one evaluation row per class");
  }
  if (!(clip > 0.0 && clip < 0.5)) throw DomainError("probability clip must lie in (0, 0.5)");
  auto log_ratio = [clip](double a) {
    a = std::clamp(a, clip, 1.0 - clip);
    return std::log(a) - std::log1p(-a);
  };
  double mean_log_f = 0.0;
  for (const double a : prob_f) mean_log_f += log_ratio(a);
  mean_log_f /= static_cast<double>(prob_f.size());
  double mean_ratio_g = 0.0;
  for (const double a : prob_g) mean_ratio_g += std::exp(log_ratio(a));
  mean_ratio_g /= static_cast<double>(prob_g.size());
  return mean_log_f - std::log(mean_ratio_g);
}

KlEstimate estimate_kl_presplit(const RowMatrix& train_f, const RowMatrix& train_g,
                                const RowMatrix& eval_f, const RowMatrix& eval_g,
                                const TrainConfig& cfg) {
  const auto total_f = static_cast<std::size_t>(train_f.rows() + eval_f.rows());
  const auto total_g = static_cast<std::size_t>(train_g.rows() + eval_g.rows());
  if (total_f < kMinKlRows || total_g < kMinKlRows) {
    throw TooFewSamplesError("KL estimate needs at least " + std::to_string(kMinKlRows) +
                             " rows per class, got " + std::to_string(total_f) + " and " +
                             std::to_string(total_g));
  }
  if (eval_f.rows() == 0 || eval_g.rows() == 0 || train_f.rows() == 0 || train_g.rows() == 0) {
    throw TooFewSamplesError("KL estimate needs training and evaluation rows in both classes");
  }
  const auto dim = train_f.cols();
  if (train_g.cols() != dim || eval_f.cols() != dim || eval_g.cols() != dim) {
    throw DimensionError("KL estimate: sample sets have different dimensions");
  }
  Pooled pooled;
  pooled.add(train_f, train_g, eval_f, eval_g, cfg);
  return pooled.estimate();
}

KlEstimate estimate_kl(const RowMatrix& samples_f, const RowMatrix& samples_g,
                       const TrainConfig& cfg, bool cross_fit) {
  const auto nf = static_cast<std::size_t>(samples_f.rows());
  const auto ng = static_cast<std::size_t>(samples_g.rows());
  if (nf < kMinKlRows || ng < kMinKlRows) {
    throw TooFewSamplesError("KL estimate needs at least " + std::to_string(kMinKlRows) +
                             " rows per class, got " + std::to_string(nf) + " and " +
                             std::to_string(ng));
  }
  if (samples_f.cols() != samples_g.cols()) {
    throw DimensionError("KL estimate: sample sets have different dimensions (" +
                         std::to_string(samples_f.cols()) + " vs " +
                         std::to_string(samples_g.cols()) + ")");
  }
  Rng rng(cfg.seed, kSplitStream);
  const auto folds_f = make_folds(nf, rng, cross_fit);
  const auto folds_g = make_folds(ng, rng, cross_fit);
  Pooled pooled;
  for (std::size_t k = 0; k < folds_f.size(); ++k) {
    pooled.add(gather(samples_f, folds_f[k].train), gather(samples_g, folds_g[k].train),
               gather(samples_f, folds_f[k].eval), gather(samples_g, folds_g[k].eval),
               fold_config(cfg, kSplitStream, k));
  }
  return pooled.estimate();
}

CmiEstimate estimate_cmi(const Dataset& data, const TrainConfig& cfg, bool cross_fit) {
  const std::size_t n = data.n();
  if (n < kMinCmiRows) {
    throw TooFewSamplesError("conditional MI estimate needs at least " +
                             std::to_string(kMinCmiRows) + " rows, got " + std::to_string(n));
  }
  Rng rng(cfg.seed, kSplitStream);
  const auto folds = make_folds(n, rng, cross_fit);
  const double i_xyz = mutual_information_term(data, folds, true, kPermuteXyzStream, cfg);
  const double i_xz = mutual_information_term(data, folds, false, kPermuteXzStream, cfg);
  return CmiEstimate{i_xyz - i_xz, i_xyz, i_xz};
}

}  // namespace nnscit
