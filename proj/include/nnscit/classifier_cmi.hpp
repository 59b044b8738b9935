#pragma once

#include <cstddef>
#include <span>

#include "nnscit/dataset.hpp"
#include "nnscit/mlp.hpp"

namespace nnscit {

/// Floor applied to classifier probabilities before forming likelihood ratios.
inline constexpr double kProbabilityClip = 1e-3;

/// Minimum rows per class accepted by `estimate_kl`.
inline constexpr std::size_t kMinKlRows = 30;

/// Minimum rows accepted by `estimate_cmi`; each KL class then has kMinKlRows rows.
inline constexpr std::size_t kMinCmiRows = kMinKlRows;

/// Rows are cut into this many folds; each fold is evaluated by a classifier
/// trained on the others, i.e. a 2/3 : 1/3 train/evaluation split per fold.
inline constexpr std::size_t kKlFolds = 3;

struct KlEstimate {
  double value;       // nats
  std::size_t n_pos;  // evaluation rows drawn from f
  std::size_t n_neg;  // evaluation rows drawn from g
};

struct CmiEstimate {
  double value;  // i_xyz - i_xz, not floored
  double i_xyz;
  double i_xz;
};

/// Donsker-Varadhan plug-in from classifier outputs:
///   mean_f log L - log mean_g L,  L = a / (1 - a),  a clipped to [clip, 1 - clip].
double dv_kl_from_probabilities(std::span<const double> prob_f, std::span<const double> prob_g,
                                double clip = kProbabilityClip);

/// KL(f || g) from samples. Each class is split 2/3 : 1/3 into classifier
/// training and evaluation rows, a classifier separates f (label 1) from g,
/// and the plug-in is evaluated on held-out rows. With `cross_fit` the split
/// is rotated over kKlFolds folds and one plug-in is computed from the pooled
/// held-out probabilities, so every row is evaluated once; without it only
/// the first fold is used.
KlEstimate estimate_kl(const RowMatrix& samples_f, const RowMatrix& samples_g,
                       const TrainConfig& cfg, bool cross_fit = true);

/// Same estimator with the train/evaluation partition supplied by the caller.
KlEstimate estimate_kl_presplit(const RowMatrix& train_f, const RowMatrix& train_g,
                                const RowMatrix& eval_f, const RowMatrix& eval_g,
                                const TrainConfig& cfg);

/// I(X;Y|Z) as I(X;Y,Z) - I(X;Z). Each mutual information is a KL between
/// joint rows and rows whose x column has been permuted (within the training
/// and within the evaluation rows), with shared folds and independent
/// permutations. Needs n >= 30.
CmiEstimate estimate_cmi(const Dataset& data, const TrainConfig& cfg, bool cross_fit = true);

}  // namespace nnscit
