#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "nnscit/dataset.hpp"
#include "nnscit/rng.hpp"

namespace nnscit {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {64, 64};
  /// Fraction of each class held out for early stopping; 0 disables it.
  double validation_fraction = 0.2;
  std::size_t patience = 20;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Fully connected layer, `weights` is (inputs x outputs).
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::RowVectorXd bias;
};

/// Feed-forward binary classifier: tanh hidden layers, one logistic output.
///
/// Inputs are standardized with per-feature statistics stored in the model,
/// so callers always pass raw features.
class MlpClassifier {
 public:
  /// Layers with identity input standardization.
  explicit MlpClassifier(std::vector<DenseLayer> layers);
  MlpClassifier(std::vector<DenseLayer> layers, Eigen::RowVectorXd feature_mean,
                Eigen::RowVectorXd feature_scale);

  /// All weights and biases zero.
  static MlpClassifier zeros(const std::vector<std::size_t>& widths);
  /// Glorot-uniform weights, zero biases.
  static MlpClassifier initialize(const std::vector<std::size_t>& widths, Rng& rng);

  std::vector<std::size_t> widths() const;
  std::size_t input_dim() const { return static_cast<std::size_t>(layers_.front().weights.rows()); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const Eigen::RowVectorXd& feature_mean() const { return mean_; }
  const Eigen::RowVectorXd& feature_scale() const { return scale_; }

  /// Applies the stored standardization.
  Eigen::MatrixXd standardize(const RowMatrix& features) const;

  /// Pre-sigmoid outputs for already-standardized inputs.
  Eigen::VectorXd logits_standardized(const Eigen::MatrixXd& inputs) const;

  /// Pr(label = 1 | features) per row, each strictly inside (0, 1).
  std::vector<double> predict_proba(const RowMatrix& features) const;

  nlohmann::json to_json() const;
  static MlpClassifier from_json(const nlohmann::json& j);

 private:
  void check_shapes() const;

  std::vector<DenseLayer> layers_;
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

/// Mean binary cross-entropy plus 0.5 * l2 * sum of squared weights (biases
/// are not penalized), and its gradient with respect to every parameter.
struct LossGradient {
  double loss;
  std::vector<DenseLayer> gradient;
};

LossGradient loss_and_gradient(const MlpClassifier& model, const Eigen::MatrixXd& inputs,
                               std::span<const double> labels, double l2_penalty);
double loss_value(const MlpClassifier& model, const Eigen::MatrixXd& inputs,
                  std::span<const double> labels, double l2_penalty);

struct TrainHistory {
  std::vector<double> train_loss;       // per epoch, full pass over training rows
  std::vector<double> validation_loss;  // per epoch; empty without a validation split
  std::size_t best_epoch = 0;           // 1-based epoch whose weights were kept
  std::size_t epochs_run = 0;
};

/// Trains on rows of `positive` (label 1) and `negative` (label 0) with Adam.
/// With a validation split, stops after `patience` epochs without improvement
/// and returns the best weights seen.
MlpClassifier train(const RowMatrix& positive, const RowMatrix& negative, const TrainConfig& cfg,
                    TrainHistory* history = nullptr);

std::vector<double> predict_proba(const MlpClassifier& model, const RowMatrix& features);

void save_weights(const std::filesystem::path& path, const MlpClassifier& model);

}  // namespace nnscit
