#include "nnscit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "nnscit/error.hpp"

namespace nnscit {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

struct Activations {
  std::vector<Eigen::MatrixXd> hidden;  // post-tanh outputs of each hidden layer
  Eigen::VectorXd logits;
};

Activations forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& inputs) {
  Activations act;
  act.hidden.reserve(layers.size() - 1);
  const Eigen::MatrixXd* current = &inputs;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Eigen::MatrixXd pre = (*current) * layers[l].weights;
    pre.rowwise() += layers[l].bias;
    act.hidden.push_back(pre.array().tanh().matrix());
    current = &act.hidden.back();
  }
  const DenseLayer& out = layers.back();
  act.logits = ((*current) * out.weights).col(0).array() + out.bias(0);
  return act;
}

double data_loss(const Eigen::VectorXd& logits, std::span<const double> labels) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    sum += softplus(logits(i)) - labels[static_cast<std::size_t>(i)] * logits(i);
  }
  return sum / static_cast<double>(logits.size());
}

double penalty(const std::vector<DenseLayer>& layers, double l2) {
  if (l2 == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& layer : layers) sum += layer.weights.squaredNorm();
  return 0.5 * l2 * sum;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& src, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  std::size_t step = 0;
};

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                   Eigen::RowVectorXd::Zero(l.bias.size())});
  }
  return out;
}

void adam_update(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grad,
                 AdamState& state, double lr) {
  ++state.step;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  const double step_size = lr * std::sqrt(c2) / c1;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseAbs2();
    p.array() -= step_size * m.array() / (v.array().sqrt() + kAdamEps * std::sqrt(c2));
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weights, grad[l].weights, state.m[l].weights, state.v[l].weights);
    update(params[l].bias, grad[l].bias, state.m[l].bias, state.v[l].bias);
  }
}

LossGradient layers_loss_and_gradient(const std::vector<DenseLayer>& layers,
                                      const Eigen::MatrixXd& inputs,
                                      std::span<const double> labels, double l2_penalty) {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size() || inputs.rows() == 0) {
    throw DimensionError("loss_and_gradient: inputs and labels disagree in length");
  }
  const Activations act = forward(layers, inputs);
  const double batch = static_cast<double>(inputs.rows());

  LossGradient out{data_loss(act.logits, labels) + penalty(layers, l2_penalty), zeros_like(layers)};

  // d(loss)/d(logit) per row.
  Eigen::MatrixXd delta(inputs.rows(), 1);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    delta(i, 0) = (sigmoid(act.logits(i)) - labels[static_cast<std::size_t>(i)]) / batch;
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Eigen::MatrixXd& below = l == 0 ? inputs : act.hidden[l - 1];
    out.gradient[l].weights = below.transpose() * delta + l2_penalty * layers[l].weights;
    out.gradient[l].bias = delta.colwise().sum();
    if (l > 0) {
      delta = (delta * layers[l].weights.transpose()).cwiseProduct(
          (1.0 - act.hidden[l - 1].array().square()).matrix());
    }
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("TrainConfig: learning rate must be positive");
  }
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    throw ConfigError("TrainConfig: l2 penalty must be non-negative");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("TrainConfig: validation fraction must be in [0, 1)");
  }
  for (const auto w : hidden) {
    if (w == 0) throw ConfigError("TrainConfig: hidden widths must be positive");
  }
}

MlpClassifier::MlpClassifier(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("classifier needs at least one layer");
  mean_ = Eigen::RowVectorXd::Zero(layers_.front().weights.rows());
  scale_ = Eigen::RowVectorXd::Ones(layers_.front().weights.rows());
  check_shapes();
}

MlpClassifier::MlpClassifier(std::vector<DenseLayer> layers, Eigen::RowVectorXd feature_mean,
                             Eigen::RowVectorXd feature_scale)
    : layers_(std::move(layers)), mean_(std::move(feature_mean)), scale_(std::move(feature_scale)) {
  if (layers_.empty()) throw DimensionError("classifier needs at least one layer");
  check_shapes();
}

void MlpClassifier::check_shapes() const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.rows() == 0 || layer.weights.cols() == 0 ||
        layer.bias.size() != layer.weights.cols()) {
      throw DimensionError("classifier layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layers_[l - 1].weights.cols() != layer.weights.rows()) {
      throw DimensionError("classifier layers " + std::to_string(l - 1) + " and " +
                           std::to_string(l) + " do not chain");
    }
  }
  if (layers_.back().weights.cols() != 1) {
    throw DimensionError("classifier output layer must have width 1");
  }
  if (mean_.size() != layers_.front().weights.rows() || scale_.size() != mean_.size()) {
    throw DimensionError("standardization vectors do not match the input width");
  }
}

MlpClassifier MlpClassifier::zeros(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw DimensionError("classifier needs input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    layers.push_back({Eigen::MatrixXd::Zero(in, out), Eigen::RowVectorXd::Zero(out)});
  }
  return MlpClassifier(std::move(layers));
}

MlpClassifier MlpClassifier::initialize(const std::vector<std::size_t>& widths, Rng& rng) {
  MlpClassifier model = zeros(widths);
  for (std::size_t l = 0; l < model.layers_.size(); ++l) {
    auto& w = model.layers_[l].weights;
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return model;
}

std::vector<std::size_t> MlpClassifier::widths() const {
  std::vector<std::size_t> out{input_dim()};
  for (const auto& layer : layers_) out.push_back(static_cast<std::size_t>(layer.weights.cols()));
  return out;
}

Eigen::MatrixXd MlpClassifier::standardize(const RowMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != input_dim()) {
    throw DimensionError("feature dimension " + std::to_string(features.cols()) +
                         " does not match classifier input width " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd out = features;
  out.rowwise() -= mean_;
  out.array().rowwise() /= scale_.array();
  return out;
}

Eigen::VectorXd MlpClassifier::logits_standardized(const Eigen::MatrixXd& inputs) const {
  return forward(layers_, inputs).logits;
}

std::vector<double> MlpClassifier::predict_proba(const RowMatrix& features) const {
  const Eigen::VectorXd z = logits_standardized(standardize(features));
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  std::vector<double> out(static_cast<std::size_t>(z.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(sigmoid(z(static_cast<Eigen::Index>(i))), lo, hi);
  }
  return out;
}

nlohmann::json MlpClassifier::to_json() const {
  nlohmann::json j;
  j["widths"] = widths();
  j["feature_mean"] = std::vector<double>(mean_.data(), mean_.data() + mean_.size());
  j["feature_scale"] = std::vector<double>(scale_.data(), scale_.data() + scale_.size());
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : layers_) {
    nlohmann::json lj;
    std::vector<std::vector<double>> w(static_cast<std::size_t>(layer.weights.rows()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        w[static_cast<std::size_t>(r)].push_back(layer.weights(r, c));
      }
    }
    lj["weights"] = w;
    lj["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    lj["activation"] = &layer == &layers_.back() ? "logistic" : "tanh";
    j["layers"].push_back(lj);
  }
  return j;
}

MlpClassifier MlpClassifier::from_json(const nlohmann::json& j) {
  std::vector<DenseLayer> layers;
  for (const auto& lj : j.at("layers")) {
    const auto w = lj.at("weights").get<std::vector<std::vector<double>>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    DenseLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(w.size()),
                                     static_cast<Eigen::Index>(b.size())),
                     Eigen::Map<const Eigen::RowVectorXd>(b.data(), static_cast<Eigen::Index>(b.size()))};
    for (std::size_t r = 0; r < w.size(); ++r) {
      if (w[r].size() != b.size()) throw DimensionError("weight dump has ragged rows");
      for (std::size_t c = 0; c < b.size(); ++c) {
        layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r][c];
      }
    }
    layers.push_back(std::move(layer));
  }
  const auto mean = j.at("feature_mean").get<std::vector<double>>();
  const auto scale = j.at("feature_scale").get<std::vector<double>>();
  return MlpClassifier(
      std::move(layers),
      Eigen::Map<const Eigen::RowVectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
      Eigen::Map<const Eigen::RowVectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size())));
}

LossGradient loss_and_gradient(const MlpClassifier& model, const Eigen::MatrixXd& inputs,
                               std::span<const double> labels, double l2_penalty) {
  return layers_loss_and_gradient(model.layers(), inputs, labels, l2_penalty);
}

double loss_value(const MlpClassifier& model, const Eigen::MatrixXd& inputs,
                  std::span<const double> labels, double l2_penalty) {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size() || inputs.rows() == 0) {
    throw DimensionError("loss_value: inputs and labels disagree in length");
  }
  return data_loss(forward(model.layers(), inputs).logits, labels) +
         penalty(model.layers(), l2_penalty);
}

MlpClassifier train(const RowMatrix& positive, const RowMatrix& negative, const TrainConfig& cfg,
                    TrainHistory* history) {
  cfg.validate();
  if (positive.rows() == 0 || negative.rows() == 0) {
    throw TooFewSamplesError("train: both classes need at least one row");
  }
  if (positive.cols() != negative.cols() || positive.cols() == 0) {
    throw DimensionError("train: classes have different feature dimensions (" +
                         std::to_string(positive.cols()) + " vs " +
                         std::to_string(negative.cols()) + ")");
  }
  const auto n_pos = static_cast<std::size_t>(positive.rows());
  const auto n_neg = static_cast<std::size_t>(negative.rows());
  const auto dim = positive.cols();

  Rng rng(cfg.seed, 0x7a1a);

  // Stratified validation split.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  auto carve = [&](std::size_t offset, std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), offset);
    rng.shuffle(std::span(idx));
    std::size_t n_val = 0;
    if (cfg.validation_fraction > 0.0 && count >= 5) {
      n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(count)));
      n_val = std::max<std::size_t>(n_val, 1);
    }
    val_rows.insert(val_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_rows.insert(train_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  };
  carve(0, n_pos);
  carve(n_pos, n_neg);
  const bool early_stopping = !val_rows.empty() && cfg.patience > 0;
  if (!early_stopping) {
    train_rows.insert(train_rows.end(), val_rows.begin(), val_rows.end());
    val_rows.clear();
  }

  Eigen::MatrixXd pooled(static_cast<Eigen::Index>(n_pos + n_neg), dim);
  pooled.topRows(static_cast<Eigen::Index>(n_pos)) = positive;
  pooled.bottomRows(static_cast<Eigen::Index>(n_neg)) = negative;
  std::vector<double> labels(n_pos + n_neg, 0.0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1.0);

  // Standardize with training-row statistics only.
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(dim);
  for (const auto r : train_rows) mean += pooled.row(static_cast<Eigen::Index>(r));
  mean /= static_cast<double>(train_rows.size());
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(dim);
  for (const auto r : train_rows) {
    var += (pooled.row(static_cast<Eigen::Index>(r)) - mean).array().square().matrix();
  }
  var /= static_cast<double>(train_rows.size());
  Eigen::RowVectorXd scale = var.array().sqrt();
  for (Eigen::Index c = 0; c < dim; ++c) {
    if (!(scale(c) > 1e-12)) scale(c) = 1.0;
  }
  pooled.rowwise() -= mean;
  pooled.array().rowwise() /= scale.array();

  std::vector<std::size_t> widths{static_cast<std::size_t>(dim)};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  MlpClassifier init = MlpClassifier::initialize(widths, rng);
  std::vector<DenseLayer> params = init.layers();

  auto labels_of = [&](std::span<const std::size_t> rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = labels[rows[i]];
    return out;
  };
  const Eigen::MatrixXd val_x = gather_rows(pooled, val_rows);
  const std::vector<double> val_y = labels_of(val_rows);
  const Eigen::MatrixXd train_x = history ? gather_rows(pooled, train_rows) : Eigen::MatrixXd();
  const std::vector<double> train_y = history ? labels_of(train_rows) : std::vector<double>();

  auto eval_val = [&](const std::vector<DenseLayer>& p) {
    return data_loss(forward(p, val_x).logits, val_y);
  };

  std::vector<DenseLayer> best = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  if (history) *history = TrainHistory{};

  AdamState adam{zeros_like(params), zeros_like(params), 0};
  std::vector<std::size_t> order = train_rows;
  std::size_t epoch = 0;
  for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const Eigen::MatrixXd bx = gather_rows(pooled, batch);
      const std::vector<double> by = labels_of(batch);
      const auto lg = layers_loss_and_gradient(params, bx, by, cfg.l2_penalty);
      adam_update(params, lg.gradient, adam, cfg.learning_rate);
    }
    if (history) {
      history->train_loss.push_back(data_loss(forward(params, train_x).logits, train_y) +
                                    penalty(params, cfg.l2_penalty));
    }
    if (early_stopping) {
      const double v = eval_val(params);
      if (history) history->validation_loss.push_back(v);
      if (v < best_val) {
        best_val = v;
        best = params;
        best_epoch = epoch;
      } else if (epoch - best_epoch >= cfg.patience) {
        break;
      }
    }
  }
  const std::size_t epochs_run = std::min(epoch, cfg.epochs);
  if (!early_stopping) {
    best = std::move(params);
    best_epoch = epochs_run;
  }
  if (history) {
    history->best_epoch = best_epoch;
    history->epochs_run = epochs_run;
  }
  return MlpClassifier(std::move(best), std::move(mean), std::move(scale));
}

std::vector<double> predict_proba(const MlpClassifier& model, const RowMatrix& features) {
  return model.predict_proba(features);
}

void save_weights(const std::filesystem::path& path, const MlpClassifier& model) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  out << model.to_json().dump(2) << '\n';
}

}  // namespace nnscit
