#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "egoadl/features.hpp"
#include "egoadl/matrix.hpp"
#include "egoadl/taxonomy.hpp"
#include "egoadl/tree.hpp"

namespace egoadl {

enum class ModelKind { logreg, random_forest, gradient_boosting, mlp };

/// Short CLI name: logreg, rf, gb, mlp.
std::string_view to_string(ModelKind kind);
/// Accepts short and long names (rf / random_forest, ...).
std::optional<ModelKind> parse_model_kind(std::string_view text);

// Defaults follow the documented library defaults the reference setup relied on.

struct LogRegParams {
  double l2 = 1.0;  // (l2/2)·‖W‖², bias unpenalized
  int max_iter = 1000;
  double grad_tol = 1e-4;  // stop when ‖∇‖∞ < grad_tol
  bool balanced = true;
};

struct ForestParams {
  int n_trees = 100;
  int max_features = 0;  // 0 => ceil(sqrt(d))
  int min_samples_split = 2;
  int max_depth = 0;  // 0 => unlimited
  bool bootstrap = true;
  bool balanced = true;
};

struct BoostParams {
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_split = 2;
};

struct MlpParams {
  int hidden = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double lr_divisor = 5.0;
  double tol = 1e-4;
  int lr_patience = 2;  // epochs without training-loss improvement before dividing the step
  double momentum = 0.9;
  bool early_stopping = true;
  double validation_fraction = 0.1;
  int patience = 10;
  int max_epochs = 200;
};

struct Hyperparameters {
  LogRegParams logreg;
  ForestParams forest;
  BoostParams boost;
  MlpParams mlp;
};

struct TrainConfig {
  ModelKind kind = ModelKind::logreg;
  std::uint64_t seed = 42;
  Hyperparameters hp;
  /// Worker threads for tree construction; never changes results.
  unsigned jobs = 1;
};

/// w_c = N / (K · n_c). Throws std::invalid_argument when any count is zero.
std::vector<double> balanced_weights(std::span<const int> counts);

struct LogRegModel {
  Matrix weights;  // K x d
  std::vector<double> bias;
};

struct ForestModel {
  std::vector<DecisionTree> trees;  // leaf value = class distribution
};

struct BoostModel {
  std::vector<double> init;                 // K raw scores
  double learning_rate = 0.1;
  std::vector<std::vector<DecisionTree>> stages;  // stage x K, leaf value = step
};

struct MlpModel {
  std::size_t hidden = 0;
  std::vector<double> params;  // W1 (d x h), b1 (h), W2 (h x K), b2 (K)
};

struct TrainingMeta {
  int iterations = 0;
  std::string stop_reason;  // converged | max-iterations | early-stopped
};

struct TrainedModel {
  ModelKind kind = ModelKind::logreg;
  Hyperparameters hp;
  std::uint64_t seed = 0;
  FeatureConfig feature_config;
  std::size_t n_features = 0;
  std::vector<int> class_ids;           // sorted label ids seen in training
  std::vector<std::string> class_names;
  TrainingMeta meta;
  std::variant<LogRegModel, ForestModel, BoostModel, MlpModel> params;

  std::size_t num_classes() const { return class_ids.size(); }
};

/// Trains on a feature matrix with integer labels. Throws ModelError on an
/// empty or ragged input, a single class, a label/row count mismatch, or a
/// non-finite feature.
TrainedModel train(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg,
                   const FeatureConfig& features = {}, std::vector<std::string> class_names = {});

/// Trains on featurized segments. All vectors must share one config.
TrainedModel train(std::span<const FeatureVector> features, std::span<const AdlLabel> labels,
                   const TrainConfig& cfg);

/// Probabilities over model.class_ids. No feature-config check.
std::vector<double> predict_proba(const TrainedModel& model, std::span<const double> x);
/// Checks that `x` was produced under the model's feature config.
std::vector<double> predict_proba(const TrainedModel& model, const FeatureVector& x);
/// Label id of the most probable class (lowest index on ties).
int predict_label(const TrainedModel& model, std::span<const double> x);
int predict_label(const TrainedModel& model, const FeatureVector& x);

inline constexpr int kModelSchemaVersion = 1;

/// JSON document with an embedded SHA-256 digest; byte-identical for equal models.
std::string save_model(const TrainedModel& model);
/// Throws ParseError on malformed or tampered documents and on unsupported
/// schema versions.
TrainedModel load_model(std::string_view document);

}  // namespace egoadl
