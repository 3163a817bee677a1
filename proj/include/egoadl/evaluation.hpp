#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "egoadl/features.hpp"
#include "egoadl/matrix.hpp"
#include "egoadl/models.hpp"
#include "egoadl/records.hpp"

namespace egoadl {

/// One leave-one-subject-out fold; indices refer to the input segment list.
struct Fold {
  std::string participant_id;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// One fold per participant, in participant-id order. Throws ValidationError
/// with fewer than two participants or any unlabeled segment.
std::vector<Fold> loso_split(std::span<const Segment> segments);

/// F1 per class; 0 where precision or recall has a zero denominator.
std::vector<double> per_class_f1(std::span<const int> truth, std::span<const int> pred, std::size_t k);

/// Support-weighted mean of per-class F1 over classes present in `truth`.
/// Throws std::invalid_argument on length mismatch or empty input.
double weighted_f1(std::span<const int> truth, std::span<const int> pred, std::size_t k);

struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::int64_t> counts;  // row = true class, column = predicted

  explicit ConfusionMatrix(std::size_t classes = 0) : k(classes), counts(classes * classes, 0) {}
  std::int64_t& at(std::size_t t, std::size_t p) { return counts[t * k + p]; }
  std::int64_t at(std::size_t t, std::size_t p) const { return counts[t * k + p]; }
  std::int64_t row_sum(std::size_t t) const;
  std::int64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

/// Throws std::out_of_range on a label outside [0, k).
ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, std::size_t k);

struct NormalizedConfusion {
  Matrix proportions;              // rows sum to 1, or all zero when flagged
  std::vector<bool> zero_support;  // per row
};

NormalizedConfusion normalize_rows(const ConfusionMatrix& m);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (N denominator)
};

MeanStd mean_std(std::span<const double> values);

/// Percentage of scores strictly greater than `threshold`.
double threshold_rate(std::span<const double> scores, double threshold = 0.5);

struct FoldResult {
  std::string held_out_participant;
  std::vector<SegmentKey> keys;
  std::vector<int> truth;
  std::vector<int> predicted;
  std::vector<double> per_class_f1;  // kNumAdl entries
  std::vector<std::int64_t> support;
  double weighted_f1 = 0.0;
  ConfusionMatrix confusion{kNumAdl};
  TrainingMeta training;
};

struct EvaluationReport {
  FeatureConfig feature_config;
  TrainConfig train_config;
  std::string mode;  // "loso" or "fixed-model"
  std::vector<FoldResult> folds;
  MeanStd weighted_f1;
  double percent_above_half = 0.0;
  ConfusionMatrix pooled{kNumAdl};
  NormalizedConfusion normalized;
};

struct EvalOptions {
  /// Folds evaluated concurrently; results do not depend on it.
  unsigned jobs = 1;
  MatchOptions match;
};

/// Featurizes every segment, then trains and tests one model per LOSO fold.
/// Fold seeds derive from (train seed, participant id). Training errors are
/// rethrown as ModelError naming the fold.
EvaluationReport run_loso(std::span<const Segment> segments, const CategoryTable& table,
                          const FeatureConfig& features, const TrainConfig& train_cfg, const EvalOptions& opts = {});

/// Scores a fixed model on labeled segments, grouped per participant.
EvaluationReport evaluate_model(const TrainedModel& model, std::span<const Segment> segments,
                                const CategoryTable& table, const EvalOptions& opts = {});

struct AblationCell {
  FeatureConfig features;
  EvaluationReport report;
};

/// All six feature configurations crossed with each train config, in
/// configuration-major order.
std::vector<AblationCell> run_ablation(std::span<const Segment> segments, const CategoryTable& table,
                                       std::span<const TrainConfig> train_configs, const EvalOptions& opts = {});

nlohmann::json report_to_json(const EvaluationReport& report);

/// Flat table, one row per (feature config, model).
std::string ablation_grid_csv(std::span<const AblationCell> cells);

}  // namespace egoadl
