#pragma once

// JSON conversions for configuration records shared by model files, reports
// and the CLI.

#include <json.hpp>

#include "egoadl/features.hpp"
#include "egoadl/models.hpp"

namespace egoadl {

nlohmann::json to_json(const FeatureConfig& cfg);
FeatureConfig feature_config_from_json(const nlohmann::json& j);

/// Hyperparameters of one model kind only.
nlohmann::json hyperparameters_to_json(ModelKind kind, const Hyperparameters& hp);
/// Overlays any keys present in `j` ({"logreg": {...}, "rf": {...}, ...} or
/// the flat per-kind object when `kind` is given). Unknown keys throw ParseError.
void apply_hyperparameters(Hyperparameters& hp, const nlohmann::json& j);
void apply_hyperparameters(Hyperparameters& hp, ModelKind kind, const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& cfg);

}  // namespace egoadl
