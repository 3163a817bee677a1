#pragma once

// Per-kind training and inference, dispatched from models.cpp. Labels here
// are dense class indices 0..K-1.

#include <span>
#include <vector>

#include "egoadl/models.hpp"

namespace egoadl::detail {

LogRegModel train_logreg(const Matrix& x, std::span<const int> y, std::size_t k, const LogRegParams& p,
                         TrainingMeta& meta);
void logreg_proba(const LogRegModel& m, std::span<const double> x, std::span<double> out);

ForestModel train_forest(const Matrix& x, std::span<const int> y, std::size_t k, const ForestParams& p,
                         std::uint64_t seed, unsigned jobs, TrainingMeta& meta);
void forest_proba(const ForestModel& m, std::span<const double> x, std::span<double> out);

BoostModel train_boost(const Matrix& x, std::span<const int> y, std::size_t k, const BoostParams& p,
                       TrainingMeta& meta);
void boost_proba(const BoostModel& m, std::span<const double> x, std::span<double> out);

MlpModel train_mlp(const Matrix& x, std::span<const int> y, std::size_t k, const MlpParams& p, std::uint64_t seed,
                   TrainingMeta& meta);
void mlp_proba(const MlpModel& m, std::size_t inputs, std::size_t k, std::span<const double> x,
               std::span<double> out);

std::vector<int> class_counts(std::span<const int> y, std::size_t k);

}  // namespace egoadl::detail
