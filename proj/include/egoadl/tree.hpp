#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "egoadl/matrix.hpp"
#include "egoadl/random.hpp"

namespace egoadl {

/// Binary decision tree; rows with x[feature] <= threshold go left.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };

  std::vector<Node> nodes;
  std::size_t value_width = 1;
  std::vector<double> values;  // nodes.size() x value_width, meaningful for leaves

  int leaf_index(std::span<const double> x) const;
  std::span<const double> leaf_value(std::span<const double> x) const {
    return {values.data() + static_cast<std::size_t>(leaf_index(x)) * value_width, value_width};
  }
};

struct ClassificationTreeParams {
  std::size_t max_features = 0;  // features examined per split
  std::size_t min_samples_split = 2;
  std::size_t max_depth = 0;  // 0 => unlimited
};

/// Gini tree over rows with positive sample weight. Leaves hold the
/// normalized weighted class distribution. Feature candidates per node are
/// drawn from `rng`; drawing continues past constant features until at least
/// one usable feature has been examined.
DecisionTree build_classification_tree(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                                       std::span<const double> sample_weight, const ClassificationTreeParams& params,
                                       CounterRng& rng);

/// Row orderings per feature (stable by value), shared across boosting trees.
std::vector<std::vector<std::size_t>> presort_features(const Matrix& x);

struct RegressionTreeFit {
  DecisionTree tree;             // values left zero; caller fills leaves
  std::vector<int> leaf_of_row;  // node index for each training row
};

/// Squared-error tree grown level by level to `max_depth`.
RegressionTreeFit build_regression_tree(const Matrix& x, const std::vector<std::vector<std::size_t>>& order,
                                        std::span<const double> target, std::size_t max_depth,
                                        std::size_t min_samples_split);

/// Split point between two sorted distinct values that keeps `lo` on the left.
double split_threshold(double lo, double hi);

}  // namespace egoadl
