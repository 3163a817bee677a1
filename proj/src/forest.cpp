#include <algorithm>
#include <cmath>

#include "egoadl/parallel.hpp"
#include "model_impl.hpp"

namespace egoadl::detail {

ForestModel train_forest(const Matrix& x, std::span<const int> y, std::size_t k, const ForestParams& p,
                         std::uint64_t seed, unsigned jobs, TrainingMeta& meta) {
  const std::size_t n = x.rows();
  std::vector<double> class_w(k, 1.0);
  if (p.balanced) {
    class_w = balanced_weights(class_counts(y, k));
  }

  ClassificationTreeParams tp;
  tp.max_features = p.max_features > 0 ? static_cast<std::size_t>(p.max_features)
                                       : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
  tp.min_samples_split = static_cast<std::size_t>(std::max(2, p.min_samples_split));
  tp.max_depth = static_cast<std::size_t>(std::max(0, p.max_depth));

  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(p.n_trees));
  parallel_for(model.trees.size(), jobs, [&](std::size_t t) {
    CounterRng rng(seed, t);
    std::vector<double> w(n, 0.0);
    if (p.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) w[rng.below(n)] += 1.0;
    } else {
      std::fill(w.begin(), w.end(), 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) w[i] *= class_w[static_cast<std::size_t>(y[i])];
    model.trees[t] = build_classification_tree(x, y, k, w, tp, rng);
  });
  meta.iterations = p.n_trees;
  meta.stop_reason = "converged";
  return model;
}

void forest_proba(const ForestModel& m, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& tree : m.trees) {
    auto v = tree.leaf_value(x);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += v[c];
  }
  double sum = 0.0;
  for (double v : out) sum += v;
  if (sum > 0.0) {
    for (double& v : out) v /= sum;
  } else {
    for (double& v : out) v = 1.0 / static_cast<double>(out.size());
  }
}

}  // namespace egoadl::detail
