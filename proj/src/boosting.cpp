#include <algorithm>
#include <cmath>

#include "egoadl/optim.hpp"
#include "model_impl.hpp"

namespace egoadl::detail {

// Multinomial deviance boosting: one regression tree per class per stage,
// fit to the residual y_k - p_k, with a single Newton step per leaf.
BoostModel train_boost(const Matrix& x, std::span<const int> y, std::size_t k, const BoostParams& p,
                       TrainingMeta& meta) {
  const std::size_t n = x.rows();
  BoostModel model;
  model.learning_rate = p.learning_rate;
  model.init.assign(k, 0.0);
  const auto counts = class_counts(y, k);
  for (std::size_t c = 0; c < k; ++c) {
    const double prior = std::max(static_cast<double>(counts[c]) / static_cast<double>(n), 1e-300);
    model.init[c] = std::log(prior);
  }

  const auto order = presort_features(x);
  Matrix raw(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) raw(i, c) = model.init[c];
  }
  Matrix prob(n, k);
  std::vector<double> residual(n);
  const double newton_scale = static_cast<double>(k - 1) / static_cast<double>(k);

  for (int stage = 0; stage < p.n_stages; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = prob.row(i);
      std::copy(raw.row(i).begin(), raw.row(i).end(), row.begin());
      optim::softmax_inplace(row);
    }
    std::vector<DecisionTree> trees;
    trees.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        residual[i] = (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0) - prob(i, c);
      }
      auto fit = build_regression_tree(x, order, residual, static_cast<std::size_t>(p.max_depth),
                                       static_cast<std::size_t>(std::max(2, p.min_samples_split)));
      std::vector<double> num(fit.tree.nodes.size(), 0.0), den(fit.tree.nodes.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto leaf = static_cast<std::size_t>(fit.leaf_of_row[i]);
        const double r = residual[i];
        num[leaf] += r;
        den[leaf] += std::abs(r) * (1.0 - std::abs(r));
      }
      for (std::size_t j = 0; j < fit.tree.nodes.size(); ++j) {
        fit.tree.values[j] = den[j] < 1e-150 ? 0.0 : newton_scale * num[j] / den[j];
      }
      for (std::size_t i = 0; i < n; ++i) {
        raw(i, c) += p.learning_rate * fit.tree.values[static_cast<std::size_t>(fit.leaf_of_row[i])];
      }
      trees.push_back(std::move(fit.tree));
    }
    model.stages.push_back(std::move(trees));
  }
  meta.iterations = p.n_stages;
  meta.stop_reason = "max-iterations";
  return model;
}

void boost_proba(const BoostModel& m, std::span<const double> x, std::span<double> out) {
  std::copy(m.init.begin(), m.init.end(), out.begin());
  for (const auto& stage : m.stages) {
    for (std::size_t c = 0; c < stage.size(); ++c) out[c] += m.learning_rate * stage[c].leaf_value(x)[0];
  }
  optim::softmax_inplace(out);
}

}  // namespace egoadl::detail
