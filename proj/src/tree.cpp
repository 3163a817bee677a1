#include "egoadl/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace egoadl {

int DecisionTree::leaf_index(std::span<const double> x) const {
  int n = 0;
  while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(n)];
    n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return n;
}

double split_threshold(double lo, double hi) {
  double t = lo + (hi - lo) / 2.0;
  if (t >= hi || t < lo) t = lo;
  return t;
}

namespace {

constexpr double kTieEps = 1e-12;

struct PendingNode {
  int id;
  std::vector<std::size_t> rows;
  std::size_t depth;
};

double gini_weighted(std::span<const double> class_w, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double w : class_w) s += w * w;
  return total - s / total;  // total * gini
}

}  // namespace

DecisionTree build_classification_tree(const Matrix& x, std::span<const int> y, std::size_t k,
                                       std::span<const double> sample_weight, const ClassificationTreeParams& params,
                                       CounterRng& rng) {
  const std::size_t d = x.cols();
  const std::size_t max_features = params.max_features == 0 ? d : std::min(params.max_features, d);
  DecisionTree tree;
  tree.value_width = k;

  std::vector<std::size_t> root_rows;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (sample_weight[i] > 0.0) root_rows.push_back(i);
  }

  auto add_node = [&] {
    tree.nodes.emplace_back();
    tree.values.resize(tree.nodes.size() * k, 0.0);
    return static_cast<int>(tree.nodes.size() - 1);
  };

  std::vector<PendingNode> stack;
  stack.push_back({add_node(), std::move(root_rows), 0});
  std::vector<double> total_w(k), left_w(k), right_w(k);
  std::vector<std::size_t> features(d), sorted;

  while (!stack.empty()) {
    PendingNode cur = std::move(stack.back());
    stack.pop_back();

    std::fill(total_w.begin(), total_w.end(), 0.0);
    for (std::size_t r : cur.rows) total_w[static_cast<std::size_t>(y[r])] += sample_weight[r];
    const double total = std::accumulate(total_w.begin(), total_w.end(), 0.0);
    {
      auto v = tree.values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(cur.id) * k);
      for (std::size_t c = 0; c < k; ++c) v[static_cast<std::ptrdiff_t>(c)] = total > 0 ? total_w[c] / total : 0.0;
    }
    const double node_impurity = gini_weighted(total_w, total);
    const bool depth_ok = params.max_depth == 0 || cur.depth < params.max_depth;
    if (!depth_ok || cur.rows.size() < params.min_samples_split || node_impurity <= kTieEps * std::max(1.0, total)) {
      continue;
    }

    std::iota(features.begin(), features.end(), std::size_t{0});
    rng.shuffle(features);

    double best_score = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::size_t visited = 0, usable = 0;
    for (std::size_t fi = 0; fi < d; ++fi) {
      if (visited >= max_features && usable > 0) break;
      const std::size_t f = features[fi];
      ++visited;
      sorted = cur.rows;
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = x(a, f), vb = x(b, f);
        return va < vb || (va == vb && a < b);
      });
      if (x(sorted.front(), f) == x(sorted.back(), f)) continue;
      ++usable;
      std::fill(left_w.begin(), left_w.end(), 0.0);
      double left_total = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const std::size_t r = sorted[i];
        left_w[static_cast<std::size_t>(y[r])] += sample_weight[r];
        left_total += sample_weight[r];
        const double v = x(r, f), vn = x(sorted[i + 1], f);
        if (v == vn) continue;
        for (std::size_t c = 0; c < k; ++c) right_w[c] = total_w[c] - left_w[c];
        const double score = gini_weighted(left_w, left_total) + gini_weighted(right_w, total - left_total);
        const double thr = split_threshold(v, vn);
        const bool better = best_feature < 0 || score < best_score - kTieEps ||
                            (score <= best_score + kTieEps && static_cast<int>(f) < best_feature);
        if (better) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = thr;
        }
      }
    }
    if (best_feature < 0) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : cur.rows) {
      (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    const int left = add_node();
    const int right = add_node();
    auto& node = tree.nodes[static_cast<std::size_t>(cur.id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    // Right pushed first so the left subtree is expanded first.
    stack.push_back({right, std::move(right_rows), cur.depth + 1});
    stack.push_back({left, std::move(left_rows), cur.depth + 1});
  }
  return tree;
}

std::vector<std::vector<std::size_t>> presort_features(const Matrix& x) {
  std::vector<std::vector<std::size_t>> order(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& o = order[f];
    o.resize(x.rows());
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }
  return order;
}

RegressionTreeFit build_regression_tree(const Matrix& x, const std::vector<std::vector<std::size_t>>& order,
                                        std::span<const double> target, std::size_t max_depth,
                                        std::size_t min_samples_split) {
  const std::size_t n = x.rows();
  RegressionTreeFit fit;
  fit.tree.value_width = 1;
  fit.tree.nodes.emplace_back();
  fit.leaf_of_row.assign(n, 0);

  struct Stats {
    std::size_t count = 0;
    double sum = 0.0, sum_sq = 0.0;
  };
  struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  std::vector<int> frontier{0};
  for (std::size_t depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    const std::size_t node_count = fit.tree.nodes.size();
    std::vector<Stats> total(node_count);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = total[static_cast<std::size_t>(fit.leaf_of_row[i])];
      ++s.count;
      s.sum += target[i];
      s.sum_sq += target[i] * target[i];
    }
    std::vector<char> splittable(node_count, 0);
    for (int id : frontier) {
      const auto& s = total[static_cast<std::size_t>(id)];
      const double sse = s.count ? s.sum_sq - s.sum * s.sum / static_cast<double>(s.count) : 0.0;
      splittable[static_cast<std::size_t>(id)] = s.count >= min_samples_split && sse > 1e-15;
    }

    std::vector<Candidate> best(node_count);
    std::vector<Stats> left(node_count);
    std::vector<double> last_value(node_count);
    std::vector<char> started(node_count);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::fill(left.begin(), left.end(), Stats{});
      std::fill(started.begin(), started.end(), 0);
      for (std::size_t r : order[f]) {
        const auto node = static_cast<std::size_t>(fit.leaf_of_row[r]);
        if (!splittable[node]) continue;
        const double v = x(r, f);
        auto& l = left[node];
        if (started[node] && v != last_value[node]) {
          const auto& t = total[node];
          const double nl = static_cast<double>(l.count);
          const double nr = static_cast<double>(t.count - l.count);
          const double sr = t.sum - l.sum;
          const double gain = l.sum * l.sum / nl + sr * sr / nr - t.sum * t.sum / static_cast<double>(t.count);
          auto& b = best[node];
          if (b.feature < 0 || gain > b.gain + 1e-12) {
            b = {gain, static_cast<int>(f), split_threshold(last_value[node], v)};
          }
        }
        started[node] = 1;
        last_value[node] = v;
        ++l.count;
        l.sum += target[r];
      }
    }

    std::vector<int> next;
    for (int id : frontier) {
      const auto& b = best[static_cast<std::size_t>(id)];
      if (b.feature < 0) continue;
      const int l = static_cast<int>(fit.tree.nodes.size());
      fit.tree.nodes.emplace_back();
      fit.tree.nodes.emplace_back();
      auto& node = fit.tree.nodes[static_cast<std::size_t>(id)];
      node.feature = b.feature;
      node.threshold = b.threshold;
      node.left = l;
      node.right = l + 1;
      next.push_back(l);
      next.push_back(l + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = fit.tree.nodes[static_cast<std::size_t>(fit.leaf_of_row[i])];
      if (node.feature >= 0) {
        fit.leaf_of_row[i] = x(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      }
    }
    frontier = std::move(next);
  }
  fit.tree.values.assign(fit.tree.nodes.size(), 0.0);
  return fit;
}

}  // namespace egoadl
