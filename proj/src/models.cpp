#include "egoadl/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "egoadl/digest.hpp"
#include "egoadl/error.hpp"
#include "egoadl/json_io.hpp"
#include "egoadl/optim.hpp"
#include "model_impl.hpp"

namespace egoadl {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::random_forest: return "rf";
    case ModelKind::gradient_boosting: return "gb";
    case ModelKind::mlp: return "mlp";
  }
  return "logreg";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  if (text == "logreg" || text == "lr") return ModelKind::logreg;
  if (text == "rf" || text == "random_forest") return ModelKind::random_forest;
  if (text == "gb" || text == "gradient_boosting") return ModelKind::gradient_boosting;
  if (text == "mlp") return ModelKind::mlp;
  return std::nullopt;
}

std::vector<double> balanced_weights(std::span<const int> counts) {
  if (counts.empty()) throw std::invalid_argument("balanced_weights: no classes");
  double total = 0.0;
  for (int c : counts) {
    if (c <= 0) throw std::invalid_argument("balanced_weights: every class needs a positive count");
    total += c;
  }
  const double k = static_cast<double>(counts.size());
  std::vector<double> w;
  w.reserve(counts.size());
  for (int c : counts) w.push_back(total / (k * static_cast<double>(c)));
  return w;
}

namespace detail {

std::vector<int> class_counts(std::span<const int> y, std::size_t k) {
  std::vector<int> counts(k, 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v)];
  return counts;
}

LogRegModel train_logreg(const Matrix& x, std::span<const int> y, std::size_t k, const LogRegParams& p,
                         TrainingMeta& meta) {
  std::vector<double> sw(x.rows(), 1.0);
  if (p.balanced) {
    const auto cw = balanced_weights(class_counts(y, k));
    for (std::size_t i = 0; i < sw.size(); ++i) sw[i] = cw[static_cast<std::size_t>(y[i])];
  }
  auto fit = optim::fit_logreg(x, y, sw, k, p.l2, p.max_iter, p.grad_tol);
  meta.iterations = fit.iterations;
  meta.stop_reason = fit.stop_reason;
  LogRegModel m;
  m.weights = Matrix(k, x.cols());
  std::copy(fit.params.begin(), fit.params.begin() + static_cast<std::ptrdiff_t>(k * x.cols()),
            m.weights.data().begin());
  m.bias.assign(fit.params.begin() + static_cast<std::ptrdiff_t>(k * x.cols()), fit.params.end());
  return m;
}

void logreg_proba(const LogRegModel& m, std::span<const double> x, std::span<double> out) {
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = m.bias[c];
    const auto w = m.weights.row(c);
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    out[c] = s;
  }
  optim::softmax_inplace(out);
}

}  // namespace detail

TrainedModel train(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg,
                   const FeatureConfig& features, std::vector<std::string> class_names) {
  if (x.rows() == 0 || x.cols() == 0) throw ModelError("train: empty feature matrix");
  if (labels.size() != x.rows()) {
    throw ModelError("train: dimension mismatch, " + std::to_string(x.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ModelError("train: non-finite feature value");
  }
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ModelError("train: need at least two classes, got " + std::to_string(distinct.size()));

  TrainedModel model;
  model.kind = cfg.kind;
  model.hp = cfg.hp;
  model.seed = cfg.seed;
  model.feature_config = features;
  model.n_features = x.cols();
  model.class_ids.assign(distinct.begin(), distinct.end());
  for (int id : model.class_ids) {
    const auto idx = static_cast<std::size_t>(id);
    model.class_names.push_back(id >= 0 && idx < class_names.size() ? class_names[idx] : std::to_string(id));
  }

  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = static_cast<int>(std::lower_bound(model.class_ids.begin(), model.class_ids.end(), labels[i]) -
                            model.class_ids.begin());
  }
  const std::size_t k = model.class_ids.size();
  switch (cfg.kind) {
    case ModelKind::logreg:
      model.params = detail::train_logreg(x, y, k, cfg.hp.logreg, model.meta);
      break;
    case ModelKind::random_forest:
      model.params = detail::train_forest(x, y, k, cfg.hp.forest, cfg.seed, cfg.jobs, model.meta);
      break;
    case ModelKind::gradient_boosting:
      model.params = detail::train_boost(x, y, k, cfg.hp.boost, model.meta);
      break;
    case ModelKind::mlp:
      model.params = detail::train_mlp(x, y, k, cfg.hp.mlp, cfg.seed, model.meta);
      break;
  }
  return model;
}

TrainedModel train(std::span<const FeatureVector> features, std::span<const AdlLabel> labels,
                   const TrainConfig& cfg) {
  if (features.empty()) throw ModelError("train: no feature vectors");
  if (features.size() != labels.size()) throw ModelError("train: feature/label count mismatch");
  const FeatureConfig& fc = features.front().config;
  Matrix x;
  for (const auto& fv : features) {
    if (!(fv.config == fc)) throw ModelError("train: feature vectors built under different configs");
    if (!x.empty() && fv.values.size() != x.cols()) throw ModelError("train: dimension mismatch between vectors");
    x.append_row(fv.values);
  }
  std::vector<int> y;
  y.reserve(labels.size());
  for (const auto& l : labels) y.push_back(l.id);
  std::vector<std::string> names(adl_names().begin(), adl_names().end());
  return train(x, y, cfg, fc, std::move(names));
}

std::vector<double> predict_proba(const TrainedModel& model, std::span<const double> x) {
  if (x.size() != model.n_features) {
    throw ModelError("predict: expected " + std::to_string(model.n_features) + " features, got " +
                     std::to_string(x.size()));
  }
  std::vector<double> out(model.num_classes());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogRegModel>) {
          detail::logreg_proba(p, x, out);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          detail::forest_proba(p, x, out);
        } else if constexpr (std::is_same_v<T, BoostModel>) {
          detail::boost_proba(p, x, out);
        } else {
          detail::mlp_proba(p, model.n_features, model.num_classes(), x, out);
        }
      },
      model.params);
  return out;
}

std::vector<double> predict_proba(const TrainedModel& model, const FeatureVector& x) {
  if (x.config.hash() != model.feature_config.hash()) {
    throw ModelError("predict: feature config " + x.config.id() + " does not match model config " +
                     model.feature_config.id() + " (hash mismatch)");
  }
  return predict_proba(model, std::span<const double>(x.values));
}

namespace {
int argmax_label(const TrainedModel& model, const std::vector<double>& p) {
  const auto best = std::max_element(p.begin(), p.end()) - p.begin();
  return model.class_ids[static_cast<std::size_t>(best)];
}
}  // namespace

int predict_label(const TrainedModel& model, std::span<const double> x) {
  return argmax_label(model, predict_proba(model, x));
}

int predict_label(const TrainedModel& model, const FeatureVector& x) {
  return argmax_label(model, predict_proba(model, x));
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json tree_to_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
  }
  return json{{"feature", feature}, {"threshold", threshold}, {"left", left},
              {"right", right},     {"width", t.value_width}, {"values", t.values}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  const auto& feature = j.at("feature");
  const auto& threshold = j.at("threshold");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || n == 0) {
    throw ParseError("model: inconsistent tree arrays");
  }
  t.value_width = j.at("width").get<std::size_t>();
  t.values = j.at("values").get<std::vector<double>>();
  if (t.values.size() != n * t.value_width) throw ParseError("model: tree value array has wrong size");
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node.feature = feature[i].get<int>();
    node.threshold = threshold[i].get<double>();
    node.left = left[i].get<int>();
    node.right = right[i].get<int>();
    if (node.feature >= 0 && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
                              node.left >= static_cast<int>(n) || node.right >= static_cast<int>(n))) {
      throw ParseError("model: tree child index out of range");
    }
  }
  return t;
}

json params_to_json(const TrainedModel& m) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogRegModel>) {
          return json{{"weights", p.weights.data()}, {"bias", p.bias}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
          return json{{"trees", trees}};
        } else if constexpr (std::is_same_v<T, BoostModel>) {
          json stages = json::array();
          for (const auto& s : p.stages) {
            json st = json::array();
            for (const auto& t : s) st.push_back(tree_to_json(t));
            stages.push_back(st);
          }
          return json{{"init", p.init}, {"learning_rate", p.learning_rate}, {"stages", stages}};
        } else {
          return json{{"hidden", p.hidden}, {"params", p.params}};
        }
      },
      m.params);
}

json model_body(const TrainedModel& m) {
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["kind"] = std::string(to_string(m.kind));
  doc["hyperparameters"] = hyperparameters_to_json(m.kind, m.hp);
  doc["seed"] = m.seed;
  doc["taxonomy_hash"] = m.feature_config.taxonomy_hash;
  doc["feature_config"] = to_json(m.feature_config);
  doc["n_features"] = m.n_features;
  doc["class_ids"] = m.class_ids;
  doc["class_names"] = m.class_names;
  doc["training"] = {{"iterations", m.meta.iterations}, {"stop_reason", m.meta.stop_reason}};
  doc["parameters"] = params_to_json(m);
  return doc;
}

}  // namespace

std::string save_model(const TrainedModel& model) {
  json doc = model_body(model);
  doc["digest"] = sha256_hex(doc.dump());
  return doc.dump();
}

TrainedModel load_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: corrupted document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model: corrupted document: not an object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw ParseError("model: missing schema_version");
  }
  const int version = doc["schema_version"].get<int>();
  if (version != kModelSchemaVersion) {
    throw ParseError("model: unsupported schema version " + std::to_string(version) + " (expected " +
                     std::to_string(kModelSchemaVersion) + ")");
  }
  if (!doc.contains("digest") || !doc["digest"].is_string()) throw ParseError("model: missing digest");
  const std::string digest = doc["digest"].get<std::string>();
  doc.erase("digest");
  if (sha256_hex(doc.dump()) != digest) throw ParseError("model: digest mismatch (document modified or corrupted)");

  try {
    TrainedModel m;
    auto kind = parse_model_kind(doc.at("kind").get<std::string>());
    if (!kind) throw ParseError("model: unknown kind");
    m.kind = *kind;
    apply_hyperparameters(m.hp, m.kind, doc.at("hyperparameters"));
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.feature_config = feature_config_from_json(doc.at("feature_config"));
    if (m.feature_config.taxonomy_hash != doc.at("taxonomy_hash").get<std::string>()) {
      throw ParseError("model: taxonomy hash disagrees with feature config");
    }
    m.n_features = doc.at("n_features").get<std::size_t>();
    m.class_ids = doc.at("class_ids").get<std::vector<int>>();
    m.class_names = doc.at("class_names").get<std::vector<std::string>>();
    if (m.class_ids.size() < 2 || m.class_names.size() != m.class_ids.size()) {
      throw ParseError("model: invalid class list");
    }
    m.meta.iterations = doc.at("training").at("iterations").get<int>();
    m.meta.stop_reason = doc.at("training").at("stop_reason").get<std::string>();
    const auto& p = doc.at("parameters");
    const std::size_t k = m.class_ids.size();
    switch (m.kind) {
      case ModelKind::logreg: {
        LogRegModel lr;
        auto w = p.at("weights").get<std::vector<double>>();
        lr.bias = p.at("bias").get<std::vector<double>>();
        if (w.size() != k * m.n_features || lr.bias.size() != k) throw ParseError("model: logreg shape mismatch");
        lr.weights = Matrix(k, m.n_features);
        lr.weights.data() = std::move(w);
        m.params = std::move(lr);
        break;
      }
      case ModelKind::random_forest: {
        ForestModel f;
        for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
        m.params = std::move(f);
        break;
      }
      case ModelKind::gradient_boosting: {
        BoostModel b;
        b.init = p.at("init").get<std::vector<double>>();
        b.learning_rate = p.at("learning_rate").get<double>();
        for (const auto& st : p.at("stages")) {
          std::vector<DecisionTree> trees;
          for (const auto& t : st) trees.push_back(tree_from_json(t));
          if (trees.size() != k) throw ParseError("model: boosting stage has wrong tree count");
          b.stages.push_back(std::move(trees));
        }
        if (b.init.size() != k) throw ParseError("model: boosting init shape mismatch");
        m.params = std::move(b);
        break;
      }
      case ModelKind::mlp: {
        MlpModel mm;
        mm.hidden = p.at("hidden").get<std::size_t>();
        mm.params = p.at("params").get<std::vector<double>>();
        if (mm.params.size() != optim::MlpShape{m.n_features, mm.hidden, k}.param_count()) {
          throw ParseError("model: mlp shape mismatch");
        }
        m.params = std::move(mm);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: corrupted document: ") + e.what());
  }
}

}  // namespace egoadl
