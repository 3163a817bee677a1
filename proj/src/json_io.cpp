#include "egoadl/json_io.hpp"

#include <functional>
#include <map>

#include "egoadl/error.hpp"

namespace egoadl {

using nlohmann::json;

json to_json(const FeatureConfig& cfg) {
  return json{{"representation", std::string(to_string(cfg.representation))},
              {"use_active", cfg.use_active},
              {"taxonomy_hash", cfg.taxonomy_hash},
              {"id", cfg.id()},
              {"hash", cfg.hash()}};
}

FeatureConfig feature_config_from_json(const json& j) {
  FeatureConfig cfg;
  auto rep = parse_representation(j.at("representation").get<std::string>());
  if (!rep) throw ParseError("unknown representation in feature config");
  cfg.representation = *rep;
  cfg.use_active = j.at("use_active").get<bool>();
  cfg.taxonomy_hash = j.at("taxonomy_hash").get<std::string>();
  if (j.contains("hash") && j.at("hash").get<std::string>() != cfg.hash()) {
    throw ParseError("feature config hash does not match its fields");
  }
  return cfg;
}

namespace {

// Field table per kind: name -> (read, write) against the params struct.
template <typename P>
using Fields = std::map<std::string, std::pair<std::function<json(const P&)>, std::function<void(P&, const json&)>>>;

#define EGOADL_FIELD(P, name)                                \
  {                                                          \
    #name, {                                                 \
      [](const P& p) { return json(p.name); },               \
      [](P& p, const json& v) { p.name = v.get<decltype(P::name)>(); } \
    }                                                        \
  }

const Fields<LogRegParams>& logreg_fields() {
  static const Fields<LogRegParams> f = {EGOADL_FIELD(LogRegParams, l2), EGOADL_FIELD(LogRegParams, max_iter),
                                         EGOADL_FIELD(LogRegParams, grad_tol), EGOADL_FIELD(LogRegParams, balanced)};
  return f;
}

const Fields<ForestParams>& forest_fields() {
  static const Fields<ForestParams> f = {
      EGOADL_FIELD(ForestParams, n_trees),   EGOADL_FIELD(ForestParams, max_features),
      EGOADL_FIELD(ForestParams, min_samples_split), EGOADL_FIELD(ForestParams, max_depth),
      EGOADL_FIELD(ForestParams, bootstrap), EGOADL_FIELD(ForestParams, balanced)};
  return f;
}

const Fields<BoostParams>& boost_fields() {
  static const Fields<BoostParams> f = {EGOADL_FIELD(BoostParams, n_stages), EGOADL_FIELD(BoostParams, learning_rate),
                                        EGOADL_FIELD(BoostParams, max_depth),
                                        EGOADL_FIELD(BoostParams, min_samples_split)};
  return f;
}

const Fields<MlpParams>& mlp_fields() {
  static const Fields<MlpParams> f = {
      EGOADL_FIELD(MlpParams, hidden),         EGOADL_FIELD(MlpParams, batch_size),
      EGOADL_FIELD(MlpParams, learning_rate),  EGOADL_FIELD(MlpParams, lr_divisor),
      EGOADL_FIELD(MlpParams, tol),            EGOADL_FIELD(MlpParams, lr_patience),
      EGOADL_FIELD(MlpParams, momentum),       EGOADL_FIELD(MlpParams, early_stopping),
      EGOADL_FIELD(MlpParams, validation_fraction), EGOADL_FIELD(MlpParams, patience),
      EGOADL_FIELD(MlpParams, max_epochs)};
  return f;
}

#undef EGOADL_FIELD

template <typename P>
json dump_fields(const Fields<P>& fields, const P& p) {
  json out = json::object();
  for (const auto& [name, rw] : fields) out[name] = rw.first(p);
  return out;
}

template <typename P>
void load_fields(const Fields<P>& fields, P& p, const json& j, std::string_view kind) {
  if (!j.is_object()) throw ParseError("hyperparameters for " + std::string(kind) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) {
      throw ParseError("unknown hyperparameter '" + key + "' for " + std::string(kind));
    }
    try {
      it->second.second(p, value);
    } catch (const json::exception&) {
      throw ParseError("hyperparameter '" + key + "' for " + std::string(kind) + " has the wrong type");
    }
  }
}

}  // namespace

json hyperparameters_to_json(ModelKind kind, const Hyperparameters& hp) {
  switch (kind) {
    case ModelKind::logreg: return dump_fields(logreg_fields(), hp.logreg);
    case ModelKind::random_forest: return dump_fields(forest_fields(), hp.forest);
    case ModelKind::gradient_boosting: return dump_fields(boost_fields(), hp.boost);
    case ModelKind::mlp: return dump_fields(mlp_fields(), hp.mlp);
  }
  return json::object();
}

void apply_hyperparameters(Hyperparameters& hp, ModelKind kind, const json& j) {
  const std::string name(to_string(kind));
  switch (kind) {
    case ModelKind::logreg: load_fields(logreg_fields(), hp.logreg, j, name); break;
    case ModelKind::random_forest: load_fields(forest_fields(), hp.forest, j, name); break;
    case ModelKind::gradient_boosting: load_fields(boost_fields(), hp.boost, j, name); break;
    case ModelKind::mlp: load_fields(mlp_fields(), hp.mlp, j, name); break;
  }
}

void apply_hyperparameters(Hyperparameters& hp, const json& j) {
  if (!j.is_object()) throw ParseError("hyperparameter document must be an object");
  for (const auto& [key, value] : j.items()) {
    auto kind = parse_model_kind(key);
    if (!kind) throw ParseError("unknown model kind '" + key + "' in hyperparameter document");
    apply_hyperparameters(hp, *kind, value);
  }
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"kind", std::string(to_string(cfg.kind))},
              {"seed", cfg.seed},
              {"hyperparameters", hyperparameters_to_json(cfg.kind, cfg.hp)}};
}

}  // namespace egoadl
