#include "egoadl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "egoadl/error.hpp"
#include "egoadl/json_io.hpp"
#include "egoadl/parallel.hpp"
#include "egoadl/random.hpp"

namespace egoadl {

using nlohmann::json;

std::vector<Fold> loso_split(std::span<const Segment> segments) {
  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segments[i].label) {
      throw ValidationError("loso_split: segment " + segments[i].key.to_string() + " has no label");
    }
    by_participant[segments[i].participant_id()].push_back(i);
  }
  if (by_participant.size() < 2) {
    throw ValidationError("loso_split: need at least 2 participants, got " + std::to_string(by_participant.size()));
  }
  std::vector<Fold> folds;
  for (const auto& [pid, test] : by_participant) {
    Fold f{pid, {}, test};
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].participant_id() != pid) f.train.push_back(i);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

std::vector<double> per_class_f1(std::span<const int> truth, std::span<const int> pred, std::size_t k) {
  const auto cm = confusion_matrix(truth, pred, k);
  std::vector<double> f1(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    double pred_pos = 0.0;
    for (std::size_t t = 0; t < k; ++t) pred_pos += static_cast<double>(cm.at(t, c));
    const double actual = static_cast<double>(cm.row_sum(c));
    if (pred_pos == 0.0 || actual == 0.0) continue;
    const double p = tp / pred_pos;
    const double r = tp / actual;
    f1[c] = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return f1;
}

double weighted_f1(std::span<const int> truth, std::span<const int> pred, std::size_t k) {
  if (truth.size() != pred.size()) throw std::invalid_argument("weighted_f1: length mismatch");
  if (truth.empty()) throw std::invalid_argument("weighted_f1: empty input");
  const auto f1 = per_class_f1(truth, pred, k);
  std::vector<std::int64_t> support(k, 0);
  for (int t : truth) ++support[static_cast<std::size_t>(t)];
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (support[c] > 0) sum += static_cast<double>(support[c]) * f1[c];
  }
  return sum / static_cast<double>(truth.size());
}

std::int64_t ConfusionMatrix::row_sum(std::size_t t) const {
  std::int64_t s = 0;
  for (std::size_t p = 0; p < k; ++p) s += at(t, p);
  return s;
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k != k) throw std::invalid_argument("confusion matrix size mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, std::size_t k) {
  if (truth.size() != pred.size()) throw std::invalid_argument("confusion_matrix: length mismatch");
  ConfusionMatrix cm(k);
  const int ki = static_cast<int>(k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= ki || pred[i] < 0 || pred[i] >= ki) {
      throw std::out_of_range("confusion_matrix: label out of range at position " + std::to_string(i));
    }
    ++cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(pred[i]));
  }
  return cm;
}

NormalizedConfusion normalize_rows(const ConfusionMatrix& m) {
  NormalizedConfusion out{Matrix(m.k, m.k), std::vector<bool>(m.k, false)};
  for (std::size_t t = 0; t < m.k; ++t) {
    const auto s = m.row_sum(t);
    if (s == 0) {
      out.zero_support[t] = true;
      continue;
    }
    for (std::size_t p = 0; p < m.k; ++p) {
      out.proportions(t, p) = static_cast<double>(m.at(t, p)) / static_cast<double>(s);
    }
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

double threshold_rate(std::span<const double> scores, double threshold) {
  if (scores.empty()) return 0.0;
  const auto above = std::count_if(scores.begin(), scores.end(), [&](double s) { return s > threshold; });
  return 100.0 * static_cast<double>(above) / static_cast<double>(scores.size());
}

namespace {

// Canonical processing order: by segment key, independent of input order.
std::vector<Segment> sorted_copy(std::span<const Segment> segments) {
  std::vector<Segment> out(segments.begin(), segments.end());
  std::sort(out.begin(), out.end(), [](const Segment& a, const Segment& b) { return a.key < b.key; });
  return out;
}

FoldResult score_fold(std::string participant, std::vector<SegmentKey> keys, std::vector<int> truth,
                      std::vector<int> predicted) {
  FoldResult r;
  r.held_out_participant = std::move(participant);
  r.keys = std::move(keys);
  r.truth = std::move(truth);
  r.predicted = std::move(predicted);
  r.per_class_f1 = per_class_f1(r.truth, r.predicted, kNumAdl);
  r.support.assign(kNumAdl, 0);
  for (int t : r.truth) ++r.support[static_cast<std::size_t>(t)];
  r.weighted_f1 = weighted_f1(r.truth, r.predicted, kNumAdl);
  r.confusion = confusion_matrix(r.truth, r.predicted, kNumAdl);
  return r;
}

void aggregate(EvaluationReport& report) {
  std::vector<double> scores;
  report.pooled = ConfusionMatrix(kNumAdl);
  for (const auto& f : report.folds) {
    scores.push_back(f.weighted_f1);
    report.pooled += f.confusion;
  }
  report.weighted_f1 = mean_std(scores);
  report.percent_above_half = threshold_rate(scores, 0.5);
  report.normalized = normalize_rows(report.pooled);
}

}  // namespace

EvaluationReport run_loso(std::span<const Segment> input, const CategoryTable& table, const FeatureConfig& features,
                          const TrainConfig& train_cfg, const EvalOptions& opts) {
  const auto segments = sorted_copy(input);
  const auto folds = loso_split(segments);

  Matrix x;
  std::vector<int> y;
  for (const auto& s : segments) {
    x.append_row(featurize(s, table, features, opts.match).values);
    y.push_back(s.label->id);
  }
  const std::vector<std::string> names(adl_names().begin(), adl_names().end());

  EvaluationReport report;
  report.feature_config = features;
  report.train_config = train_cfg;
  report.mode = "loso";
  report.folds.resize(folds.size());
  const unsigned inner_jobs = opts.jobs > 1 ? 1u : train_cfg.jobs;

  parallel_for(folds.size(), opts.jobs, [&](std::size_t fi) {
    const Fold& fold = folds[fi];
    Matrix xt;
    std::vector<int> yt;
    for (std::size_t i : fold.train) {
      xt.append_row(x.row(i));
      yt.push_back(y[i]);
    }
    TrainConfig cfg = train_cfg;
    cfg.seed = derive_seed(train_cfg.seed, fold.participant_id);
    cfg.jobs = inner_jobs;
    TrainedModel model;
    try {
      model = train(xt, yt, cfg, features, names);
    } catch (const ModelError& e) {
      throw ModelError("fold '" + fold.participant_id + "': " + e.what());
    }
    std::vector<SegmentKey> keys;
    std::vector<int> truth, pred;
    for (std::size_t i : fold.test) {
      keys.push_back(segments[i].key);
      truth.push_back(y[i]);
      pred.push_back(predict_label(model, x.row(i)));
    }
    report.folds[fi] = score_fold(fold.participant_id, std::move(keys), std::move(truth), std::move(pred));
    report.folds[fi].training = model.meta;
  });
  aggregate(report);
  return report;
}

EvaluationReport evaluate_model(const TrainedModel& model, std::span<const Segment> input,
                                const CategoryTable& table, const EvalOptions& opts) {
  const auto segments = sorted_copy(input);
  EvaluationReport report;
  report.feature_config = model.feature_config;
  report.train_config.kind = model.kind;
  report.train_config.seed = model.seed;
  report.train_config.hp = model.hp;
  report.mode = "fixed-model";

  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segments[i].label) throw ValidationError("evaluate: segment " + segments[i].key.to_string() + " has no label");
    by_participant[segments[i].participant_id()].push_back(i);
  }
  for (const auto& [pid, rows] : by_participant) {
    std::vector<SegmentKey> keys;
    std::vector<int> truth, pred;
    for (std::size_t i : rows) {
      const auto fv = featurize(segments[i], table, model.feature_config, opts.match);
      keys.push_back(segments[i].key);
      truth.push_back(segments[i].label->id);
      pred.push_back(predict_label(model, fv));
    }
    report.folds.push_back(score_fold(pid, std::move(keys), std::move(truth), std::move(pred)));
    report.folds.back().training = model.meta;
  }
  aggregate(report);
  return report;
}

std::vector<AblationCell> run_ablation(std::span<const Segment> segments, const CategoryTable& table,
                                       std::span<const TrainConfig> train_configs, const EvalOptions& opts) {
  std::vector<AblationCell> cells;
  for (const auto& fc : ablation_configs(table.content_hash())) {
    for (const auto& tc : train_configs) {
      cells.push_back({fc, run_loso(segments, table, fc, tc, opts)});
    }
  }
  return cells;
}

namespace {

json confusion_json(const ConfusionMatrix& m) {
  json rows = json::array();
  for (std::size_t t = 0; t < m.k; ++t) {
    json r = json::array();
    for (std::size_t p = 0; p < m.k; ++p) r.push_back(m.at(t, p));
    rows.push_back(r);
  }
  return rows;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json report_to_json(const EvaluationReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    json preds = json::array();
    for (std::size_t i = 0; i < f.keys.size(); ++i) {
      preds.push_back({{"participant_id", f.keys[i].participant_id},
                       {"video_id", f.keys[i].video_id},
                       {"segment_index", f.keys[i].segment_index},
                       {"true", adl_names()[static_cast<std::size_t>(f.truth[i])]},
                       {"predicted", adl_names()[static_cast<std::size_t>(f.predicted[i])]}});
    }
    folds.push_back({{"held_out_participant", f.held_out_participant},
                     {"n_test", f.truth.size()},
                     {"weighted_f1", f.weighted_f1},
                     {"above_threshold", f.weighted_f1 > 0.5},
                     {"per_class_f1", f.per_class_f1},
                     {"support", f.support},
                     {"confusion", confusion_json(f.confusion)},
                     {"training", {{"iterations", f.training.iterations}, {"stop_reason", f.training.stop_reason}}},
                     {"predictions", preds}});
  }
  json normalized = json::array();
  for (std::size_t t = 0; t < r.normalized.proportions.rows(); ++t) {
    auto row = r.normalized.proportions.row(t);
    normalized.push_back(std::vector<double>(row.begin(), row.end()));
  }
  std::vector<bool> flags = r.normalized.zero_support;
  return json{
      {"mode", r.mode},
      {"class_names", std::vector<std::string>(adl_names().begin(), adl_names().end())},
      {"provenance",
       {{"feature_config", to_json(r.feature_config)},
        {"train_config", train_config_to_json(r.train_config)},
        {"taxonomy_hash", r.feature_config.taxonomy_hash},
        {"fold_seed_rule", "derive_seed(train seed, participant id)"},
        {"std_kind", "population"},
        {"threshold_rule", "weighted F1 > 0.5 (strict)"}}},
      {"summary",
       {{"weighted_f1_mean", r.weighted_f1.mean},
        {"weighted_f1_std", r.weighted_f1.std},
        {"percent_participants_above_0_5", r.percent_above_half},
        {"folds", r.folds.size()}}},
      {"pooled_confusion", confusion_json(r.pooled)},
      {"normalized_confusion", normalized},
      {"zero_support_rows", flags},
      {"folds", folds}};
}

std::string ablation_grid_csv(std::span<const AblationCell> cells) {
  std::ostringstream out;
  out << "representation,active,model,mean_weighted_f1,std_weighted_f1,percent_participants_above_0_5,folds\n";
  for (const auto& c : cells) {
    out << to_string(c.features.representation) << ',' << (c.features.use_active ? "yes" : "no") << ','
        << to_string(c.report.train_config.kind) << ',' << fmt(c.report.weighted_f1.mean) << ','
        << fmt(c.report.weighted_f1.std) << ',' << fmt(c.report.percent_above_half) << ',' << c.report.folds.size()
        << '\n';
  }
  return out.str();
}

}  // namespace egoadl
