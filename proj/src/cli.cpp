#include "egoadl/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "egoadl/digest.hpp"
#include "egoadl/error.hpp"
#include "egoadl/evaluation.hpp"
#include "egoadl/features.hpp"
#include "egoadl/json_io.hpp"
#include "egoadl/models.hpp"
#include "egoadl/records.hpp"
#include "egoadl/synthgen.hpp"
#include "egoadl/taxonomy.hpp"

namespace egoadl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitFatal = 2;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Options shared across subcommands; each subcommand registers the subset it uses.
struct Options {
  std::string taxonomy;
  std::string records;
  std::string manifest;
  std::string spec;
  std::string hparams;
  std::string out;
  std::string input;
  std::string representation = "binary";
  bool active = true;
  std::string model = "logreg";
  std::string models = "logreg,rf,gb,mlp";
  std::uint64_t seed = kDefaultSeed;
  unsigned jobs = 1;
  bool inference = false;
  bool strict_contact = false;
  bool seed_given = false;
};

/// Provenance document written once per output directory.
class RunManifest {
 public:
  RunManifest(std::string command, std::string invocation)
      : command_(std::move(command)), invocation_(std::move(invocation)), started_(utc_now()) {}

  void input(const std::string& role, const std::string& path) {
    if (!path.empty()) inputs_[role] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  void config(const std::string& key, json value) { config_[key] = std::move(value); }
  void output(const std::string& name, const std::string& text) { outputs_[name] = sha256_hex(text); }

  void write(const fs::path& dir, std::uint64_t seed) const {
    json doc{{"command", command_},
             {"invocation", invocation_},
             {"config", config_},
             {"inputs", inputs_},
             {"outputs", outputs_},
             {"seed", seed},
             {"tool_version", kToolVersion},
             {"started_at", started_},
             {"finished_at", utc_now()}};
    write_text(dir / "run.json", doc.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string invocation_;
  std::string started_;
  json config_ = json::object();
  json inputs_ = json::object();
  json outputs_ = json::object();
};

class Runner {
 public:
  Runner(const Options& o, std::string command, std::string invocation)
      : o_(o), manifest_(std::move(command), std::move(invocation)) {}

  int synth();
  int ingest_validate();
  int featurize_cmd();
  int train_cmd();
  int evaluate_cmd();
  int ablate_cmd();
  int report_cmd();

 private:
  const CategoryTable& table() {
    if (!table_) {
      if (o_.taxonomy.empty()) {
        table_ = default_category_table();
      } else {
        table_ = load_category_table(read_text(o_.taxonomy));
        manifest_.input("taxonomy", o_.taxonomy);
      }
      manifest_.config("taxonomy", {{"name", table_->name()}, {"hash", table_->content_hash()}});
    }
    return *table_;
  }

  fs::path out_dir() {
    if (o_.out.empty()) throw std::runtime_error("--out is required");
    fs::create_directories(o_.out);
    return o_.out;
  }

  void emit(const fs::path& dir, const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    manifest_.output(name, text);
  }

  void finish(const fs::path& dir) { manifest_.write(dir, o_.seed); }

  FeatureConfig feature_config() {
    auto rep = parse_representation(o_.representation);
    if (!rep) throw std::runtime_error("unknown representation '" + o_.representation + "'");
    FeatureConfig cfg{*rep, o_.active, table().content_hash()};
    manifest_.config("features", to_json(cfg));
    return cfg;
  }

  TrainConfig train_config(ModelKind kind) {
    TrainConfig cfg;
    cfg.kind = kind;
    cfg.seed = o_.seed;
    cfg.jobs = o_.jobs;
    if (!o_.hparams.empty()) {
      apply_hyperparameters(cfg.hp, json::parse(read_text(o_.hparams)));
      manifest_.input("hparams", o_.hparams);
    }
    return cfg;
  }

  EvalOptions eval_options() const {
    EvalOptions opts;
    opts.jobs = o_.jobs;
    opts.match.require_contact = o_.strict_contact;
    return opts;
  }

  /// Loads records and manifest, reporting rejected lines on stderr.
  std::vector<Segment> load_segments(AssembleMode mode) {
    if (o_.records.empty()) throw std::runtime_error("--records is required");
    ParsedRecords parsed = parse_records_file(o_.records);
    manifest_.input("records", o_.records);
    for (const auto& d : parsed.diagnostics) {
      std::cerr << o_.records << ":" << d.line << ": " << d.message << "\n";
    }
    rejected_ += parsed.diagnostics.size();
    LabelManifest labels;
    if (!o_.manifest.empty()) {
      labels = load_manifest_file(o_.manifest);
      manifest_.input("manifest", o_.manifest);
    } else if (mode == AssembleMode::training) {
      throw ValidationError("a label manifest (--manifest) is required in training mode");
    }
    AssembleResult assembled = assemble_segments(parsed.groups, labels, mode);
    for (const auto& key : assembled.labels_without_frames) {
      std::cerr << "manifest row " << key.to_string() << " has no frame records\n";
    }
    rejected_ += assembled.labels_without_frames.size();
    std::cerr << "records: " << parsed.valid_records << " valid, " << parsed.diagnostics.size()
              << " rejected; segments: " << assembled.segments.size() << "\n";
    return std::move(assembled.segments);
  }

  int status() const { return rejected_ == 0 ? kExitOk : kExitValidation; }

  void print_summary(const EvaluationReport& r) const {
    std::cout << "weighted F1 " << fmt2(r.weighted_f1.mean) << " ± " << fmt2(r.weighted_f1.std)
              << "; participants above 0.5: " << fmt2(r.percent_above_half) << "%\n";
  }

  Options o_;
  RunManifest manifest_;
  std::optional<CategoryTable> table_;
  std::size_t rejected_ = 0;
};

int Runner::synth() {
  GenSpec spec;
  if (!o_.spec.empty()) {
    spec = gen_spec_from_json(json::parse(read_text(o_.spec)));
    manifest_.input("spec", o_.spec);
  }
  if (o_.seed_given || o_.spec.empty()) spec.seed = o_.seed;
  o_.seed = spec.seed;
  const SyntheticCorpus corpus = generate(spec, table());
  manifest_.config("spec", to_json(spec));
  const fs::path dir = out_dir();
  std::ostringstream rec, gt, man;
  write_records(rec, corpus.records);
  write_records(gt, corpus.ground_truth);
  write_manifest(man, corpus.manifest);
  emit(dir, "records.jsonl", rec.str());
  emit(dir, "ground_truth.jsonl", gt.str());
  emit(dir, "manifest.csv", man.str());
  emit(dir, "spec.json", to_json(spec).dump(2) + "\n");
  finish(dir);
  std::cerr << "wrote " << corpus.manifest.size() << " segments to " << dir.string() << "\n";
  return kExitOk;
}

int Runner::ingest_validate() {
  const auto mode = o_.manifest.empty() ? AssembleMode::inference : AssembleMode::training;
  const auto segments = load_segments(mode);
  std::size_t frames = 0, detections = 0, active = 0;
  for (const auto& s : segments) {
    frames += s.frames.size();
    for (const auto& f : s.frames) {
      detections += f.objects.size();
      for (const auto& m : mark_active(f, eval_options().match)) active += m.active ? 1 : 0;
    }
  }
  std::cout << "segments " << segments.size() << ", frames " << frames << ", detections " << detections
            << ", active " << active << ", rejected " << rejected_ << "\n";
  return status();
}

int Runner::featurize_cmd() {
  const auto segments = load_segments(o_.inference ? AssembleMode::inference : AssembleMode::training);
  const FeatureConfig cfg = feature_config();
  const auto names = feature_names(table(), cfg);
  std::ostringstream csv;
  csv << "# feature_config=" << cfg.id() << " config_hash=" << cfg.hash()
      << " taxonomy_hash=" << cfg.taxonomy_hash << "\n";
  csv << "participant_id,video_id,segment_index,adl_label";
  for (const auto& n : names) csv << "," << n;
  csv << "\n";
  char buf[32];
  for (const auto& s : segments) {
    const FeatureVector fv = featurize(s, table(), cfg, eval_options().match);
    csv << s.key.participant_id << "," << s.key.video_id << "," << s.key.segment_index << ",";
    if (s.label) csv << '"' << s.label->name << '"';
    for (double v : fv.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      csv << "," << buf;
    }
    csv << "\n";
  }
  const fs::path dir = out_dir();
  emit(dir, "features.csv", csv.str());
  finish(dir);
  return status();
}

int Runner::train_cmd() {
  const auto kind = parse_model_kind(o_.model);
  if (!kind) throw std::runtime_error("unknown model '" + o_.model + "'");
  const auto segments = load_segments(AssembleMode::training);
  const FeatureConfig fcfg = feature_config();
  const TrainConfig tcfg = train_config(*kind);
  manifest_.config("train", train_config_to_json(tcfg));
  std::vector<FeatureVector> features;
  std::vector<AdlLabel> labels;
  for (const auto& s : segments) {
    features.push_back(featurize(s, table(), fcfg, eval_options().match));
    labels.push_back(*s.label);
  }
  const TrainedModel model = train(features, labels, tcfg);
  const fs::path dir = out_dir();
  emit(dir, "model.json", save_model(model));
  finish(dir);
  std::cerr << "trained " << to_string(*kind) << " on " << segments.size() << " segments ("
            << model.meta.iterations << " iterations, " << model.meta.stop_reason << ")\n";
  return status();
}

int Runner::evaluate_cmd() {
  const auto segments = load_segments(AssembleMode::training);
  EvaluationReport report;
  if (auto kind = parse_model_kind(o_.model); kind && !fs::exists(o_.model)) {
    const FeatureConfig fcfg = feature_config();
    const TrainConfig tcfg = train_config(*kind);
    manifest_.config("train", train_config_to_json(tcfg));
    report = run_loso(segments, table(), fcfg, tcfg, eval_options());
  } else {
    const TrainedModel model = load_model(read_text(o_.model));
    manifest_.input("model", o_.model);
    if (model.feature_config.taxonomy_hash != table().content_hash()) {
      throw ValidationError("model was trained against a different category table");
    }
    manifest_.config("features", to_json(model.feature_config));
    report = evaluate_model(model, segments, table(), eval_options());
  }
  const fs::path dir = out_dir();
  emit(dir, "report.json", report_to_json(report).dump(2) + "\n");
  std::ostringstream folds;
  folds << "participant_id,segments,weighted_f1\n";
  char buf[32];
  for (const auto& f : report.folds) {
    std::snprintf(buf, sizeof buf, "%.17g", f.weighted_f1);
    folds << f.held_out_participant << "," << f.truth.size() << "," << buf << "\n";
  }
  emit(dir, "folds.csv", folds.str());
  finish(dir);
  print_summary(report);
  return status();
}

int Runner::ablate_cmd() {
  const auto segments = load_segments(AssembleMode::training);
  std::vector<TrainConfig> configs;
  json trains = json::array();
  std::stringstream list(o_.models);
  for (std::string name; std::getline(list, name, ',');) {
    const auto kind = parse_model_kind(name);
    if (!kind) throw std::runtime_error("unknown model '" + name + "'");
    configs.push_back(train_config(*kind));
    trains.push_back(train_config_to_json(configs.back()));
  }
  if (configs.empty()) throw std::runtime_error("--models is empty");
  manifest_.config("train", trains);
  const auto cells = run_ablation(segments, table(), configs, eval_options());
  const fs::path dir = out_dir();
  emit(dir, "grid.csv", ablation_grid_csv(cells));
  json reports = json::array();
  for (const auto& c : cells) reports.push_back(report_to_json(c.report));
  emit(dir, "reports.json", reports.dump(2) + "\n");
  finish(dir);
  for (const auto& c : cells) {
    std::cout << c.features.id() << " " << to_string(c.report.train_config.kind) << ": ";
    print_summary(c.report);
  }
  return status();
}

/// Renders a grid.csv or report.json at two decimals.
int Runner::report_cmd() {
  if (o_.input.empty()) throw std::runtime_error("an input file is required");
  const std::string text = read_text(o_.input);
  if (o_.input.size() > 5 && o_.input.substr(o_.input.size() - 5) == ".json") {
    const json doc = json::parse(text);
    const auto& s = doc.at("summary");
    std::cout << "weighted F1 " << fmt2(s.at("weighted_f1_mean").get<double>()) << " ± "
              << fmt2(s.at("weighted_f1_std").get<double>()) << "; participants above 0.5: "
              << fmt2(s.at("percent_participants_above_0_5").get<double>()) << "%\n";
    for (const auto& f : doc.at("folds")) {
      std::cout << "  " << f.at("held_out_participant").get<std::string>() << " "
                << fmt2(f.at("weighted_f1").get<double>()) << "\n";
    }
    return kExitOk;
  }
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::cout << "representation  active  model   F1           above 0.5\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    if (cols.size() < 6) throw ParseError("malformed grid row: " + line);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-15s %-7s %-7s %s ± %s  %s%%", cols[0].c_str(), cols[1].c_str(),
                  cols[2].c_str(), fmt2(std::stod(cols[3])).c_str(), fmt2(std::stod(cols[4])).c_str(),
                  fmt2(std::stod(cols[5])).c_str());
    std::cout << buf << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Object-centric ADL recognition from egocentric detection records"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--taxonomy", o.taxonomy, "Category table file (default: built-in 29 categories)")
        ->check(CLI::ExistingFile);
  };
  auto add_data = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--records", o.records, "Frame records (JSON lines)")->required()->check(CLI::ExistingFile);
    sub->add_option("--manifest", o.manifest, "Segment label manifest (CSV)")->check(CLI::ExistingFile);
    sub->add_flag("--require-contact", o.strict_contact, "Only HOI boxes with a contact state mark objects active");
  };
  auto add_features = [&](CLI::App* sub) {
    sub->add_option("--representation", o.representation, "counts|binary|both")
        ->check(CLI::IsMember({"counts", "binary", "both"}));
    sub->add_flag("--active,!--no-active", o.active, "Add active-object channels (default on)");
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed (default 42)");
    sub->add_option("--jobs", o.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    sub->add_option("--hparams", o.hparams, "Hyperparameter overrides (JSON keyed by model)")
        ->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory")->required(); };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  add_common(synth);
  synth->add_option("--spec", o.spec, "Generator spec (JSON); defaults apply when omitted")
      ->check(CLI::ExistingFile);
  synth->add_option("--seed", o.seed, "Random seed (default 42)");
  add_out(synth);

  auto* validate_cmd = app.add_subcommand("ingest-validate", "Validate records and manifest");
  add_data(validate_cmd);

  auto* feat = app.add_subcommand("featurize", "Write the segment feature matrix");
  add_data(feat);
  add_features(feat);
  feat->add_flag("--inference", o.inference, "Allow unlabeled segments (no manifest)");
  add_out(feat);

  auto* train_sub = app.add_subcommand("train", "Train one classifier on all labeled segments");
  add_data(train_sub);
  add_features(train_sub);
  add_training(train_sub);
  train_sub->add_option("--model", o.model, "logreg|rf|gb|mlp");
  add_out(train_sub);

  auto* eval_sub = app.add_subcommand("evaluate", "LOSO evaluation, or scoring of a saved model file");
  add_data(eval_sub);
  add_features(eval_sub);
  add_training(eval_sub);
  eval_sub->add_option("--model", o.model, "logreg|rf|gb|mlp, or a model file from `train`");
  add_out(eval_sub);

  auto* ablate = app.add_subcommand("ablate", "Six feature configurations crossed with models");
  add_data(ablate);
  add_training(ablate);
  ablate->add_option("--models", o.models, "Comma-separated model kinds");
  add_out(ablate);

  auto* report = app.add_subcommand("report", "Print a grid.csv or report.json at two decimals");
  report->add_option("input", o.input, "grid.csv or report.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  o.seed_given = synth->get_option("--seed")->count() > 0;
  std::string invocation;
  for (int i = 0; i < argc; ++i) invocation += (i ? " " : "") + std::string(argv[i]);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Runner r(o, name, invocation);
    if (name == "synth") return r.synth();
    if (name == "ingest-validate") return r.ingest_validate();
    if (name == "featurize") return r.featurize_cmd();
    if (name == "train") return r.train_cmd();
    if (name == "evaluate") return r.evaluate_cmd();
    if (name == "ablate") return r.ablate_cmd();
    return r.report_cmd();
  } catch (const std::exception& e) {
    std::cerr << "egoadl " << name << ": " << e.what() << "\n";
    return kExitFatal;
  }
}

}  // namespace egoadl::cli
