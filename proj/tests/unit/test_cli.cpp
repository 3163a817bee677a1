#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "egoadl/digest.hpp"
#include "egoadl/models.hpp"
#include "egoadl/records.hpp"

namespace fs = std::filesystem;
using namespace egoadl;

namespace {

/// Scratch directory removed on scope exit.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("egoadl_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(EGOADL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

/// Column count of the first non-comment line.
std::size_t header_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line) && line.rfind('#', 0) == 0) {}
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

const char* kSmallSpec = R"({"participants": 3, "segments_per_participant": 14, "adl_mix": [1,1,1,1,1,1,1]})";
const char* kFastModels = R"({"rf": {"n_trees": 5}, "gb": {"n_stages": 5}, "mlp": {"hidden": 8, "max_epochs": 5}})";

}  // namespace

TEST_CASE("synth writes a corpus with provenance and is reproducible") {
  Scratch s("synth");
  write(s / "spec.json", kSmallSpec);
  REQUIRE(run("synth --spec " + s / "spec.json" + " --seed 5 --out " + s / "a") == 0);
  REQUIRE(run("synth --spec " + s / "spec.json" + " --seed 5 --out " + s / "b") == 0);
  for (const char* f : {"records.jsonl", "ground_truth.jsonl", "manifest.csv", "run.json"}) {
    CHECK_MESSAGE(fs::exists(s / (std::string("a/") + f)), f);
  }
  CHECK(sha256_file(s / "a/records.jsonl") == sha256_file(s / "b/records.jsonl"));
  CHECK(sha256_file(s / "a/manifest.csv") == sha256_file(s / "b/manifest.csv"));
  const auto manifest = nlohmann::json::parse(slurp(s / "a/run.json"));
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("command") == "synth");
  CHECK(manifest.at("inputs").contains("spec"));
  CHECK(manifest.at("tool_version") == "0.1.0");
  CHECK(manifest.at("outputs").at("records.jsonl") == sha256_file(s / "a/records.jsonl"));

  write(s / "bad.json", R"({"participants": 3, "noise": {"drop_rate": 2}})");
  CHECK(run("synth --spec " + s / "bad.json" + " --out " + s / "c") != 0);
  write(s / "broken.json", "{");
  CHECK(run("synth --spec " + s / "broken.json" + " --out " + s / "c") != 0);
}

TEST_CASE("featurize, validation and exit codes") {
  Scratch s("feat");
  write(s / "spec.json", kSmallSpec);
  REQUIRE(run("synth --spec " + s / "spec.json" + " --out " + s / "c") == 0);
  const std::string data = " --records " + s / "c/records.jsonl" + " --manifest " + s / "c/manifest.csv";

  REQUIRE(run("featurize" + data + " --representation binary --active --out " + s / "f1") == 0);
  const auto csv = slurp(s / "f1/features.csv");
  CHECK(header_columns(csv) == 4 + 58);
  CHECK(csv.find("taxonomy_hash=") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 42);
  REQUIRE(run("featurize" + data + " --representation both --active --out " + s / "f2") == 0);
  CHECK(header_columns(slurp(s / "f2/features.csv")) == 4 + 116);
  REQUIRE(run("featurize" + data + " --representation counts --no-active --out " + s / "f3") == 0);
  CHECK(header_columns(slurp(s / "f3/features.csv")) == 4 + 29);
  CHECK(fs::exists(s / "f3/run.json"));

  CHECK(run("featurize --records " + s / "c/records.jsonl" + " --out " + s / "f4") != 0);
  CHECK(run("featurize --records " + s / "c/records.jsonl" + " --inference --out " + s / "f4") == 0);

  CHECK(run("ingest-validate" + data) == 0);
  std::string records = slurp(s / "c/records.jsonl");
  write(s / "dirty.jsonl", records + "{\"participant_id\": 1}\n");
  CHECK(run("ingest-validate --records " + s / "dirty.jsonl" + " --manifest " + s / "c/manifest.csv") == 1);
  CHECK(run("featurize --records " + s / "dirty.jsonl" + " --manifest " + s / "c/manifest.csv" + " --out " +
            s / "f5") == 1);
  CHECK(fs::exists(s / "f5/features.csv"));
  CHECK(run("no-such-command") != 0);
}

TEST_CASE("train then evaluate a saved model reproduces in-process predictions") {
  Scratch s("train");
  write(s / "spec.json", kSmallSpec);
  REQUIRE(run("synth --spec " + s / "spec.json" + " --out " + s / "c") == 0);
  const std::string data = " --records " + s / "c/records.jsonl" + " --manifest " + s / "c/manifest.csv";
  REQUIRE(run("train" + data + " --model logreg --representation counts --active --out " + s / "m") == 0);
  REQUIRE(run("evaluate" + data + " --model " + s / "m/model.json" + " --out " + s / "e") == 0);

  const auto model = load_model(slurp(s / "m/model.json"));
  CHECK(model.feature_config.id() == "counts+active");
  const auto report = nlohmann::json::parse(slurp(s / "e/report.json"));
  CHECK(report.at("mode") == "fixed-model");
  const auto& table = default_category_table();
  const auto segments = assemble_segments(parse_records_file(s / "c/records.jsonl").groups,
                                          load_manifest_file(s / "c/manifest.csv"), AssembleMode::training)
                            .segments;
  std::map<std::string, std::string> predicted;
  for (const auto& fold : report.at("folds")) {
    for (const auto& p : fold.at("predictions")) {
      const SegmentKey key{p.at("participant_id"), p.at("video_id"), p.at("segment_index")};
      predicted[key.to_string()] = p.at("predicted");
    }
  }
  REQUIRE(predicted.size() == segments.size());
  for (const auto& seg : segments) {
    const int label = predict_label(model, featurize(seg, table, model.feature_config));
    CHECK(predicted.at(seg.key.to_string()) == adl_label(label).name);
  }
}

TEST_CASE("LOSO evaluate and a four-model ablation grid") {
  Scratch s("ablate");
  write(s / "spec.json", kSmallSpec);
  write(s / "hp.json", kFastModels);
  REQUIRE(run("synth --spec " + s / "spec.json" + " --out " + s / "c") == 0);
  const std::string data = " --records " + s / "c/records.jsonl" + " --manifest " + s / "c/manifest.csv";
  REQUIRE(run("evaluate" + data + " --model logreg --out " + s / "e") == 0);
  const auto report = nlohmann::json::parse(slurp(s / "e/report.json"));
  CHECK(report.at("mode") == "loso");
  CHECK(report.at("folds").size() == 3);

  REQUIRE(run("ablate" + data + " --models logreg,rf,gb,mlp --hparams " + s / "hp.json" + " --jobs 2 --out " +
              s / "a") == 0);
  const auto grid = slurp(s / "a/grid.csv");
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 1 + 24);
  CHECK(run("report " + s / "a/grid.csv") == 0);
  CHECK(run("report " + s / "e/report.json") == 0);
  CHECK(run("ablate" + data + " --models logreg,svm --out " + s / "x") != 0);
}
