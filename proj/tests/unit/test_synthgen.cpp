#include <doctest.h>

#include <set>
#include <sstream>

#include "egoadl/error.hpp"
#include "egoadl/features.hpp"
#include "egoadl/synthgen.hpp"
#include "oracles.hpp"

using namespace egoadl;

namespace {

const CategoryTable& table() { return default_category_table(); }

std::string dump(const FrameGroups& g) {
  std::ostringstream out;
  write_records(out, g);
  return out.str();
}

std::size_t detection_count(const FrameGroups& g) {
  std::size_t n = 0;
  for (const auto& [k, frames] : g)
    for (const auto& f : frames) n += f.objects.size();
  return n;
}

}  // namespace

TEST_CASE("manifest size follows participants x segments") {
  auto spec = fixture::small_spec(1, 16, 20);
  spec.adl_mix = {257, 207, 172, 428, 407, 625, 165};
  const auto corpus = generate(spec, table());
  CHECK(corpus.manifest.size() == 320);
  std::set<std::string> participants;
  for (const auto& [key, label] : corpus.manifest) participants.insert(key.participant_id);
  CHECK(participants.size() == 16);
}

TEST_CASE("default mix is proportional to the reference class counts") {
  GenSpec spec;
  spec.participants = 2;
  const auto corpus = generate(spec, table());
  std::array<int, kNumAdl> per_class{};
  for (const auto& [key, label] : corpus.manifest) ++per_class[static_cast<std::size_t>(label.id)];
  const auto ref = paper_class_counts();
  for (std::size_t a = 0; a < kNumAdl; ++a) {
    const double expected = 100.0 * ref.counts[a] / ref.total();
    CHECK(std::abs(per_class[a] - expected) <= 2.0);
  }
}

TEST_CASE("same spec gives byte-identical output; a new seed changes it") {
  const auto spec = fixture::small_spec(3, 3, 10);
  const auto a = generate(spec, table()), b = generate(spec, table());
  CHECK(dump(a.records) == dump(b.records));
  CHECK(a.manifest == b.manifest);
  auto other = spec;
  other.seed = 4;
  CHECK(dump(generate(other, table()).records) != dump(a.records));
}

TEST_CASE("zero noise leaves records equal to the ground truth") {
  const auto corpus = generate(fixture::small_spec(5, 2, 7), table());
  CHECK(corpus.records == corpus.ground_truth);
  CHECK(perturb(corpus.records, NoiseModel{}, table(), 9) == corpus.records);
}

TEST_CASE("generated records pass ingest validation") {
  auto spec = fixture::small_spec(6, 3, 14);
  spec.noise = {0.2, 0.5, 0.2, 5.0};
  const auto corpus = generate(spec, table());
  std::stringstream io;
  write_records(io, corpus.records);
  const auto parsed = parse_records(io);
  CHECK(parsed.diagnostics.empty());
  CHECK(parsed.groups == corpus.records);
  const auto assembled = assemble_segments(parsed.groups, corpus.manifest, AssembleMode::training);
  CHECK(assembled.segments.size() == corpus.manifest.size());
  CHECK(assembled.labels_without_frames.empty());
}

TEST_CASE("drop noise") {
  const auto corpus = generate(fixture::small_spec(7, 8, 28), table());
  NoiseModel all;
  all.drop_rate = 1.0;
  CHECK(detection_count(perturb(corpus.records, all, table(), 1)) == 0);

  NoiseModel some;
  some.drop_rate = 0.3;
  const double before = static_cast<double>(detection_count(corpus.records));
  REQUIRE(before >= 10000);
  const double kept = static_cast<double>(detection_count(perturb(corpus.records, some, table(), 1)));
  CHECK(std::abs((1.0 - kept / before) - 0.3) <= 0.02);
}

TEST_CASE("spurious, confusion and jitter noise keep records valid") {
  const auto corpus = generate(fixture::small_spec(8, 2, 14), table());
  NoiseModel spurious;
  spurious.spurious_rate = 1.0;
  const auto s = perturb(corpus.records, spurious, table(), 2);
  std::size_t frames = 0;
  for (const auto& [k, f] : corpus.records) frames += f.size();
  CHECK(detection_count(s) == detection_count(corpus.records) + frames);

  NoiseModel confuse;
  confuse.label_confusion_rate = 1.0;
  const auto c = perturb(corpus.records, confuse, table(), 3);
  for (const auto& [key, fs] : corpus.records) {
    const auto& other = c.at(key);
    for (std::size_t f = 0; f < fs.size(); ++f) {
      for (std::size_t o = 0; o < fs[f].objects.size(); ++o) {
        CHECK(table().map_label(fs[f].objects[o].raw_label) != table().map_label(other[f].objects[o].raw_label));
      }
    }
  }

  NoiseModel jitter;
  jitter.box_jitter_px = 50.0;
  for (const auto& [key, fs] : perturb(corpus.records, jitter, table(), 4)) {
    for (const auto& f : fs) {
      for (const auto& o : f.objects) {
        CHECK(Box2D::check(o.box.x1, o.box.y1, o.box.x2, o.box.y2).empty());
        CHECK(o.box.x1 >= 0.0);
        CHECK(o.box.x2 <= kCanvasWidth);
      }
    }
  }
}

TEST_CASE("spec validation") {
  GenSpec spec;
  CHECK_NOTHROW(validate(spec, table()));
  auto bad = spec;
  bad.noise.drop_rate = 1.5;
  CHECK_THROWS_AS(validate(bad, table()), ValidationError);
  bad = spec;
  bad.frames_per_segment = 61;
  CHECK_THROWS_AS(validate(bad, table()), ValidationError);
  bad = spec;
  bad.adl_profiles = default_profiles();
  bad.adl_profiles[1].core.push_back({"drinkware", 0.5});
  CHECK_THROWS_WITH_AS(validate(bad, table()), doctest::Contains("shared"), ValidationError);
  bad.adl_profiles = default_profiles();
  bad.adl_profiles[0].context.push_back({"no_such_category", 0.5});
  CHECK_THROWS_AS(validate(bad, table()), ValidationError);
  bad.adl_profiles = default_profiles();
  bad.adl_profiles.pop_back();
  CHECK_THROWS_AS(validate(bad, table()), ValidationError);
}

TEST_CASE("spec JSON round trip and unknown fields") {
  auto spec = fixture::small_spec(11, 3, 9);
  spec.noise.spurious_rate = 0.25;
  spec.distractor_adls = 2;
  spec.distractor_probability = 0.4;
  const auto j = to_json(spec);
  CHECK(to_json(gen_spec_from_json(j)) == j);
  CHECK_THROWS_AS(gen_spec_from_json(nlohmann::json::parse(R"({"participant": 3})")), ValidationError);
  CHECK_THROWS_AS(gen_spec_from_json(nlohmann::json::parse(R"({"noise": {"drop": 0.1}})")), ValidationError);
  CHECK_THROWS_AS(gen_spec_from_json(nlohmann::json::parse(R"({"participants": "many"})")), ValidationError);
  const auto partial = gen_spec_from_json(nlohmann::json::parse(R"({"adl_mix": {"Self-Feeding": 1}})"));
  CHECK(partial.adl_mix[0] == 1.0);
  CHECK(partial.adl_mix[1] == 0.0);
}

TEST_CASE("participant effect never moves active objects outside the ADL core") {
  auto spec = fixture::small_spec(12, 6, 14);
  spec.participant_effect = {1.0};
  spec.distractor_adls = 3;
  spec.distractor_probability = 0.5;
  const auto corpus = generate(spec, table());
  const auto profiles = default_profiles();
  for (const auto& s : fixture::segments(corpus.ground_truth, corpus.manifest)) {
    std::set<std::size_t> core;
    for (const auto& c : profiles[static_cast<std::size_t>(s.label->id)].core) core.insert(*table().index_of(c.category));
    const auto b = raw_binary(s, table(), true);
    for (std::size_t c = 0; c < table().size(); ++c) {
      if (b[table().size() + c] > 0) CHECK(core.count(c) == 1);
    }
  }
}

TEST_CASE("clean default corpus is learnable by a nearest-centroid oracle") {
  const auto corpus = generate(GenSpec{}, table());
  const auto segs = fixture::segments(corpus.records, corpus.manifest);
  const FeatureConfig cfg{Representation::binary, true, table().content_hash()};
  std::vector<std::vector<double>> x;
  for (const auto& s : segs) x.push_back(featurize(s, table(), cfg).values);
  CHECK(oracle::nearest_centroid_loso(segs, x) >= 0.95);
}
