#include "egoadl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "egoadl/error.hpp"
#include "egoadl/interaction.hpp"
#include "egoadl/random.hpp"

namespace egoadl {

using nlohmann::json;

std::vector<AdlProfile> default_profiles() {
  const std::vector<CategoryRate> context = {
      {"furniture", 0.5}, {"furnishing", 0.4}, {"other", 0.3}, {"clothing_accessory", 0.15}};
  auto core = [](std::initializer_list<const char*> names) {
    std::vector<CategoryRate> out;
    for (const char* n : names) out.push_back({n, 0.6});
    return out;
  };
  return {
      {0, core({"tableware", "drinkware", "food"}), context, 0.9},
      {1, core({"wheelchair_walker", "house_fixtures", "footwear"}), context, 0.9},
      {2, core({"toiletries", "bathroom_fixture", "medication", "personal_care"}), context, 0.9},
      {3, core({"phone_tablet", "tv_computer", "electronics", "office_stationary"}), context, 0.9},
      {4, core({"cleaning_product", "home_appliance_tool", "clothing", "bag"}), context, 0.9},
      {5, core({"kitchen_utensils", "kitchen_appliance", "sink"}), context, 0.9},
      {6, core({"sports_equipment", "books_paper", "toys_games", "hobby_craft"}), context, 0.9},
  };
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ValidationError("gen spec: " + msg); }

void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) bad(what + " must be in [0, 1]");
}

const std::vector<AdlProfile>& profiles_of(const GenSpec& spec, std::vector<AdlProfile>& storage) {
  if (!spec.adl_profiles.empty()) return spec.adl_profiles;
  storage = default_profiles();
  return storage;
}

struct ResolvedRate {
  std::size_t category;
  double probability;
  bool core;
};

struct ResolvedProfile {
  std::vector<ResolvedRate> rates;  // core first, then context
  std::vector<std::size_t> core_categories;
  double active_probability;
};

std::vector<ResolvedProfile> resolve(const GenSpec& spec, const CategoryTable& table) {
  std::vector<AdlProfile> storage;
  const auto& profiles = profiles_of(spec, storage);
  std::vector<ResolvedProfile> out(kNumAdl);
  for (const auto& p : profiles) {
    auto& r = out[static_cast<std::size_t>(p.adl)];
    r.active_probability = p.active_probability;
    for (const auto& c : p.core) {
      const std::size_t idx = *table.index_of(c.category);
      r.rates.push_back({idx, c.probability, true});
      r.core_categories.push_back(idx);
    }
    for (const auto& c : p.context) r.rates.push_back({*table.index_of(c.category), c.probability, false});
  }
  return out;
}

std::vector<int> apportion(int total, const std::array<double, kNumAdl>& mix) {
  const double sum = std::accumulate(mix.begin(), mix.end(), 0.0);
  std::vector<int> counts(kNumAdl);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t a = 0; a < kNumAdl; ++a) {
    const double exact = total * mix[a] / sum;
    counts[a] = static_cast<int>(std::floor(exact));
    assigned += counts[a];
    remainders.push_back({exact - counts[a], a});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[remainders[i % kNumAdl].second];
  return counts;
}

std::string participant_name(int p, int total) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(total).size());
  std::string digits = std::to_string(p + 1);
  return "P" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::string video_name(int v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "V%02d", v);
  return buf;
}

/// Nearest multiple of 1/den, computed by division so it prints short.
double round_to(double v, double den) { return std::round(v * den) / den; }

Box2D random_box(CounterRng& rng) {
  const double w = 40.0 + static_cast<double>(rng.below(361));
  const double h = 40.0 + static_cast<double>(rng.below(261));
  const double x1 = static_cast<double>(rng.below(static_cast<std::uint64_t>(kCanvasWidth - w) + 1));
  const double y1 = static_cast<double>(rng.below(static_cast<std::uint64_t>(kCanvasHeight - h) + 1));
  return Box2D{x1, y1, x1 + w, y1 + h};
}

const std::string& pick_raw_label(const CategoryTable& table, std::size_t category, CounterRng& rng) {
  const auto& raw = table.raw_labels(category);
  if (raw.empty()) return table.category(category);
  return raw[static_cast<std::size_t>(rng.below(raw.size()))];
}

bool overlaps_hand(const Box2D& box, const std::vector<HoiObject>& hands) {
  for (const auto& h : hands) {
    if (iou(box, h.box) > 0.5) return true;
  }
  return false;
}

std::uint64_t key_stream(const SegmentKey& key) { return derive_seed(0, key.to_string()); }

}  // namespace

void validate(const GenSpec& spec, const CategoryTable& table) {
  if (spec.participants < 1) bad("participants must be >= 1");
  if (spec.segments_per_participant < 1) bad("segments_per_participant must be >= 1");
  if (spec.frames_per_segment < 1 || spec.frames_per_segment > kFramesPerSegment) {
    bad("frames_per_segment must be in [1, 60]");
  }
  if (spec.segments_per_video < 1) bad("segments_per_video must be >= 1");
  if (spec.max_instances < 1) bad("max_instances must be >= 1");
  double mix_sum = 0.0;
  for (double m : spec.adl_mix) {
    if (!(m >= 0.0) || !std::isfinite(m)) bad("adl_mix weights must be finite and non-negative");
    mix_sum += m;
  }
  if (mix_sum <= 0.0) bad("adl_mix must have a positive weight");
  if (spec.participant_effect.empty()) bad("participant_effect must not be empty");
  if (spec.participant_effect.size() != 1 &&
      spec.participant_effect.size() != static_cast<std::size_t>(spec.participants)) {
    bad("participant_effect must have 1 or `participants` entries");
  }
  for (double e : spec.participant_effect) check_prob(e, "participant_effect");
  if (spec.distractor_adls < 0 || spec.distractor_adls >= static_cast<int>(kNumAdl)) {
    bad("distractor_adls must be in [0, 6]");
  }
  check_prob(spec.distractor_probability, "distractor_probability");
  check_prob(spec.noise.drop_rate, "noise.drop_rate");
  check_prob(spec.noise.spurious_rate, "noise.spurious_rate");
  check_prob(spec.noise.label_confusion_rate, "noise.label_confusion_rate");
  if (!(spec.noise.box_jitter_px >= 0.0) || !std::isfinite(spec.noise.box_jitter_px)) {
    bad("noise.box_jitter_px must be finite and non-negative");
  }
  if (spec.noise.label_confusion_rate > 0.0 && table.size() < 2) bad("label confusion needs >= 2 categories");

  std::vector<AdlProfile> storage;
  const auto& profiles = profiles_of(spec, storage);
  if (profiles.size() != kNumAdl) bad("adl_profiles must list all 7 ADLs");
  std::set<int> seen_adl;
  std::set<std::string> core_seen;
  for (const auto& p : profiles) {
    if (p.adl < 0 || p.adl >= static_cast<int>(kNumAdl) || !seen_adl.insert(p.adl).second) {
      bad("adl_profiles must list each ADL exactly once");
    }
    const std::string where = "profile '" + std::string(adl_label(p.adl).name) + "': ";
    check_prob(p.active_probability, where + "active_probability");
    if (p.core.empty()) bad(where + "needs at least one core category");
    for (const auto& c : p.core) {
      if (!table.index_of(c.category)) bad(where + "unknown category '" + c.category + "'");
      check_prob(c.probability, where + c.category);
      if (!core_seen.insert(c.category).second) bad(where + "core category '" + c.category + "' is shared");
    }
    for (const auto& c : p.context) {
      if (!table.index_of(c.category)) bad(where + "unknown category '" + c.category + "'");
      check_prob(c.probability, where + c.category);
    }
  }
}

SyntheticCorpus generate(const GenSpec& spec, const CategoryTable& table) {
  validate(spec, table);
  const auto profiles = resolve(spec, table);
  const auto per_adl = apportion(spec.segments_per_participant, spec.adl_mix);
  const std::size_t num_categories = table.size();

  SyntheticCorpus corpus;
  for (int p = 0; p < spec.participants; ++p) {
    const std::string pid = participant_name(p, spec.participants);
    const double strength = spec.participant_effect.size() == 1 ? spec.participant_effect[0]
                                                                 : spec.participant_effect[static_cast<std::size_t>(p)];
    // Participant-level frequency bias; never changes which categories are core.
    CounterRng prng(derive_seed(spec.seed, "participant"), static_cast<std::uint64_t>(p));
    std::vector<double> bias(num_categories);
    for (double& b : bias) b = 1.0 + strength * prng.uniform(-1.0, 1.0);

    std::vector<int> adl_sequence;
    for (std::size_t a = 0; a < kNumAdl; ++a) adl_sequence.insert(adl_sequence.end(), per_adl[a], static_cast<int>(a));
    prng.shuffle(adl_sequence);

    for (int s = 0; s < spec.segments_per_participant; ++s) {
      const int adl = adl_sequence[static_cast<std::size_t>(s)];
      SegmentKey key{pid, video_name(s / spec.segments_per_video), s % spec.segments_per_video};
      CounterRng rng(derive_seed(spec.seed, "segment"), key_stream(key));
      const auto& prof = profiles[static_cast<std::size_t>(adl)];

      std::vector<ResolvedRate> rates = prof.rates;
      if (spec.distractor_adls > 0) {
        std::vector<int> others;
        for (int a = 0; a < static_cast<int>(kNumAdl); ++a) {
          if (a != adl) others.push_back(a);
        }
        rng.shuffle(others);
        for (int i = 0; i < spec.distractor_adls; ++i) {
          for (std::size_t c : profiles[static_cast<std::size_t>(others[static_cast<std::size_t>(i)])].core_categories) {
            rates.push_back({c, spec.distractor_probability, false});
          }
        }
      }

      auto& frames = corpus.ground_truth[key];
      for (int f = 0; f < spec.frames_per_segment; ++f) {
        FrameObservation frame;
        frame.frame_index = f;
        std::vector<bool> active;
        for (const auto& r : rates) {
          if (!rng.bernoulli(std::clamp(r.probability * bias[r.category], 0.0, 1.0))) continue;
          const int instances = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_instances)));
          for (int i = 0; i < instances; ++i) {
            ObjectDetection det;
            det.raw_label = pick_raw_label(table, r.category, rng);
            det.box = random_box(rng);
            det.score = round_to(rng.uniform(0.5, 1.0), 1000.0);
            if (r.core && rng.bernoulli(prof.active_probability)) {
              HoiObject hoi;
              hoi.box = Box2D{det.box.x1 + 1, det.box.y1 + 1, det.box.x2 - 1, det.box.y2 - 1};
              hoi.hand_side = rng.bernoulli(0.5) ? HandSide::right : HandSide::left;
              hoi.contact_state = "portable";
              hoi.score = round_to(rng.uniform(0.5, 1.0), 1000.0);
              frame.hoi_objects.push_back(std::move(hoi));
              active.push_back(true);
            } else {
              active.push_back(false);
            }
            frame.objects.push_back(std::move(det));
          }
        }
        // Passive objects must not coincide with a hand box by chance.
        for (std::size_t o = 0; o < frame.objects.size(); ++o) {
          if (active[o]) continue;
          for (int attempt = 0; attempt < 32 && overlaps_hand(frame.objects[o].box, frame.hoi_objects); ++attempt) {
            frame.objects[o].box = random_box(rng);
          }
        }
        frames.push_back(std::move(frame));
      }
      corpus.manifest.emplace(key, adl_label(adl));
    }
  }
  corpus.records = perturb(corpus.ground_truth, spec.noise, table, derive_seed(spec.seed, "noise"));
  return corpus;
}

FrameGroups perturb(const FrameGroups& records, const NoiseModel& noise, const CategoryTable& table,
                    std::uint64_t seed) {
  if (noise.is_zero()) return records;
  FrameGroups out;
  const double j = noise.box_jitter_px;
  for (const auto& [key, frames] : records) {
    CounterRng rng(seed, key_stream(key));
    auto& dst = out[key];
    for (const auto& frame : frames) {
      FrameObservation f;
      f.frame_index = frame.frame_index;
      f.hoi_objects = frame.hoi_objects;
      for (const auto& det : frame.objects) {
        if (rng.bernoulli(noise.drop_rate)) continue;
        ObjectDetection d = det;
        if (rng.bernoulli(noise.label_confusion_rate)) {
          const std::size_t current = table.map_label(d.raw_label);
          std::size_t other = static_cast<std::size_t>(rng.below(table.size() - 1));
          if (other >= current) ++other;
          d.raw_label = pick_raw_label(table, other, rng);
        }
        if (j > 0.0) {
          double x1 = std::clamp(d.box.x1 + rng.uniform(-j, j), 0.0, kCanvasWidth);
          double y1 = std::clamp(d.box.y1 + rng.uniform(-j, j), 0.0, kCanvasHeight);
          double x2 = std::clamp(d.box.x2 + rng.uniform(-j, j), 0.0, kCanvasWidth);
          double y2 = std::clamp(d.box.y2 + rng.uniform(-j, j), 0.0, kCanvasHeight);
          if (x1 > x2) std::swap(x1, x2);
          if (y1 > y2) std::swap(y1, y2);
          if (x2 - x1 < 1.0) {
            if (x1 + 1.0 <= kCanvasWidth) x2 = x1 + 1.0; else x1 = x2 - 1.0;
          }
          if (y2 - y1 < 1.0) {
            if (y1 + 1.0 <= kCanvasHeight) y2 = y1 + 1.0; else y1 = y2 - 1.0;
          }
          d.box = Box2D{round_to(x1, 100.0), round_to(y1, 100.0), round_to(x2, 100.0), round_to(y2, 100.0)};
        }
        f.objects.push_back(std::move(d));
      }
      if (rng.bernoulli(noise.spurious_rate)) {
        ObjectDetection d;
        d.raw_label = pick_raw_label(table, static_cast<std::size_t>(rng.below(table.size())), rng);
        d.box = random_box(rng);
        d.score = round_to(rng.uniform(0.3, 1.0), 1000.0);
        f.objects.push_back(std::move(d));
      }
      dst.push_back(std::move(f));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::vector<CategoryRate> rates_from_json(const json& j, const std::string& where) {
  std::vector<CategoryRate> out;
  if (j.is_object()) {
    for (const auto& [cat, p] : j.items()) {
      if (!p.is_number()) bad(where + " probability for '" + cat + "' must be a number");
      out.push_back({cat, p.get<double>()});
    }
  } else if (j.is_array()) {
    for (const auto& e : j) out.push_back({e.at("category").get<std::string>(), e.at("probability").get<double>()});
  } else {
    bad(where + " must be an object or array");
  }
  return out;
}

json rates_to_json(const std::vector<CategoryRate>& rates) {
  json out = json::array();
  for (const auto& r : rates) out.push_back({{"category", r.category}, {"probability", r.probability}});
  return out;
}

}  // namespace

GenSpec gen_spec_from_json(const json& j) {
  if (!j.is_object()) bad("document must be an object");
  GenSpec spec;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") {
        spec.seed = v.get<std::uint64_t>();
      } else if (key == "participants") {
        spec.participants = v.get<int>();
      } else if (key == "segments_per_participant") {
        spec.segments_per_participant = v.get<int>();
      } else if (key == "frames_per_segment") {
        spec.frames_per_segment = v.get<int>();
      } else if (key == "segments_per_video") {
        spec.segments_per_video = v.get<int>();
      } else if (key == "max_instances") {
        spec.max_instances = v.get<int>();
      } else if (key == "adl_mix") {
        if (v.is_array()) {
          if (v.size() != kNumAdl) bad("adl_mix array must have 7 entries");
          for (std::size_t a = 0; a < kNumAdl; ++a) spec.adl_mix[a] = v[a].get<double>();
        } else {
          spec.adl_mix.fill(0.0);
          for (const auto& [name, w] : v.items()) {
            auto label = find_adl(name);
            if (!label) bad("adl_mix: unknown ADL '" + name + "'");
            spec.adl_mix[static_cast<std::size_t>(label->id)] = w.get<double>();
          }
        }
      } else if (key == "participant_effect") {
        spec.participant_effect = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      } else if (key == "distractor_adls") {
        spec.distractor_adls = v.get<int>();
      } else if (key == "distractor_probability") {
        spec.distractor_probability = v.get<double>();
      } else if (key == "noise") {
        for (const auto& [nk, nv] : v.items()) {
          if (nk == "drop_rate") spec.noise.drop_rate = nv.get<double>();
          else if (nk == "spurious_rate") spec.noise.spurious_rate = nv.get<double>();
          else if (nk == "label_confusion_rate") spec.noise.label_confusion_rate = nv.get<double>();
          else if (nk == "box_jitter_px") spec.noise.box_jitter_px = nv.get<double>();
          else bad("unknown noise field '" + nk + "'");
        }
      } else if (key == "adl_profiles") {
        for (const auto& pj : v) {
          AdlProfile p;
          auto label = find_adl(pj.at("adl").get<std::string>());
          if (!label) bad("adl_profiles: unknown ADL '" + pj.at("adl").get<std::string>() + "'");
          p.adl = label->id;
          p.core = rates_from_json(pj.at("core"), "core");
          if (pj.contains("context")) p.context = rates_from_json(pj.at("context"), "context");
          if (pj.contains("active_probability")) p.active_probability = pj.at("active_probability").get<double>();
          spec.adl_profiles.push_back(std::move(p));
        }
      } else {
        bad("unknown field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    bad(std::string("malformed field: ") + e.what());
  }
  return spec;
}

json to_json(const GenSpec& spec) {
  std::vector<AdlProfile> storage;
  const auto& profiles = profiles_of(spec, storage);
  json pj = json::array();
  for (const auto& p : profiles) {
    pj.push_back({{"adl", std::string(adl_label(p.adl).name)},
                  {"core", rates_to_json(p.core)},
                  {"context", rates_to_json(p.context)},
                  {"active_probability", p.active_probability}});
  }
  return json{{"seed", spec.seed},
              {"participants", spec.participants},
              {"segments_per_participant", spec.segments_per_participant},
              {"adl_mix", std::vector<double>(spec.adl_mix.begin(), spec.adl_mix.end())},
              {"frames_per_segment", spec.frames_per_segment},
              {"segments_per_video", spec.segments_per_video},
              {"max_instances", spec.max_instances},
              {"participant_effect", spec.participant_effect},
              {"distractor_adls", spec.distractor_adls},
              {"distractor_probability", spec.distractor_probability},
              {"noise",
               {{"drop_rate", spec.noise.drop_rate},
                {"spurious_rate", spec.noise.spurious_rate},
                {"label_confusion_rate", spec.noise.label_confusion_rate},
                {"box_jitter_px", spec.noise.box_jitter_px}}},
              {"adl_profiles", pj}};
}

}  // namespace egoadl
