#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "egoadl/records.hpp"
#include "egoadl/taxonomy.hpp"

namespace egoadl {

inline constexpr double kCanvasWidth = 1280.0;
inline constexpr double kCanvasHeight = 720.0;

struct CategoryRate {
  std::string category;
  double probability = 0.0;  // per-frame appearance probability
};

struct AdlProfile {
  int adl = 0;
  std::vector<CategoryRate> core;     // the activity's own objects, may be active
  std::vector<CategoryRate> context;  // scene objects, always passive
  double active_probability = 0.9;    // per core instance
};

struct NoiseModel {
  double drop_rate = 0.0;
  double spurious_rate = 0.0;  // probability of one spurious detection per frame
  double label_confusion_rate = 0.0;
  double box_jitter_px = 0.0;

  bool is_zero() const {
    return drop_rate == 0.0 && spurious_rate == 0.0 && label_confusion_rate == 0.0 && box_jitter_px == 0.0;
  }
};

struct GenSpec {
  std::uint64_t seed = 42;
  int participants = 16;
  int segments_per_participant = 50;
  /// Relative ADL frequencies; defaults to the reference class counts.
  std::array<double, kNumAdl> adl_mix{257, 207, 172, 428, 407, 625, 165};
  int frames_per_segment = 13;
  int segments_per_video = 10;
  int max_instances = 2;
  std::vector<AdlProfile> adl_profiles;  // one per ADL; empty => default_profiles()
  /// Per-participant category-bias strength in [0, 1]; one entry applies to all.
  std::vector<double> participant_effect{0.3};
  /// Cores of this many other ADLs appear passively in each segment...
  int distractor_adls = 0;
  /// ...with this per-frame probability per category.
  double distractor_probability = 0.0;
  NoiseModel noise;
};

/// Clean profiles over the default category table: pairwise-disjoint core
/// sets, active probability 0.9, shared passive context categories.
std::vector<AdlProfile> default_profiles();

/// Throws ValidationError naming the offending field.
void validate(const GenSpec& spec, const CategoryTable& table);

GenSpec gen_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GenSpec& spec);

struct SyntheticCorpus {
  FrameGroups records;       // after the noise model
  FrameGroups ground_truth;  // noise-free oracle stream, same segments
  LabelManifest manifest;
};

/// Deterministic in (spec, table). Each segment draws from its own stream,
/// so output does not depend on generation order.
SyntheticCorpus generate(const GenSpec& spec, const CategoryTable& table);

/// Detection-noise model, applied independently per detection: drop, label
/// confusion (uniform over other categories), corner jitter with box
/// invariants restored, then at most one spurious detection per frame.
/// All rates zero returns the input unchanged.
FrameGroups perturb(const FrameGroups& records, const NoiseModel& noise, const CategoryTable& table,
                    std::uint64_t seed);

}  // namespace egoadl
