#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egoadl/interaction.hpp"
#include "egoadl/records.hpp"
#include "egoadl/taxonomy.hpp"

namespace egoadl {

enum class Representation { counts, binary, both };

std::string_view to_string(Representation r);
std::optional<Representation> parse_representation(std::string_view text);

struct FeatureConfig {
  Representation representation = Representation::binary;
  bool use_active = true;
  std::string taxonomy_hash;

  /// |C| * (1 + use_active), doubled for `both`.
  std::size_t dimension(std::size_t num_categories) const;
  /// Short identifier such as "binary+active" or "counts".
  std::string id() const;
  /// Digest over representation, active flag and taxonomy hash.
  std::string hash() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// The six ablation configurations in reporting order:
/// counts, counts+active, binary, binary+active, both, both+active.
std::array<FeatureConfig, 6> ablation_configs(const std::string& taxonomy_hash);

/// Column names in feature order, e.g. "binary.drinkware", "binary.active_drinkware".
std::vector<std::string> feature_names(const CategoryTable& table, const FeatureConfig& config);

struct FeatureVector {
  FeatureConfig config;
  SegmentKey key;
  std::vector<double> values;
};

/// Per-category detection totals over the segment. With use_active the result
/// has a second block of |C| entries counting only active detections; the
/// first block always counts every detection.
std::vector<std::int64_t> raw_counts(const Segment& segment, const CategoryTable& table, bool use_active,
                                     const MatchOptions& match = {});

/// Per-category number of frames in which the category appears; the active
/// block counts frames with at least one active detection of the category.
std::vector<std::int64_t> raw_binary(const Segment& segment, const CategoryTable& table, bool use_active,
                                     const MatchOptions& match = {});

/// (x - min) / (max - min) over the row; a constant row maps to zeros.
/// Throws std::invalid_argument on an empty row or non-finite input.
std::vector<double> minmax_scale_row(std::span<const double> raw);

/// Composes the raw vectors for `config` and scales them. Single
/// representations are scaled jointly across passive and active blocks;
/// `both` scales the counts and binary parts independently, then
/// concatenates them (counts first). Throws ValidationError when the config
/// was built for another category table.
FeatureVector featurize(const Segment& segment, const CategoryTable& table, const FeatureConfig& config,
                        const MatchOptions& match = {});

}  // namespace egoadl
