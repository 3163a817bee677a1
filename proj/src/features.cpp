#include "egoadl/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "egoadl/digest.hpp"
#include "egoadl/error.hpp"

namespace egoadl {

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::counts: return "counts";
    case Representation::binary: return "binary";
    case Representation::both: return "both";
  }
  return "binary";
}

std::optional<Representation> parse_representation(std::string_view text) {
  if (text == "counts") return Representation::counts;
  if (text == "binary") return Representation::binary;
  if (text == "both") return Representation::both;
  return std::nullopt;
}

std::size_t FeatureConfig::dimension(std::size_t num_categories) const {
  std::size_t d = num_categories * (use_active ? 2 : 1);
  return representation == Representation::both ? 2 * d : d;
}

std::string FeatureConfig::id() const {
  return std::string(to_string(representation)) + (use_active ? "+active" : "");
}

std::string FeatureConfig::hash() const {
  return sha256_hex("egoadl-feature-config/1\nrepresentation=" + std::string(to_string(representation)) +
                    "\nactive=" + (use_active ? "1" : "0") + "\ntaxonomy=" + taxonomy_hash + "\n");
}

std::array<FeatureConfig, 6> ablation_configs(const std::string& taxonomy_hash) {
  return {{
      {Representation::counts, false, taxonomy_hash},
      {Representation::counts, true, taxonomy_hash},
      {Representation::binary, false, taxonomy_hash},
      {Representation::binary, true, taxonomy_hash},
      {Representation::both, false, taxonomy_hash},
      {Representation::both, true, taxonomy_hash},
  }};
}

std::vector<std::string> feature_names(const CategoryTable& table, const FeatureConfig& config) {
  std::vector<std::string> names;
  auto block = [&](std::string_view rep) {
    for (const auto& c : table.categories()) names.push_back(std::string(rep) + "." + c);
    if (config.use_active) {
      for (const auto& c : table.categories()) names.push_back(std::string(rep) + ".active_" + c);
    }
  };
  if (config.representation == Representation::both) {
    block("counts");
    block("binary");
  } else {
    block(to_string(config.representation));
  }
  return names;
}

namespace {

template <bool Presence>
std::vector<std::int64_t> accumulate(const Segment& segment, const CategoryTable& table, bool use_active,
                                     const MatchOptions& match) {
  const std::size_t c = table.size();
  std::vector<std::int64_t> out(use_active ? 2 * c : c, 0);
  std::vector<char> seen(out.size());
  for (const auto& frame : segment.frames) {
    std::vector<ActivityMark> marks;
    if (use_active) marks = mark_active(frame, match);
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
      const std::size_t cat = table.map_label(frame.objects[i].raw_label);
      if constexpr (Presence) {
        seen[cat] = 1;
        if (use_active && marks[i].active) seen[c + cat] = 1;
      } else {
        ++out[cat];
        if (use_active && marks[i].active) ++out[c + cat];
      }
    }
    if constexpr (Presence) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += seen[k];
    }
  }
  return out;
}

void append_scaled(std::vector<double>& dst, const std::vector<std::int64_t>& raw) {
  std::vector<double> row(raw.begin(), raw.end());
  auto scaled = minmax_scale_row(row);
  dst.insert(dst.end(), scaled.begin(), scaled.end());
}

}  // namespace

std::vector<std::int64_t> raw_counts(const Segment& segment, const CategoryTable& table, bool use_active,
                                     const MatchOptions& match) {
  return accumulate<false>(segment, table, use_active, match);
}

std::vector<std::int64_t> raw_binary(const Segment& segment, const CategoryTable& table, bool use_active,
                                     const MatchOptions& match) {
  return accumulate<true>(segment, table, use_active, match);
}

std::vector<double> minmax_scale_row(std::span<const double> raw) {
  if (raw.empty()) throw std::invalid_argument("minmax_scale_row: empty row");
  for (double v : raw) {
    if (!std::isfinite(v)) throw std::invalid_argument("minmax_scale_row: non-finite value");
  }
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<double> out(raw.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / range;
  }
  return out;
}

FeatureVector featurize(const Segment& segment, const CategoryTable& table, const FeatureConfig& config,
                        const MatchOptions& match) {
  if (config.taxonomy_hash != table.content_hash()) {
    throw ValidationError("feature config taxonomy hash " + config.taxonomy_hash.substr(0, 12) +
                          " does not match category table " + table.content_hash().substr(0, 12));
  }
  FeatureVector fv{config, segment.key, {}};
  fv.values.reserve(config.dimension(table.size()));
  if (config.representation != Representation::binary) {
    append_scaled(fv.values, raw_counts(segment, table, config.use_active, match));
  }
  if (config.representation != Representation::counts) {
    append_scaled(fv.values, raw_binary(segment, table, config.use_active, match));
  }
  return fv;
}

}  // namespace egoadl
