#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace egoadl {

inline constexpr std::size_t kNumAdl = 7;

/// Canonical ADL label; `id` is the dense, stable index 0..6.
struct AdlLabel {
  int id = 0;
  std::string_view name;

  friend bool operator==(const AdlLabel& a, const AdlLabel& b) { return a.id == b.id; }
};

const std::array<std::string_view, kNumAdl>& adl_names();
AdlLabel adl_label(int id);
std::optional<AdlLabel> find_adl(std::string_view name);

struct ClassCounts {
  std::array<int, kNumAdl> counts{};

  int total() const;
  int count(std::string_view adl_name) const;
};

/// Per-class instance counts of the reference corpus, in canonical ADL order.
ClassCounts paper_class_counts();

/// Ordered set of functional object categories plus the raw detector label
/// mapping. Immutable once loaded.
class CategoryTable {
 public:
  std::size_t size() const { return categories_.size(); }
  const std::vector<std::string>& categories() const { return categories_; }
  const std::string& category(std::size_t index) const { return categories_.at(index); }
  std::optional<std::size_t> index_of(std::string_view category) const;

  std::size_t fallback_index() const { return fallback_; }
  const std::string& name() const { return name_; }
  const std::string& content_hash() const { return hash_; }

  /// Raw labels mapped to a category, in document order (excludes the
  /// category's own name, which always maps to itself).
  const std::vector<std::string>& raw_labels(std::size_t index) const { return raw_by_category_.at(index); }

  /// Total: unknown labels go to the fallback category.
  std::size_t map_label(std::string_view raw) const;

  /// Canonical form the content hash is computed over.
  std::string canonical_text() const;

  friend CategoryTable load_category_table(std::string_view config_text);

 private:
  std::string name_;
  std::vector<std::string> categories_;
  std::vector<std::vector<std::string>> raw_by_category_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::size_t fallback_ = 0;
  std::string hash_;
};

/// Parses a category-table document:
///
///     # comment
///     name: my-table
///     fallback: other
///     [drinkware]
///     mug
///     cup
///     [other]
///
/// Directives come before the first section. Each `[category]` section
/// lists raw detector labels, one per line. Category order is the order of
/// appearance. Labels are matched case-insensitively after trimming.
/// Throws ParseError with a line number on malformed input.
CategoryTable load_category_table(std::string_view config_text);

/// The shipped 29-category table (reconstructed; see data/default_taxonomy.cfg).
std::string_view default_category_config();
const CategoryTable& default_category_table();

std::size_t map_label(const CategoryTable& table, std::string_view raw);

/// ASCII lowercase + whitespace trim, the normalization used for lookups.
std::string normalize_label(std::string_view raw);

}  // namespace egoadl
