#include "egoadl/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "egoadl/digest.hpp"
#include "egoadl/error.hpp"

namespace egoadl {
namespace {

constexpr std::array<std::string_view, kNumAdl> kAdlNames = {
    "Self-Feeding",
    "Functional Mobility",
    "Grooming & Health Management",
    "Communication Management",
    "Home Management",
    "Meal Preparation and Cleanup",
    "Leisure & Other Activities",
};

constexpr std::array<int, kNumAdl> kReferenceCounts = {257, 207, 172, 428, 407, 625, 165};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_category_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ParseError("category table line " + std::to_string(line) + ": " + msg);
}

}  // namespace

const std::array<std::string_view, kNumAdl>& adl_names() { return kAdlNames; }

AdlLabel adl_label(int id) {
  if (id < 0 || id >= static_cast<int>(kNumAdl)) throw std::out_of_range("ADL id out of range");
  return AdlLabel{id, kAdlNames[static_cast<std::size_t>(id)]};
}

std::optional<AdlLabel> find_adl(std::string_view name) {
  for (std::size_t i = 0; i < kNumAdl; ++i) {
    if (kAdlNames[i] == name) return AdlLabel{static_cast<int>(i), kAdlNames[i]};
  }
  return std::nullopt;
}

int ClassCounts::total() const {
  int sum = 0;
  for (int c : counts) sum += c;
  return sum;
}

int ClassCounts::count(std::string_view adl_name) const {
  auto label = find_adl(adl_name);
  if (!label) throw std::invalid_argument("unknown ADL '" + std::string(adl_name) + "'");
  return counts[static_cast<std::size_t>(label->id)];
}

ClassCounts paper_class_counts() {
  ClassCounts c;
  c.counts = kReferenceCounts;
  return c;
}

std::string normalize_label(std::string_view raw) {
  std::string out(trim(raw));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<std::size_t> CategoryTable::index_of(std::string_view category) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i] == category) return i;
  }
  return std::nullopt;
}

std::size_t CategoryTable::map_label(std::string_view raw) const {
  auto it = lookup_.find(normalize_label(raw));
  return it == lookup_.end() ? fallback_ : it->second;
}

std::string CategoryTable::canonical_text() const {
  std::string out = "egoadl-category-table/1\nfallback=" + categories_[fallback_] + "\n";
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    out += "category=" + categories_[i] + "\n";
    std::vector<std::string> labels = raw_by_category_[i];
    std::sort(labels.begin(), labels.end());
    for (const auto& l : labels) out += "label=" + l + "\n";
  }
  return out;
}

CategoryTable load_category_table(std::string_view text) {
  CategoryTable table;
  std::string fallback_name = "other";
  std::size_t fallback_line = 0;
  std::unordered_map<std::string, std::size_t> label_line;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool in_section = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;

    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (!valid_category_name(name)) {
        fail(line_no, "invalid category name '" + name + "' (use [a-z0-9_])");
      }
      if (table.index_of(name)) fail(line_no, "duplicate category '" + name + "'");
      auto prior = table.lookup_.find(name);
      if (prior != table.lookup_.end()) {
        fail(line_no, "category '" + name + "' was already listed as a raw label of '" +
                          table.categories_[prior->second] + "'");
      }
      table.categories_.push_back(name);
      table.raw_by_category_.emplace_back();
      table.lookup_.emplace(name, table.categories_.size() - 1);
      label_line.emplace(name, line_no);
      in_section = true;
    } else if (!in_section) {
      auto colon = line.find(':');
      if (colon == std::string_view::npos) fail(line_no, "expected 'key: value' directive before first section");
      std::string key(trim(line.substr(0, colon)));
      std::string value(trim(line.substr(colon + 1)));
      if (key == "name") {
        table.name_ = value;
      } else if (key == "fallback") {
        fallback_name = value;
        fallback_line = line_no;
      } else {
        fail(line_no, "unknown directive '" + key + "'");
      }
    } else {
      std::string label = normalize_label(line);
      auto [it, inserted] = table.lookup_.emplace(label, table.categories_.size() - 1);
      if (!inserted) {
        if (it->second == table.categories_.size() - 1) continue;  // repeated within a section
        fail(line_no, "raw label '" + label + "' already mapped to '" + table.categories_[it->second] +
                          "' (line " + std::to_string(label_line[label]) + ")");
      }
      label_line.emplace(label, line_no);
      table.raw_by_category_.back().push_back(label);
    }
    if (end == text.size()) break;
  }

  if (table.categories_.empty()) throw ParseError("category table: no categories declared");
  auto fb = table.index_of(fallback_name);
  if (!fb) {
    throw ParseError("category table line " + std::to_string(fallback_line) + ": fallback category '" +
                     fallback_name + "' is not declared");
  }
  table.fallback_ = *fb;
  table.hash_ = sha256_hex(table.canonical_text());
  return table;
}

const CategoryTable& default_category_table() {
  static const CategoryTable table = load_category_table(default_category_config());
  return table;
}

std::size_t map_label(const CategoryTable& table, std::string_view raw) { return table.map_label(raw); }

}  // namespace egoadl
