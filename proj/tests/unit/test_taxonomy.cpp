#include <doctest.h>

#include <numeric>

#include "egoadl/error.hpp"
#include "egoadl/taxonomy.hpp"

using namespace egoadl;

TEST_CASE("default table has 29 categories and routes unknown labels to other") {
  const auto& t = default_category_table();
  CHECK(t.size() == 29);
  for (const char* name : {"kitchen_utensils", "electronics", "wheelchair_walker", "drinkware", "other"}) {
    CHECK_MESSAGE(t.index_of(name).has_value(), name);
  }
  CHECK(t.map_label("spoon") == *t.index_of("kitchen_utensils"));
  CHECK(t.map_label("zzz") == *t.index_of("other"));
  CHECK(t.map_label("drinkware") == *t.index_of("drinkware"));
  CHECK(t.map_label("  Mug ") == *t.index_of("drinkware"));
  CHECK(t.fallback_index() == *t.index_of("other"));
}

TEST_CASE("many-to-one mapping and order of declaration") {
  const auto t = load_category_table("fallback: other\n[drinkware]\nmug\ncup\n[food]\napple\n[other]\n");
  CHECK(t.size() == 3);
  CHECK(t.category(0) == "drinkware");
  CHECK(t.map_label("mug") == 0);
  CHECK(t.map_label("cup") == 0);
  CHECK(t.map_label("apple") == 1);
  CHECK(t.map_label("zzz") == 2);
}

TEST_CASE("content hash depends on mapping, not on label order or comments") {
  const auto a = load_category_table("fallback: other\n[drinkware]\nmug\ncup\n[other]\n");
  const auto b = load_category_table("# note\nfallback: other\n[drinkware]\ncup\nmug\n\n[other]\n");
  const auto c = load_category_table("fallback: other\n[drinkware]\nmug\n[other]\ncup\n");
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
  CHECK(a.content_hash().size() == 64);
}

TEST_CASE("malformed tables are rejected with line context") {
  auto message_of = [](const char* text) -> std::string {
    try {
      load_category_table(text);
    } catch (const ParseError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message_of("fallback: other\n[food]\n[food]\n[other]\n").find("line 3") != std::string::npos);
  CHECK(message_of("fallback: other\n[food]\napple\n[other]\napple\n").find("line 5") != std::string::npos);
  CHECK_FALSE(message_of("fallback: missing\n[food]\n").empty());
  CHECK_FALSE(message_of("").empty());
  CHECK_FALSE(message_of("fallback: other\n[Bad Name]\n[other]\n").empty());
}

TEST_CASE("reference class counts") {
  const auto counts = paper_class_counts();
  CHECK(counts.total() == 2261);
  CHECK(counts.count("Self-Feeding") == 257);
  CHECK(counts.count("Meal Preparation and Cleanup") == 625);
  CHECK(counts.count("Leisure & Other Activities") == 165);
  CHECK(std::accumulate(counts.counts.begin(), counts.counts.end(), 0) == 2261);
}

TEST_CASE("ADL names round-trip through lookup") {
  for (int id = 0; id < static_cast<int>(kNumAdl); ++id) {
    const auto label = adl_label(id);
    const auto found = find_adl(label.name);
    REQUIRE(found.has_value());
    CHECK(found->id == id);
  }
  CHECK_FALSE(find_adl("Juggling").has_value());
}
