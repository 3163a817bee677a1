#include <doctest.h>

#include "egoadl/interaction.hpp"
#include "egoadl/random.hpp"
#include "oracles.hpp"

using namespace egoadl;

namespace {

Box2D random_int_box(CounterRng& rng, int canvas) {
  const double x1 = static_cast<double>(rng.below(canvas - 1));
  const double y1 = static_cast<double>(rng.below(canvas - 1));
  const double x2 = x1 + 1 + static_cast<double>(rng.below(canvas - static_cast<std::uint64_t>(x1) - 1));
  const double y2 = y1 + 1 + static_cast<double>(rng.below(canvas - static_cast<std::uint64_t>(y1) - 1));
  return Box2D::make(x1, y1, x2, y2);
}

FrameObservation frame_with(std::vector<Box2D> objects, std::vector<std::pair<Box2D, std::string>> hois) {
  FrameObservation f;
  for (const auto& b : objects) f.objects.push_back({"mug", 0.9, b});
  for (const auto& [b, state] : hois) f.hoi_objects.push_back({b, HandSide::right, state, 0.9});
  return f;
}

}  // namespace

TEST_CASE("iou basics") {
  const Box2D a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box2D{20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, Box2D{10, 0, 20, 10}) == 0.0);  // shared edge only
  CHECK(iou(a, Box2D{5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0));
}

TEST_CASE("iou agrees with the pixel-count oracle and is symmetric") {
  CounterRng rng(11, 0);
  for (int i = 0; i < 300; ++i) {
    const Box2D a = random_int_box(rng, 64), b = random_int_box(rng, 64);
    CHECK(std::abs(iou(a, b) - oracle::raster_iou(a, b, 64)) < 1e-9);
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, b) >= 0.0);
    CHECK(iou(a, b) <= 1.0);
  }
}

TEST_CASE("active marking uses a strict threshold") {
  const Box2D obj{0, 0, 10, 10};
  const Box2D exact{0, 0, 8, 10};  // IoU 80/100
  REQUIRE(iou(obj, exact) == 0.8);
  auto marks = mark_active(frame_with({obj}, {{exact, "portable"}}));
  REQUIRE(marks.size() == 1);
  CHECK_FALSE(marks[0].active);
  CHECK(marks[0].best_iou == 0.8);

  marks = mark_active(frame_with({obj}, {{Box2D{0, 0, 9, 10}, "portable"}}));
  CHECK(marks[0].active);
}

TEST_CASE("each object takes its best HOI box; HOI boxes are shared") {
  const Box2D obj{0, 0, 10, 10};
  const auto marks = mark_active(
      frame_with({obj, obj, Box2D{50, 50, 60, 60}}, {{Box2D{40, 40, 45, 45}, "portable"}, {obj, "portable"}}));
  REQUIRE(marks.size() == 3);
  CHECK(marks[0].active);
  CHECK(marks[1].active);
  CHECK_FALSE(marks[2].active);
  CHECK(marks[0].best_iou == 1.0);
}

TEST_CASE("frames without HOI boxes mark nothing active") {
  const auto marks = mark_active(frame_with({Box2D{0, 0, 10, 10}}, {}));
  REQUIRE(marks.size() == 1);
  CHECK_FALSE(marks[0].active);
  CHECK(marks[0].best_iou == 0.0);
}

TEST_CASE("contact filter") {
  const Box2D obj{0, 0, 10, 10};
  MatchOptions strict;
  strict.require_contact = true;
  CHECK_FALSE(mark_active(frame_with({obj}, {{obj, "none"}}), strict)[0].active);
  CHECK(mark_active(frame_with({obj}, {{obj, "none"}}))[0].active);
  CHECK(mark_active(frame_with({obj}, {{obj, "portable"}}), strict)[0].active);
  CHECK_FALSE(is_contact_state("no_contact"));
  CHECK_FALSE(is_contact_state(""));
}
