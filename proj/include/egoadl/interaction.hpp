#pragma once

#include <cstddef>
#include <vector>

#include "egoadl/records.hpp"

namespace egoadl {

inline constexpr double kActiveIouThreshold = 0.8;

/// Intersection over union of two valid boxes; symmetric, 0 when disjoint.
double iou(const Box2D& a, const Box2D& b);

struct ActivityMark {
  std::size_t object_index = 0;
  bool active = false;
  double best_iou = 0.0;
};

struct MatchOptions {
  /// An object is active when its best IoU is strictly greater than this.
  double threshold = kActiveIouThreshold;
  /// When set, only HOI boxes whose contact_state is a contact tag (anything
  /// other than "", "none", "no_contact") are matched.
  bool require_contact = false;
};

bool is_contact_state(const std::string& tag);

/// One mark per object, in object order. Each object takes the max IoU over
/// all HOI boxes; HOI boxes are not matched exclusively.
std::vector<ActivityMark> mark_active(const FrameObservation& frame, const MatchOptions& options = {});

}  // namespace egoadl
