#include "egoadl/interaction.hpp"

#include <algorithm>

namespace egoadl {

double iou(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool is_contact_state(const std::string& tag) {
  return !(tag.empty() || tag == "none" || tag == "no_contact");
}

std::vector<ActivityMark> mark_active(const FrameObservation& frame, const MatchOptions& options) {
  std::vector<ActivityMark> marks;
  marks.reserve(frame.objects.size());
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    double best = 0.0;
    for (const auto& hoi : frame.hoi_objects) {
      if (options.require_contact && !is_contact_state(hoi.contact_state)) continue;
      best = std::max(best, iou(frame.objects[i].box, hoi.box));
    }
    marks.push_back({i, best > options.threshold, best});
  }
  return marks;
}

}  // namespace egoadl
