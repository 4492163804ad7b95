#include "cfr/boxes.hpp"

#include <algorithm>

namespace cfr {

double iou(const Box& a, const Box& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::vector<Detection> nms(std::vector<Detection> candidates, double iou_threshold) {
  std::sort(candidates.begin(), candidates.end(), [](const Detection& a, const Detection& b) {
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.anchor_index < b.anchor_index;
  });
  std::vector<Detection> kept;
  for (const Detection& cand : candidates) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.class_id != cand.class_id) continue;
      if (iou(k.box, cand.box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

}  // namespace cfr
