#ifndef CFR_MATCHING_HPP_
#define CFR_MATCHING_HPP_

#include <array>
#include <vector>

#include "cfr/anchors.hpp"
#include "cfr/boxes.hpp"

namespace cfr {

/// Per-anchor assignment. label: -1 ignored, 0 background, c >= 1 positive of
/// object class c-1. deltas are valid only for positive anchors.
struct MatchResult {
  std::vector<int> labels;
  std::vector<std::array<double, 4>> deltas;
  std::vector<int> matched_gt;  // gt index for positives, else -1
  int num_positive = 0;
};

/// SSD-style assignment: IoU >= iou_pos is positive, IoU < iou_neg is
/// background, in between is ignored. Afterwards each ground-truth box claims
/// its best-IoU anchor (ties to the lower anchor index) regardless of
/// threshold. No ground truth yields all-background, which is valid.
MatchResult match_anchors(const std::vector<AnchorBox>& anchors,
                          const std::vector<BoxAnn>& gt, double iou_pos,
                          double iou_neg);

}  // namespace cfr

#endif  // CFR_MATCHING_HPP_
