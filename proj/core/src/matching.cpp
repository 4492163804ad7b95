#include "cfr/matching.hpp"

#include "cfr/errors.hpp"

namespace cfr {

MatchResult match_anchors(const std::vector<AnchorBox>& anchors,
                          const std::vector<BoxAnn>& gt, double iou_pos,
                          double iou_neg) {
  CFR_CHECK(iou_pos >= iou_neg, "match_anchors: pos threshold must be >= neg threshold");
  const size_t n = anchors.size();
  MatchResult r;
  r.labels.assign(n, 0);
  r.deltas.assign(n, {0, 0, 0, 0});
  r.matched_gt.assign(n, -1);
  if (gt.empty()) return r;

  for (size_t a = 0; a < n; ++a) {
    const Box abox = anchors[a].to_box();
    double best = 0.0;
    int best_g = -1;
    for (size_t g = 0; g < gt.size(); ++g) {
      const double v = iou(abox, gt[g].box);
      if (v > best) {
        best = v;
        best_g = static_cast<int>(g);
      }
    }
    if (best >= iou_pos && best_g >= 0) {
      r.labels[a] = gt[best_g].class_id + 1;
      r.matched_gt[a] = best_g;
      r.deltas[a] = encode_box(gt[best_g].box, anchors[a]);
    } else if (best >= iou_neg) {
      r.labels[a] = -1;
    }
  }

  // every gt claims its best anchor, threshold or not
  for (size_t g = 0; g < gt.size(); ++g) {
    double best = -1.0;
    int64_t best_a = -1;
    for (size_t a = 0; a < n; ++a) {
      const double v = iou(anchors[a].to_box(), gt[g].box);
      if (v > best) {
        best = v;
        best_a = static_cast<int64_t>(a);
      }
    }
    if (best_a >= 0 && best > 0.0) {
      r.labels[best_a] = gt[g].class_id + 1;
      r.matched_gt[best_a] = static_cast<int>(g);
      r.deltas[best_a] = encode_box(gt[g].box, anchors[best_a]);
    }
  }

  for (int lbl : r.labels)
    if (lbl >= 1) ++r.num_positive;
  return r;
}

}  // namespace cfr
