#ifndef CFR_BOXES_HPP_
#define CFR_BOXES_HPP_

#include <cstdint>
#include <vector>

namespace cfr {

/// Axis-aligned box in input-pixel coordinates, corners (x1,y1) < (x2,y2).
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double w() const { return x2 - x1; }
  double h() const { return y2 - y1; }
  double area() const { return w() > 0 && h() > 0 ? w() * h() : 0.0; }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
};

/// Ground-truth box with its object class (0-based, background excluded).
struct BoxAnn {
  Box box;
  int class_id = 0;
};

/// One decoded detector output.
struct Detection {
  Box box;
  int class_id = 0;        // 0-based object class
  double confidence = 0.0;  // in [0, 1]
  int64_t anchor_index = -1;
};

double iou(const Box& a, const Box& b);

/// Greedy per-class non-maximum suppression. Candidates are ordered by
/// confidence descending with ties broken by lower anchor index; a candidate
/// is kept when its IoU with every kept box of the same class is < iou_threshold.
std::vector<Detection> nms(std::vector<Detection> candidates, double iou_threshold);

}  // namespace cfr

#endif  // CFR_BOXES_HPP_
