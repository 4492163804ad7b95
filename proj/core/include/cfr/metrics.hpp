#ifndef CFR_METRICS_HPP_
#define CFR_METRICS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cfr/boxes.hpp"
#include "cfr/tensor.hpp"

namespace cfr {

/// 2|A^B| / (|A|+|B|); two empty masks score 1.0 so a correctly-empty
/// prediction is rewarded.
double dice_score(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

/// Binarizes logits at probability 0.5 (sigmoid(x) >= 0.5, i.e. x >= 0).
std::vector<uint8_t> binarize_logits(const Tensor& logits);
std::vector<uint8_t> binarize_values(const Tensor& values, double threshold = 0.5);

struct EvalDetection {
  int image_id = 0;
  int class_id = 0;
  Box box;
  double confidence = 0.0;
};

struct EvalGroundTruth {
  int image_id = 0;
  int class_id = 0;
  Box box;
  bool ignore = false;  // excluded by the reasonable filter
};

/// Continuous (all-points interpolated) average precision for one class.
/// Detections are matched greedily by descending confidence; each ground
/// truth is claimed at most once; matches to ignored ground truth are neither
/// true nor false positives.
double average_precision(const std::vector<EvalDetection>& dets,
                         const std::vector<EvalGroundTruth>& gts, double iou_threshold,
                         int class_id);

struct MapResult {
  double map = 0.0;
  std::map<int, double> per_class;
  std::vector<int> skipped_classes;  // classes with no ground truth
};

MapResult mean_average_precision(const std::vector<EvalDetection>& dets,
                                 const std::vector<EvalGroundTruth>& gts,
                                 double iou_threshold, int num_classes);

/// The standard 9 log-spaced FPPI operating points in [1e-2, 1e0].
std::vector<double> lamr_fppi_grid();

struct LamrResult {
  double value = 1.0;
  bool defined = false;  // false when no ground truth survives filtering
};

/// Geometric mean of the miss rate at the FPPI grid, for one class.
LamrResult log_average_miss_rate(const std::vector<EvalDetection>& dets,
                                 const std::vector<EvalGroundTruth>& gts,
                                 double iou_threshold, int n_images, int class_id);

/// Best recall achievable with FPPI <= fppi_point.
double recall_at_fppi(const std::vector<EvalDetection>& dets,
                      const std::vector<EvalGroundTruth>& gts, double iou_threshold,
                      int n_images, double fppi_point, int class_id);

struct TimingStat {
  double median_ms = 0.0;
  double iqr_ms = 0.0;
  int iters = 0;
};

/// Wall-clock profile of a callable: `warmup` unmeasured runs, then `iters`
/// measured ones; reports the median and interquartile range.
TimingStat timing_profile(const std::function<void()>& fn, int warmup, int iters);

/// Binary (P5) PGM, maxval 255.
void write_pgm(const std::string& path, int64_t height, int64_t width,
               const std::vector<uint8_t>& gray);

}  // namespace cfr

#endif  // CFR_METRICS_HPP_
