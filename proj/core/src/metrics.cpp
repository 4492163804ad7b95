#include "cfr/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "cfr/errors.hpp"

namespace cfr {

double dice_score(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  CFR_CHECK(a.size() == b.size(), "dice_score: mask size mismatch");
  int64_t inter = 0, sa = 0, sb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool xa = a[i] != 0, xb = b[i] != 0;
    inter += xa && xb;
    sa += xa;
    sb += xb;
  }
  if (sa + sb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(sa + sb);
}

std::vector<uint8_t> binarize_logits(const Tensor& logits) {
  std::vector<uint8_t> out(logits.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = logits.ptr()[i] >= 0.0f ? 1 : 0;
  return out;
}

std::vector<uint8_t> binarize_values(const Tensor& values, double threshold) {
  std::vector<uint8_t> out(values.data().size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(values.ptr()[i]) >= threshold ? 1 : 0;
  return out;
}

namespace {

// per-detection outcome after greedy matching, confidence-descending:
// 1 true positive, 0 false positive, -1 matched an ignored gt
struct MatchedRun {
  std::vector<std::pair<double, int>> outcomes;
  int64_t n_gt = 0;  // non-ignored ground truth of the class
};

MatchedRun match_for_eval(const std::vector<EvalDetection>& dets,
                          const std::vector<EvalGroundTruth>& gts, double iou_threshold,
                          int class_id) {
  MatchedRun run;
  std::vector<int> gt_idx;
  for (size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].class_id != class_id) continue;
    gt_idx.push_back(static_cast<int>(g));
    if (!gts[g].ignore) ++run.n_gt;
  }
  std::vector<int> order;
  for (size_t d = 0; d < dets.size(); ++d)
    if (dets[d].class_id == class_id) order.push_back(static_cast<int>(d));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].confidence > dets[b].confidence;
  });
  std::vector<uint8_t> claimed(gts.size(), 0);
  for (int d : order) {
    const EvalDetection& det = dets[d];
    double best_iou = 0.0;
    int best_g = -1;
    double best_ignore_iou = 0.0;
    int best_ignore = -1;
    for (int g : gt_idx) {
      if (gts[g].image_id != det.image_id) continue;
      const double v = iou(det.box, gts[g].box);
      if (v < iou_threshold) continue;
      if (!gts[g].ignore && !claimed[g]) {
        if (v > best_iou) {
          best_iou = v;
          best_g = g;
        }
      } else if (gts[g].ignore && v > best_ignore_iou) {
        best_ignore_iou = v;
        best_ignore = g;
      }
    }
    int outcome;
    if (best_g >= 0) {
      claimed[best_g] = 1;
      outcome = 1;
    } else if (best_ignore >= 0) {
      outcome = -1;
    } else {
      outcome = 0;
    }
    run.outcomes.emplace_back(det.confidence, outcome);
  }
  return run;
}

}  // namespace

double average_precision(const std::vector<EvalDetection>& dets,
                         const std::vector<EvalGroundTruth>& gts, double iou_threshold,
                         int class_id) {
  const MatchedRun run = match_for_eval(dets, gts, iou_threshold, class_id);
  if (run.n_gt == 0) return 0.0;
  std::vector<std::pair<double, double>> points;  // (recall, precision)
  int64_t tp = 0, fp = 0;
  for (const auto& [conf, outcome] : run.outcomes) {
    if (outcome < 0) continue;
    outcome == 1 ? ++tp : ++fp;
    points.emplace_back(static_cast<double>(tp) / run.n_gt,
                        static_cast<double>(tp) / (tp + fp));
  }
  double area = 0.0, prev_recall = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    const double r = points[i].first;
    if (r <= prev_recall) continue;
    double p_env = 0.0;  // precision envelope over recall >= r
    for (size_t j = i; j < points.size(); ++j) p_env = std::max(p_env, points[j].second);
    area += (r - prev_recall) * p_env;
    prev_recall = r;
  }
  return area;
}

MapResult mean_average_precision(const std::vector<EvalDetection>& dets,
                                 const std::vector<EvalGroundTruth>& gts,
                                 double iou_threshold, int num_classes) {
  MapResult result;
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < num_classes; ++c) {
    bool has_gt = false;
    for (const auto& g : gts)
      if (g.class_id == c && !g.ignore) has_gt = true;
    if (!has_gt) {
      result.skipped_classes.push_back(c);
      continue;
    }
    const double ap = average_precision(dets, gts, iou_threshold, c);
    result.per_class[c] = ap;
    sum += ap;
    ++counted;
  }
  result.map = counted > 0 ? sum / counted : 0.0;
  return result;
}

std::vector<double> lamr_fppi_grid() {
  std::vector<double> grid(9);
  for (int k = 0; k < 9; ++k) grid[k] = std::pow(10.0, -2.0 + k / 4.0);
  return grid;
}

LamrResult log_average_miss_rate(const std::vector<EvalDetection>& dets,
                                 const std::vector<EvalGroundTruth>& gts,
                                 double iou_threshold, int n_images, int class_id) {
  CFR_CHECK(n_images > 0, "log_average_miss_rate: n_images must be positive");
  const MatchedRun run = match_for_eval(dets, gts, iou_threshold, class_id);
  LamrResult result;
  if (run.n_gt == 0) return result;  // undefined
  result.defined = true;
  // prefix curve of (fppi, miss rate); the empty prefix is (0, 1)
  std::vector<std::pair<double, double>> curve{{0.0, 1.0}};
  int64_t tp = 0, fp = 0;
  for (const auto& [conf, outcome] : run.outcomes) {
    if (outcome < 0) continue;
    outcome == 1 ? ++tp : ++fp;
    curve.emplace_back(static_cast<double>(fp) / n_images,
                       1.0 - static_cast<double>(tp) / run.n_gt);
  }
  double log_sum = 0.0;
  for (double g : lamr_fppi_grid()) {
    double mr = 1.0;
    for (const auto& [fppi, miss] : curve)
      if (fppi <= g) mr = std::min(mr, miss);
    if (mr <= 0.0) {
      result.value = 0.0;
      return result;
    }
    log_sum += std::log(mr);
  }
  result.value = std::exp(log_sum / 9.0);
  return result;
}

double recall_at_fppi(const std::vector<EvalDetection>& dets,
                      const std::vector<EvalGroundTruth>& gts, double iou_threshold,
                      int n_images, double fppi_point, int class_id) {
  CFR_CHECK(n_images > 0, "recall_at_fppi: n_images must be positive");
  const MatchedRun run = match_for_eval(dets, gts, iou_threshold, class_id);
  if (run.n_gt == 0) return 0.0;
  double best = 0.0;
  int64_t tp = 0, fp = 0;
  for (const auto& [conf, outcome] : run.outcomes) {
    if (outcome < 0) continue;
    outcome == 1 ? ++tp : ++fp;
    if (static_cast<double>(fp) / n_images <= fppi_point)
      best = std::max(best, static_cast<double>(tp) / run.n_gt);
  }
  return best;
}

TimingStat timing_profile(const std::function<void()>& fn, int warmup, int iters) {
  CFR_CHECK(warmup >= 5 && iters >= 50,
            "timing_profile: need >=5 warmup and >=50 measured iterations");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ms(iters);
  for (int i = 0; i < iters; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  std::sort(ms.begin(), ms.end());
  TimingStat stat;
  stat.iters = iters;
  stat.median_ms = ms[iters / 2];
  stat.iqr_ms = ms[(3 * iters) / 4] - ms[iters / 4];
  return stat;
}

void write_pgm(const std::string& path, int64_t height, int64_t width,
               const std::vector<uint8_t>& gray) {
  CFR_CHECK(static_cast<int64_t>(gray.size()) == height * width, "write_pgm: size mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  os << "P5\n" << width << " " << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(gray.data()),
           static_cast<std::streamsize>(gray.size()));
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace cfr
