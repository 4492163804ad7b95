#ifndef CFR_EVALUATOR_HPP_
#define CFR_EVALUATOR_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "cfr/config.hpp"
#include "cfr/metrics.hpp"
#include "cfr/model.hpp"
#include "cfr/sample.hpp"

namespace cfr {

struct EvalReport {
  MapResult map;
  LamrResult lamr;
  std::vector<double> dice_per_loop;  // mean test-set DICE between spectra
  std::vector<std::pair<int, TimingStat>> timing;  // per loop count
  int n_images = 0;
  int n_gt = 0;
  std::string config_resolved;
};

/// Runs detection and mask prediction over a test split and computes the
/// report. When out_dir is non-empty, writes report.txt, report.csv,
/// detections.csv, and (optionally) PGM mask dumps there. Metrics are
/// deterministic; the timing section is wall-clock and excluded from
/// reproducibility comparisons.
EvalReport evaluate_model(const RunConfig& cfg, DetectorModelT<float>& model,
                          const std::vector<SpectralSample>& test_samples,
                          const std::string& out_dir, std::ostream* log);

/// Median forward wall time per cyclic loop count at a fixed input shape.
std::vector<std::pair<int, TimingStat>> time_loop_counts(
    DetectorModelT<float>& model, const SpectralSample& sample,
    const std::vector<int>& loop_counts, int warmup, int iters);

/// Serializes a report (without artifacts) to the report.txt format.
std::string format_report(const EvalReport& report);

}  // namespace cfr

#endif  // CFR_EVALUATOR_HPP_
