#ifndef CFR_ABLATE_HPP_
#define CFR_ABLATE_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "cfr/config.hpp"
#include "cfr/evaluator.hpp"
#include "cfr/sample.hpp"

namespace cfr {

struct AblationCell {
  int loops = 0;     // 0 denotes the average-fusion baseline
  int seed_idx = 0;
  bool ok = false;
  std::string error;
  double map = 0.0;
  double lamr = 1.0;
  bool lamr_defined = false;
  std::vector<double> dice;  // length == loops for cyclic cells
};

struct AblationTable {
  struct Row {
    int loops = 0;
    int n_ok = 0;
    double mean_map = 0.0;
    double mean_lamr = 1.0;
    bool lamr_defined = false;
    std::vector<double> mean_dice;
  };
  std::vector<AblationCell> cells;
  std::vector<Row> rows;  // one per loop count, means over seeds
  std::vector<std::pair<int, TimingStat>> timing;
};

/// Worker count for sweep cells: CFR_THREADS when set, else the hardware
/// concurrency, capped at the cell count.
int sweep_worker_count(int n_cells);

/// Trains and evaluates one cell per (loop count, seed index) over a shared
/// dataset; loop count 0 runs the average-fusion baseline. Cells execute on
/// independent workers with no shared mutable state; a failed cell is
/// recorded as absent and the sweep continues. Writes ablation.csv and
/// ablation.txt plus per-cell artifacts under out_dir when it is non-empty.
AblationTable run_ablation(const RunConfig& cfg,
                           const std::vector<SpectralSample>& train_samples,
                           const std::vector<SpectralSample>& test_samples,
                           const std::string& out_dir, std::ostream& log);

std::string format_ablation(const AblationTable& table);

}  // namespace cfr

#endif  // CFR_ABLATE_HPP_
