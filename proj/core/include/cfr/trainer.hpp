#ifndef CFR_TRAINER_HPP_
#define CFR_TRAINER_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "cfr/config.hpp"
#include "cfr/model.hpp"
#include "cfr/sample.hpp"

namespace cfr {

struct EpochLog {
  int epoch = 0;
  double joint = 0.0, cls = 0.0, loc = 0.0, seg = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::string checkpoint_path;
};

/// Builds a model from the config with a deterministic seed.
DetectorModelT<float> build_model(const RunConfig& cfg);

/// Deterministic single-threaded training loop; logs one line per epoch and
/// writes the final checkpoint (plus periodic ones) under cfg.out_dir when
/// write_artifacts is set. A non-finite loss aborts with a diagnostic naming
/// the offending batch and op.
TrainResult train_model(const RunConfig& cfg, DetectorModelT<float>& model,
                        const std::vector<SpectralSample>& train_samples,
                        std::ostream& log, bool write_artifacts = true);

}  // namespace cfr

#endif  // CFR_TRAINER_HPP_
