#ifndef CFR_CONFIG_HPP_
#define CFR_CONFIG_HPP_

#include <string>
#include <vector>

#include "cfr/anchors.hpp"
#include "cfr/model.hpp"
#include "cfr/synthetic.hpp"

namespace cfr {

/// Flat, fully serializable run configuration. A run is reproducible from a
/// RunConfig plus the code version; every emitted report embeds the resolved
/// form. Unknown keys in a config file are hard errors.
struct RunConfig {
  // dataset
  int image_size = 96;
  int n_train = 400;
  int n_test = 100;
  int object_count_min = 1;
  int object_count_max = 4;
  double object_size_min = 16.0;
  double object_size_max = 48.0;
  double p_both = 0.5;
  double p_visible_only = 0.25;
  double p_thermal_only = 0.25;
  int clutter = 4;
  double noise_sigma = 0.02;
  std::string time_of_day = "day";
  double night_contrast = 0.25;
  // model
  std::string preset = "pedestrian";
  std::string fusion = "cfr";
  int loops = 3;
  int channels = 32;
  int trunk_channels = 64;
  std::vector<int> stem_channels = {16, 32};
  double anchor_scale_base = 8.0;
  double bn_momentum = 0.1;
  bool bn_shared_stats = true;
  // training
  double lr = 0.05;
  double momentum = 0.9;
  int epochs = 20;
  int batch_size = 8;
  double seg_weight = 1.0;
  int checkpoint_every = 0;  // 0: final checkpoint only
  bool augment = true;
  // matching / evaluation
  double iou_pos = 0.5;
  double iou_neg = 0.4;
  double nms_iou = 0.45;
  double conf_threshold = 0.05;
  double ap_iou = 0.5;
  double reasonable_min_height = 0.0;  // 0: derived as image_size * 55 / 512
  // ablation sweep
  std::vector<int> loop_counts = {0, 1, 2, 3, 4};
  int n_seeds = 5;
  // io
  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string checkpoint;
  int dump_masks = 0;
  bool timing = false;
  int timing_warmup = 5;
  int timing_iters = 50;
  uint64_t seed = 1;

  /// Parses `key = value` lines ('#' comments); later lines win.
  static RunConfig from_file(const std::string& path);
  void apply_line(const std::string& key, const std::string& value);
  void validate() const;

  /// Resolved flat form, one "key = value" line per key, declaration order.
  std::string resolved() const;

  SceneSpec scene_spec() const;
  ModelConfig model_config() const;
  double resolved_min_height() const {
    return reasonable_min_height > 0.0 ? reasonable_min_height
                                       : image_size * 55.0 / 512.0;
  }
};

}  // namespace cfr

#endif  // CFR_CONFIG_HPP_
