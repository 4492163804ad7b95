#ifndef CFR_ANCHORS_HPP_
#define CFR_ANCHORS_HPP_

#include <array>
#include <string>
#include <vector>

#include "cfr/boxes.hpp"

namespace cfr {

/// Prior box tiled over a detection layer; w = scale*sqrt(ratio),
/// h = scale/sqrt(ratio), so w*h = scale^2 and w/h = ratio.
struct AnchorBox {
  double cx = 0, cy = 0, w = 0, h = 0;
  int layer = 0;
  double scale = 0;
  double ratio = 1.0;

  Box to_box() const { return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}; }
};

struct AnchorLayerSpec {
  int stride = 8;
  std::vector<double> scales;  // sorted ascending
};

/// Detection-grid geometry: per layer its cell grid and anchor block offsets.
/// Global anchor order is layer-major, cells row-major, then (scale, ratio).
struct AnchorLayout {
  struct Layer {
    int stride = 0;
    int64_t cells_y = 0, cells_x = 0;
    int64_t anchors_per_cell = 0;
    int64_t first_anchor = 0;  // global index of this layer's first anchor
  };
  std::vector<Layer> layers;
  int64_t total_anchors = 0;
};

/// Anchor family and class count for one detection task.
struct DetectorPreset {
  std::string name;
  std::vector<AnchorLayerSpec> layers;
  std::vector<double> ratios;
  int num_classes = 1;
};

/// Single aspect ratio 0.41, two scales per layer starting at scale_base.
DetectorPreset pedestrian_preset(double scale_base = 8.0);

/// Aspect ratios {1, 2, 1/2}, same scale family, three object classes.
DetectorPreset multiclass_preset(double scale_base = 8.0, int num_classes = 3);

DetectorPreset make_preset(const std::string& name, double scale_base);

std::vector<AnchorBox> generate_anchors(int image_size,
                                        const std::vector<AnchorLayerSpec>& layers,
                                        const std::vector<double>& ratios,
                                        AnchorLayout* layout = nullptr);

/// Offsets of a box relative to an anchor:
/// (dcx/aw, dcy/ah, log(w/aw), log(h/ah)).
std::array<double, 4> encode_box(const Box& box, const AnchorBox& anchor);

Box decode_box(const std::array<double, 4>& deltas, const AnchorBox& anchor);

}  // namespace cfr

#endif  // CFR_ANCHORS_HPP_
