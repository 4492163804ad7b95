#include "cfr/anchors.hpp"

#include <cmath>

#include "cfr/errors.hpp"

namespace cfr {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

DetectorPreset pedestrian_preset(double scale_base) {
  DetectorPreset p;
  p.name = "pedestrian";
  p.layers = {{8, {scale_base, scale_base * kSqrt2}},
              {16, {2 * scale_base, 2 * scale_base * kSqrt2}},
              {32, {4 * scale_base, 4 * scale_base * kSqrt2}}};
  p.ratios = {0.41};
  p.num_classes = 1;
  return p;
}

DetectorPreset multiclass_preset(double scale_base, int num_classes) {
  DetectorPreset p = pedestrian_preset(scale_base);
  p.name = "multiclass";
  p.ratios = {1.0, 2.0, 0.5};
  p.num_classes = num_classes;
  return p;
}

DetectorPreset make_preset(const std::string& name, double scale_base) {
  if (name == "pedestrian") return pedestrian_preset(scale_base);
  if (name == "multiclass") return multiclass_preset(scale_base);
  throw ConfigError("unknown preset '" + name + "' (expected pedestrian or multiclass)");
}

std::vector<AnchorBox> generate_anchors(int image_size,
                                        const std::vector<AnchorLayerSpec>& layers,
                                        const std::vector<double>& ratios,
                                        AnchorLayout* layout) {
  CFR_CHECK(!layers.empty() && !ratios.empty(), "generate_anchors: empty spec");
  std::vector<AnchorBox> anchors;
  AnchorLayout lay;
  for (size_t li = 0; li < layers.size(); ++li) {
    const AnchorLayerSpec& spec = layers[li];
    CFR_CHECK(spec.stride > 0 && image_size % spec.stride == 0,
              "generate_anchors: stride " + std::to_string(spec.stride) +
                  " does not divide image size " + std::to_string(image_size));
    for (size_t s = 1; s < spec.scales.size(); ++s)
      CFR_CHECK(spec.scales[s - 1] <= spec.scales[s],
                "generate_anchors: scales must be sorted ascending");
    const int64_t cells = image_size / spec.stride;
    AnchorLayout::Layer meta;
    meta.stride = spec.stride;
    meta.cells_y = meta.cells_x = cells;
    meta.anchors_per_cell = static_cast<int64_t>(spec.scales.size() * ratios.size());
    meta.first_anchor = static_cast<int64_t>(anchors.size());
    for (int64_t i = 0; i < cells; ++i) {
      for (int64_t j = 0; j < cells; ++j) {
        const double cy = (i + 0.5) * spec.stride;
        const double cx = (j + 0.5) * spec.stride;
        for (double scale : spec.scales) {
          for (double ratio : ratios) {
            AnchorBox a;
            a.cx = cx;
            a.cy = cy;
            a.w = scale * std::sqrt(ratio);
            a.h = scale / std::sqrt(ratio);
            a.layer = static_cast<int>(li);
            a.scale = scale;
            a.ratio = ratio;
            anchors.push_back(a);
          }
        }
      }
    }
    lay.layers.push_back(meta);
  }
  lay.total_anchors = static_cast<int64_t>(anchors.size());
  if (layout) *layout = lay;
  return anchors;
}

std::array<double, 4> encode_box(const Box& box, const AnchorBox& anchor) {
  return {(box.cx() - anchor.cx) / anchor.w, (box.cy() - anchor.cy) / anchor.h,
          std::log(box.w() / anchor.w), std::log(box.h() / anchor.h)};
}

Box decode_box(const std::array<double, 4>& deltas, const AnchorBox& anchor) {
  const double cx = deltas[0] * anchor.w + anchor.cx;
  const double cy = deltas[1] * anchor.h + anchor.cy;
  const double w = std::exp(deltas[2]) * anchor.w;
  const double h = std::exp(deltas[3]) * anchor.h;
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

}  // namespace cfr
