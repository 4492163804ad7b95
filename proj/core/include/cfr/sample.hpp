#ifndef CFR_SAMPLE_HPP_
#define CFR_SAMPLE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cfr/boxes.hpp"
#include "cfr/tensor.hpp"

namespace cfr {

enum class Visibility { both, visible_only, thermal_only };

inline std::string visibility_name(Visibility v) {
  switch (v) {
    case Visibility::both: return "both";
    case Visibility::visible_only: return "visible_only";
    case Visibility::thermal_only: return "thermal_only";
  }
  return "both";
}

inline Visibility parse_visibility(const std::string& s) {
  if (s == "both") return Visibility::both;
  if (s == "visible_only") return Visibility::visible_only;
  if (s == "thermal_only") return Visibility::thermal_only;
  throw ContractError("unknown visibility tag '" + s + "'");
}

/// Object annotations plus the binary mask (union of box interiors) at input
/// resolution, and one visibility tag per object.
struct GroundTruth {
  std::vector<BoxAnn> boxes;
  Tensor mask;  // [1,1,H,W], values 0/1
  std::vector<Visibility> visibility;
};

/// Aligned visible/thermal pair with annotations. Both channels share object
/// geometry by construction.
struct SpectralSample {
  std::string id;
  Tensor visible;  // [1,3,H,W] in [0,1]
  Tensor thermal;  // [1,1,H,W] in [0,1]
  GroundTruth gt;
  uint64_t seed = 0;          // generator stream for this sample
  bool placement_reduced = false;  // object count was reduced during placement
};

/// Rasterizes boxes as a union of interiors: a pixel is set when its center
/// lies inside any box.
Tensor rasterize_boxes(const std::vector<BoxAnn>& boxes, int64_t height, int64_t width);

/// Downsamples a 0/1 mask by an integer factor with the >=50% coverage rule:
/// an output cell is 1 when at least half of its input pixels are 1.
Tensor downsample_mask(const Tensor& mask, int64_t factor);

}  // namespace cfr

#endif  // CFR_SAMPLE_HPP_
