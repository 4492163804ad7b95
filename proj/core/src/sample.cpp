#include "cfr/sample.hpp"

namespace cfr {

Tensor rasterize_boxes(const std::vector<BoxAnn>& boxes, int64_t height, int64_t width) {
  Tensor mask = Tensor::zeros(Shape{1, 1, height, width});
  float* m = mask.ptr();
  for (const BoxAnn& ann : boxes) {
    for (int64_t y = 0; y < height; ++y) {
      const double cy = y + 0.5;
      if (cy <= ann.box.y1 || cy >= ann.box.y2) continue;
      for (int64_t x = 0; x < width; ++x) {
        const double cx = x + 0.5;
        if (cx > ann.box.x1 && cx < ann.box.x2) m[y * width + x] = 1.0f;
      }
    }
  }
  return mask;
}

Tensor downsample_mask(const Tensor& mask, int64_t factor) {
  CFR_CHECK(mask.shape().rank() == 4 && mask.shape()[0] == 1 && mask.shape()[1] == 1,
            "downsample_mask: mask must be [1,1,H,W]");
  const int64_t h = mask.shape()[2], w = mask.shape()[3];
  CFR_CHECK(factor >= 1 && h % factor == 0 && w % factor == 0,
            "downsample_mask: factor must divide mask extents");
  const int64_t ho = h / factor, wo = w / factor;
  Tensor out = Tensor::zeros(Shape{1, 1, ho, wo});
  const float* src = mask.ptr();
  float* dst = out.ptr();
  const int64_t cell = factor * factor;
  for (int64_t oy = 0; oy < ho; ++oy) {
    for (int64_t ox = 0; ox < wo; ++ox) {
      int64_t count = 0;
      for (int64_t dy = 0; dy < factor; ++dy)
        for (int64_t dx = 0; dx < factor; ++dx)
          if (src[(oy * factor + dy) * w + ox * factor + dx] > 0.5f) ++count;
      dst[oy * wo + ox] = (2 * count >= cell) ? 1.0f : 0.0f;
    }
  }
  return out;
}

}  // namespace cfr
