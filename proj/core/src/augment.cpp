#include "cfr/augment.hpp"

#include <algorithm>
#include <cmath>

namespace cfr {

namespace {

// bilinear lookup with pixel centers at (i+0.5,j+0.5), edge clamped
float sample_bilinear(const float* plane, int64_t h, int64_t w, double sx, double sy) {
  const double u = sx - 0.5, v = sy - 0.5;
  const int64_t x0 = static_cast<int64_t>(std::floor(u));
  const int64_t y0 = static_cast<int64_t>(std::floor(v));
  const double fx = u - x0, fy = v - y0;
  auto at = [&](int64_t y, int64_t x) {
    y = std::clamp<int64_t>(y, 0, h - 1);
    x = std::clamp<int64_t>(x, 0, w - 1);
    return static_cast<double>(plane[y * w + x]);
  };
  const double top = at(y0, x0) * (1 - fx) + at(y0, x0 + 1) * fx;
  const double bot = at(y0 + 1, x0) * (1 - fx) + at(y0 + 1, x0 + 1) * fx;
  return static_cast<float>(top * (1 - fy) + bot * fy);
}

// output pixel (x,y) reads source coordinate (a*x + bx, a*y + by); source
// coordinates outside the image read the per-plane fill value
Tensor warp_affine(const Tensor& img, double a, double bx, double by, bool use_fill) {
  const Shape& s = img.shape();
  const int64_t c = s[1], h = s[2], w = s[3];
  Tensor out = Tensor::zeros(s);
  for (int64_t ic = 0; ic < c; ++ic) {
    const float* src = img.ptr() + ic * h * w;
    float* dst = out.ptr() + ic * h * w;
    double fill = 0.0;
    if (use_fill) {
      for (int64_t i = 0; i < h * w; ++i) fill += src[i];
      fill /= static_cast<double>(h * w);
    }
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const double sx = a * (x + 0.5) + bx;
        const double sy = a * (y + 0.5) + by;
        if (use_fill && (sx < 0 || sx > w || sy < 0 || sy > h)) {
          dst[y * w + x] = static_cast<float>(fill);
        } else {
          dst[y * w + x] = sample_bilinear(src, h, w, sx, sy);
        }
      }
    }
  }
  return out;
}

// box through the inverse map x' = (x - bx) / a, clipped; returns false when
// less than 25% of the transformed area survives clipping
bool transform_box(const Box& in, double a, double bx, double by, double extent,
                   Box* out) {
  Box t{(in.x1 - bx) / a, (in.y1 - by) / a, (in.x2 - bx) / a, (in.y2 - by) / a};
  const double full = t.area();
  Box clipped{std::clamp(t.x1, 0.0, extent), std::clamp(t.y1, 0.0, extent),
              std::clamp(t.x2, 0.0, extent), std::clamp(t.y2, 0.0, extent)};
  if (full <= 0 || clipped.area() < 0.25 * full) return false;
  *out = clipped;
  return true;
}

void photometric(Tensor& img, double gain, double shift) {
  for (float& v : img.data())
    v = std::clamp(static_cast<float>(gain * v + shift), 0.0f, 1.0f);
}

}  // namespace

SpectralSample warp_sample(const SpectralSample& in, double a, double bx, double by,
                           bool use_fill) {
  SpectralSample out;
  out.id = in.id;
  out.seed = in.seed;
  out.placement_reduced = in.placement_reduced;
  out.visible = warp_affine(in.visible, a, bx, by, use_fill);
  out.thermal = warp_affine(in.thermal, a, bx, by, use_fill);
  const double extent = static_cast<double>(in.visible.shape()[3]);
  for (size_t i = 0; i < in.gt.boxes.size(); ++i) {
    Box b;
    if (transform_box(in.gt.boxes[i].box, a, bx, by, extent, &b)) {
      out.gt.boxes.push_back({b, in.gt.boxes[i].class_id});
      out.gt.visibility.push_back(in.gt.visibility[i]);
    }
  }
  const int64_t h = in.visible.shape()[2], w = in.visible.shape()[3];
  out.gt.mask = rasterize_boxes(out.gt.boxes, h, w);
  return out;
}

SpectralSample flip_horizontal(const SpectralSample& sample) {
  SpectralSample out;
  out.id = sample.id;
  out.seed = sample.seed;
  out.placement_reduced = sample.placement_reduced;
  const Shape& vs = sample.visible.shape();
  const int64_t h = vs[2], w = vs[3];
  auto mirror = [&](const Tensor& img) {
    Tensor m = Tensor::zeros(img.shape());
    const int64_t c = img.shape()[1];
    for (int64_t ic = 0; ic < c; ++ic) {
      const float* src = img.ptr() + ic * h * w;
      float* dst = m.ptr() + ic * h * w;
      for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) dst[y * w + x] = src[y * w + (w - 1 - x)];
    }
    return m;
  };
  out.visible = mirror(sample.visible);
  out.thermal = mirror(sample.thermal);
  for (const BoxAnn& ann : sample.gt.boxes) {
    Box b{static_cast<double>(w) - ann.box.x2, ann.box.y1,
          static_cast<double>(w) - ann.box.x1, ann.box.y2};
    out.gt.boxes.push_back({b, ann.class_id});
  }
  out.gt.visibility = sample.gt.visibility;
  out.gt.mask = rasterize_boxes(out.gt.boxes, h, w);
  return out;
}

SpectralSample augment_pair(const SpectralSample& sample, Rng& rng) {
  const int64_t w = sample.visible.shape()[3];
  SpectralSample out;
  const int kind = static_cast<int>(rng.uniform_int(4));  // none/flip/crop/pad
  switch (kind) {
    case 1:
      out = flip_horizontal(sample);
      break;
    case 2: {  // zoom into a window, resampled back to full size
      bool done = false;
      for (int attempt = 0; attempt < 10 && !done; ++attempt) {
        const double f = rng.uniform(0.6, 1.0);
        const double bx = rng.uniform(0.0, (1.0 - f) * w);
        const double by = rng.uniform(0.0, (1.0 - f) * w);
        SpectralSample candidate = warp_sample(sample, f, bx, by, false);
        if (sample.gt.boxes.empty() || !candidate.gt.boxes.empty()) {
          out = std::move(candidate);
          done = true;
        }
      }
      if (!done) out = sample;  // keep the original framing
      break;
    }
    case 3: {  // pad onto a larger canvas, scaled back down
      const double f = rng.uniform(1.0, 1.4);
      const double bx = -rng.uniform(0.0, (f - 1.0) * w);
      const double by = -rng.uniform(0.0, (f - 1.0) * w);
      out = warp_sample(sample, f, bx, by, true);
      break;
    }
    default:
      out = sample;
      break;
  }
  // deep-copy images before in-place photometric jitter
  out.visible = out.visible.clone();
  out.thermal = out.thermal.clone();
  photometric(out.visible, rng.uniform(0.8, 1.25), rng.uniform(-0.1, 0.1));
  photometric(out.thermal, rng.uniform(0.8, 1.25), rng.uniform(-0.1, 0.1));
  return out;
}

}  // namespace cfr
