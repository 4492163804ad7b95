#ifndef CFR_AUGMENT_HPP_
#define CFR_AUGMENT_HPP_

#include "cfr/rng.hpp"
#include "cfr/sample.hpp"

namespace cfr {

/// Training-time augmentation. One geometric transform (flip, crop, or pad)
/// is drawn once and applied identically to both spectra, the boxes, and the
/// mask, preserving cross-spectral pixel alignment; photometric jitter is
/// drawn independently per spectrum. Boxes are clipped and dropped when less
/// than 25% of their transformed area survives; a crop that would drop every
/// object is resampled up to 10 times, then skipped.
SpectralSample augment_pair(const SpectralSample& sample, Rng& rng);

/// Exact horizontal mirror (its own inverse). Mask is re-rasterized from the
/// mirrored boxes.
SpectralSample flip_horizontal(const SpectralSample& sample);

/// Affine zoom/offset warp: output pixel (x,y) reads source coordinate
/// (zoom*x + ox, zoom*y + oy) bilinearly in both spectra. Boxes go through
/// the inverse map, are clipped to the image, and are dropped when less than
/// 25% of their transformed area survives; the mask is re-rasterized from the
/// surviving boxes. With pad_fill set, out-of-image reads return the
/// per-plane mean instead of edge clamping.
SpectralSample warp_sample(const SpectralSample& sample, double zoom, double ox,
                           double oy, bool pad_fill);

}  // namespace cfr

#endif  // CFR_AUGMENT_HPP_
