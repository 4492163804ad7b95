#ifndef CFR_CONV_HPP_
#define CFR_CONV_HPP_

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

namespace detail {

// All GEMM operands are staged in Eigen-owned (64-byte aligned) scratch so
// kernel selection and accumulation order never depend on heap addresses;
// results must be bit-identical across runs.
template <class S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Unfolds one sample into a [Cin*kh*kw x Ho*Wo] patch matrix (zero padded).
template <class S>
void im2col(const S* x, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, int64_t ho, int64_t wo, S* cols) {
  for (int64_t ic = 0; ic < cin; ++ic) {
    const S* plane = x + ic * h * w;
    for (int64_t dy = 0; dy < kh; ++dy) {
      for (int64_t dx = 0; dx < kw; ++dx) {
        S* row = cols + ((ic * kh + dy) * kw + dx) * (ho * wo);
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * stride + dy - pad;
          S* dst = row + oy * wo;
          if (iy < 0 || iy >= h) {
            std::fill_n(dst, wo, S(0));
            continue;
          }
          const S* src = plane + iy * w;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * stride + dx - pad;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : S(0);
          }
        }
      }
    }
  }
}

/// Scatter-adds a patch matrix back into one sample (transpose of im2col).
template <class S>
void col2im_add(const S* cols, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
                int64_t stride, int64_t pad, int64_t ho, int64_t wo, S* gx) {
  for (int64_t ic = 0; ic < cin; ++ic) {
    S* plane = gx + ic * h * w;
    for (int64_t dy = 0; dy < kh; ++dy) {
      for (int64_t dx = 0; dx < kw; ++dx) {
        const S* row = cols + ((ic * kh + dy) * kw + dx) * (ho * wo);
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * stride + dy - pad;
          if (iy < 0 || iy >= h) continue;
          S* dst = plane + iy * w;
          const S* src = row + oy * wo;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * stride + dx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace detail

/// 2-D cross-correlation (no kernel flip), NCHW layout.
/// input [N,Cin,H,W] * weight [Cout,Cin,kh,kw] (+bias [Cout]) -> [N,Cout,H',W']
/// with H' = (H + 2*padding - kh) / stride + 1.
template <class S>
TensorT<S> conv2d(const TensorT<S>& input, const TensorT<S>& weight,
                  const std::optional<TensorT<S>>& bias, int64_t stride, int64_t padding) {
  CFR_CHECK(input.shape().rank() == 4, "conv2d: input must be rank 4");
  CFR_CHECK(weight.shape().rank() == 4, "conv2d: weight must be rank 4");
  CFR_CHECK(stride >= 1, "conv2d: stride must be positive");
  CFR_CHECK(padding >= 0, "conv2d: padding must be non-negative");
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  const int64_t n = xs[0], cin = xs[1], h = xs[2], w = xs[3];
  const int64_t cout = ws[0], kh = ws[2], kw = ws[3];
  CFR_CHECK(ws[1] == cin, "conv2d: input channels " + std::to_string(cin) +
                              " do not match weight channels " + std::to_string(ws[1]));
  CFR_CHECK(kh % 2 == 1 && kw % 2 == 1, "conv2d: kernel extents must be odd");
  CFR_CHECK(h + 2 * padding >= kh && w + 2 * padding >= kw,
            "conv2d: kernel larger than padded input");
  if (bias) CFR_CHECK(bias->shape() == Shape{cout}, "conv2d: bias must be [Cout]");

  const int64_t ho = (h + 2 * padding - kh) / stride + 1;
  const int64_t wo = (w + 2 * padding - kw) / stride + 1;
  const int64_t k = cin * kh * kw;
  Shape out_shape{n, cout, ho, wo};
  std::vector<S> out(static_cast<size_t>(out_shape.numel()));

  {
    detail::EMat<S> wmat = detail::ConstMatMap<S>(weight.ptr(), cout, k);
    detail::EMat<S> cols(k, ho * wo);
    detail::EMat<S> ymat(cout, ho * wo);
    for (int64_t i = 0; i < n; ++i) {
      detail::im2col(input.ptr() + i * cin * h * w, cin, h, w, kh, kw, stride, padding,
                     ho, wo, cols.data());
      ymat.noalias() = wmat * cols;
      S* dst = out.data() + i * cout * ho * wo;
      const S* src = ymat.data();
      if (bias) {
        const S* b = bias->ptr();
        for (int64_t oc = 0; oc < cout; ++oc)
          for (int64_t j = 0; j < ho * wo; ++j)
            dst[oc * ho * wo + j] = src[oc * ho * wo + j] + b[oc];
      } else {
        std::copy_n(src, cout * ho * wo, dst);
      }
    }
  }

  std::vector<TensorT<S>> parents{input, weight};
  if (bias) parents.push_back(*bias);
  auto xi = input.impl();
  auto wi = weight.impl();
  auto bi = bias ? bias->impl() : nullptr;
  return detail::make_op_output<S>(
      "conv2d", out_shape, std::move(out), parents,
      [xi, wi, bi, stride, padding, n, cin, h, w, cout, kh, kw, ho,
       wo](const TensorImplT<S>& self) {
        const int64_t k = cin * kh * kw;
        if (wi->requires_grad) wi->ensure_grad();
        if (xi->requires_grad) xi->ensure_grad();
        if (bi && bi->requires_grad) bi->ensure_grad();
        detail::EMat<S> wmat;
        if (xi->requires_grad) wmat = detail::ConstMatMap<S>(wi->data.data(), cout, k);
        detail::EMat<S> gw;
        if (wi->requires_grad) gw = detail::EMat<S>::Zero(cout, k);
        detail::EMat<S> cols(k, ho * wo);
        detail::EMat<S> gy(cout, ho * wo);
        detail::EMat<S> gcols(k, ho * wo);
        for (int64_t i = 0; i < n; ++i) {
          std::copy_n(self.grad.data() + i * cout * ho * wo, cout * ho * wo, gy.data());
          if (wi->requires_grad || xi->requires_grad)
            detail::im2col(xi->data.data() + i * cin * h * w, cin, h, w, kh, kw, stride,
                           padding, ho, wo, cols.data());
          if (wi->requires_grad) gw.noalias() += gy * cols.transpose();
          if (bi && bi->requires_grad) {
            const S* g = gy.data();
            for (int64_t oc = 0; oc < cout; ++oc) {
              S acc = S(0);
              for (int64_t j = 0; j < ho * wo; ++j) acc += g[oc * ho * wo + j];
              bi->grad[oc] += acc;
            }
          }
          if (xi->requires_grad) {
            gcols.noalias() = wmat.transpose() * gy;
            detail::col2im_add(gcols.data(), cin, h, w, kh, kw, stride, padding, ho, wo,
                               xi->grad.data() + i * cin * h * w);
          }
        }
        if (wi->requires_grad) {
          const S* g = gw.data();
          for (int64_t j = 0; j < cout * k; ++j) wi->grad[j] += g[j];
        }
      });
}

template <class S>
TensorT<S> conv2d(const TensorT<S>& input, const TensorT<S>& weight, int64_t stride,
                  int64_t padding) {
  return conv2d(input, weight, std::optional<TensorT<S>>{}, stride, padding);
}

}  // namespace cfr

#endif  // CFR_CONV_HPP_
