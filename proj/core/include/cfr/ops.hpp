#ifndef CFR_OPS_HPP_
#define CFR_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

/// Elementwise max(x, 0). Subgradient at exactly 0 is taken as 0.
template <class S>
TensorT<S> relu(const TensorT<S>& x) {
  std::vector<S> out(x.data().size());
  const S* in = x.ptr();
  for (size_t i = 0; i < out.size(); ++i) out[i] = in[i] > S(0) ? in[i] : S(0);
  auto xi = x.impl();
  return detail::make_op_output<S>(
      "relu", x.shape(), std::move(out), {x},
      [xi](const TensorImplT<S>& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
          if (xi->data[i] > S(0)) xi->grad[i] += self.grad[i];
      });
}

template <class S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
  CFR_CHECK(a.shape() == b.shape(), "add: shape mismatch " + a.shape().str() +
                                        " vs " + b.shape().str());
  std::vector<S> out(a.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.ptr()[i] + b.ptr()[i];
  auto ai = a.impl(), bi = b.impl();
  return detail::make_op_output<S>(
      "add", a.shape(), std::move(out), {a, b},
      [ai, bi](const TensorImplT<S>& self) {
        for (auto& pi : {ai, bi}) {
          if (!pi->requires_grad) continue;
          pi->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) pi->grad[i] += self.grad[i];
        }
      });
}

template <class S>
TensorT<S> mul_scalar(const TensorT<S>& x, double s) {
  std::vector<S> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<S>(x.ptr()[i] * s);
  auto xi = x.impl();
  return detail::make_op_output<S>(
      "mul_scalar", x.shape(), std::move(out), {x},
      [xi, s](const TensorImplT<S>& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
          xi->grad[i] += static_cast<S>(self.grad[i] * s);
      });
}

/// Elementwise maximum; on ties the gradient goes to the first argument.
template <class S>
TensorT<S> ewise_max(const TensorT<S>& a, const TensorT<S>& b) {
  CFR_CHECK(a.shape() == b.shape(), "ewise_max: shape mismatch");
  std::vector<S> out(a.data().size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = a.ptr()[i] >= b.ptr()[i] ? a.ptr()[i] : b.ptr()[i];
  auto ai = a.impl(), bi = b.impl();
  return detail::make_op_output<S>(
      "ewise_max", a.shape(), std::move(out), {a, b},
      [ai, bi](const TensorImplT<S>& self) {
        if (ai->requires_grad) ai->ensure_grad();
        if (bi->requires_grad) bi->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
          if (ai->data[i] >= bi->data[i]) {
            if (ai->requires_grad) ai->grad[i] += self.grad[i];
          } else if (bi->requires_grad) {
            bi->grad[i] += self.grad[i];
          }
        }
      });
}

/// Arithmetic mean of k same-shaped tensors, accumulated in double.
template <class S>
TensorT<S> mean_of_list(const std::vector<TensorT<S>>& xs) {
  CFR_CHECK(!xs.empty(), "mean_of_list: empty list");
  for (const auto& x : xs)
    CFR_CHECK(x.shape() == xs[0].shape(), "mean_of_list: shape mismatch");
  const size_t n = xs[0].data().size();
  const double inv_k = 1.0 / static_cast<double>(xs.size());
  std::vector<S> out(n);
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& x : xs) acc += static_cast<double>(x.ptr()[i]);
    out[i] = static_cast<S>(acc * inv_k);
  }
  std::vector<std::shared_ptr<TensorImplT<S>>> impls;
  for (const auto& x : xs) impls.push_back(x.impl());
  return detail::make_op_output<S>(
      "mean_of_list", xs[0].shape(), std::move(out), xs,
      [impls, inv_k](const TensorImplT<S>& self) {
        for (auto& pi : impls) {
          if (!pi->requires_grad) continue;
          pi->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i)
            pi->grad[i] += static_cast<S>(self.grad[i] * inv_k);
        }
      });
}

/// Channel concatenation: a fills channels [0,Ca), b fills [Ca,Ca+Cb).
template <class S>
TensorT<S> concat_channels(const TensorT<S>& a, const TensorT<S>& b) {
  CFR_CHECK(a.shape().rank() == 4 && b.shape().rank() == 4,
            "concat_channels: rank-4 tensors required");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  CFR_CHECK(sa[0] == sb[0] && sa[2] == sb[2] && sa[3] == sb[3],
            "concat_channels: batch/spatial mismatch " + sa.str() + " vs " + sb.str());
  const int64_t n = sa[0], ca = sa[1], cb = sb[1], hw = sa[2] * sa[3];
  Shape out_shape{n, ca + cb, sa[2], sa[3]};
  std::vector<S> out(static_cast<size_t>(out_shape.numel()));
  for (int64_t i = 0; i < n; ++i) {
    S* dst = out.data() + i * (ca + cb) * hw;
    std::copy_n(a.ptr() + i * ca * hw, ca * hw, dst);
    std::copy_n(b.ptr() + i * cb * hw, cb * hw, dst + ca * hw);
  }
  auto ai = a.impl(), bi = b.impl();
  return detail::make_op_output<S>(
      "concat_channels", out_shape, std::move(out), {a, b},
      [ai, bi, n, ca, cb, hw](const TensorImplT<S>& self) {
        for (int64_t i = 0; i < n; ++i) {
          const S* src = self.grad.data() + i * (ca + cb) * hw;
          if (ai->requires_grad) {
            ai->ensure_grad();
            S* ga = ai->grad.data() + i * ca * hw;
            for (int64_t j = 0; j < ca * hw; ++j) ga[j] += src[j];
          }
          if (bi->requires_grad) {
            bi->ensure_grad();
            S* gb = bi->grad.data() + i * cb * hw;
            for (int64_t j = 0; j < cb * hw; ++j) gb[j] += src[ca * hw + j];
          }
        }
      });
}

/// out[i] = x.flat[indices[i]]; backward scatters (accumulating) through the map.
template <class S>
TensorT<S> gather(const TensorT<S>& x, std::vector<int64_t> indices) {
  const int64_t n = x.numel();
  for (int64_t idx : indices)
    CFR_CHECK(idx >= 0 && idx < n, "gather: index out of range");
  std::vector<S> out(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) out[i] = x.ptr()[indices[i]];
  auto xi = x.impl();
  auto idx = std::make_shared<std::vector<int64_t>>(std::move(indices));
  return detail::make_op_output<S>(
      "gather", Shape{static_cast<int64_t>(idx->size())}, std::move(out), {x},
      [xi, idx](const TensorImplT<S>& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (size_t i = 0; i < idx->size(); ++i)
          xi->grad[(*idx)[i]] += self.grad[i];
      });
}

/// Same data, new shape (element count must match).
template <class S>
TensorT<S> reshape(const TensorT<S>& x, Shape shape) {
  CFR_CHECK(shape.numel() == x.numel(), "reshape: element count mismatch");
  std::vector<S> out = x.data();
  auto xi = x.impl();
  return detail::make_op_output<S>(
      "reshape", shape, std::move(out), {x},
      [xi](const TensorImplT<S>& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) xi->grad[i] += self.grad[i];
      });
}

/// Flatten and concatenate a list of tensors into one rank-1 tensor.
template <class S>
TensorT<S> concat_flat(const std::vector<TensorT<S>>& xs) {
  CFR_CHECK(!xs.empty(), "concat_flat: empty list");
  int64_t total = 0;
  for (const auto& x : xs) total += x.numel();
  std::vector<S> out;
  out.reserve(total);
  for (const auto& x : xs) out.insert(out.end(), x.data().begin(), x.data().end());
  std::vector<std::shared_ptr<TensorImplT<S>>> impls;
  for (const auto& x : xs) impls.push_back(x.impl());
  return detail::make_op_output<S>(
      "concat_flat", Shape{total}, std::move(out), xs,
      [impls](const TensorImplT<S>& self) {
        size_t off = 0;
        for (auto& pi : impls) {
          const size_t n = pi->data.size();
          if (pi->requires_grad) {
            pi->ensure_grad();
            for (size_t i = 0; i < n; ++i) pi->grad[i] += self.grad[off + i];
          }
          off += n;
        }
      });
}

/// Scalar dot product with a fixed coefficient vector (double accumulation).
template <class S>
TensorT<S> weighted_sum(const TensorT<S>& x, const std::vector<double>& w) {
  CFR_CHECK(static_cast<int64_t>(w.size()) == x.numel(),
            "weighted_sum: coefficient count mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < w.size(); ++i) acc += w[i] * static_cast<double>(x.ptr()[i]);
  auto xi = x.impl();
  auto wp = std::make_shared<std::vector<double>>(w);
  return detail::make_op_output<S>(
      "weighted_sum", Shape{1}, {static_cast<S>(acc)}, {x},
      [xi, wp](const TensorImplT<S>& self) {
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (size_t i = 0; i < wp->size(); ++i)
          xi->grad[i] += static_cast<S>(self.grad[0] * (*wp)[i]);
      });
}

template <class S>
TensorT<S> sum_all(const TensorT<S>& x) {
  return weighted_sum(x, std::vector<double>(x.numel(), 1.0));
}

/// Plain sigmoid of the data (no graph); for mask probabilities at metric time.
template <class S>
std::vector<double> sigmoid_values(const TensorT<S>& logits) {
  std::vector<double> p(logits.data().size());
  for (size_t i = 0; i < p.size(); ++i) {
    double x = static_cast<double>(logits.ptr()[i]);
    p[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return p;
}

}  // namespace cfr

#endif  // CFR_OPS_HPP_
