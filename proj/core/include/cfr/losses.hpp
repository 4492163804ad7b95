#ifndef CFR_LOSSES_HPP_
#define CFR_LOSSES_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

/// Mean binary cross-entropy on logits, numerically stable log-sum-exp form:
/// l(x,t) = max(x,0) - x*t + log(1 + exp(-|x|)). Targets must be 0 or 1 and
/// are treated as constants.
template <class S>
TensorT<S> sigmoid_bce(const TensorT<S>& logits, const TensorT<S>& targets) {
  CFR_CHECK(logits.shape() == targets.shape(), "sigmoid_bce: shape mismatch");
  const int64_t n = logits.numel();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(logits.ptr()[i]);
    const double t = static_cast<double>(targets.ptr()[i]);
    CFR_CHECK(t == 0.0 || t == 1.0, "sigmoid_bce: targets must be 0 or 1");
    acc += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  auto li = logits.impl();
  auto ti = targets.impl();
  return detail::make_op_output<S>(
      "sigmoid_bce", Shape{1}, {static_cast<S>(acc / n)}, {logits},
      [li, ti, n](const TensorImplT<S>& self) {
        if (!li->requires_grad) return;
        li->ensure_grad();
        const double g = static_cast<double>(self.grad[0]) / n;
        for (int64_t i = 0; i < n; ++i) {
          const double x = static_cast<double>(li->data[i]);
          const double p = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                                  : std::exp(x) / (1.0 + std::exp(x));
          li->grad[i] += static_cast<S>(g * (p - static_cast<double>(ti->data[i])));
        }
      });
}

/// Mean softmax cross-entropy over rows of a [m, K] logit matrix against
/// integer class labels. Stable via per-row max subtraction.
template <class S>
TensorT<S> softmax_ce(const TensorT<S>& logits, const std::vector<int>& labels) {
  CFR_CHECK(logits.shape().rank() == 2, "softmax_ce: logits must be [m, K]");
  const int64_t m = logits.shape()[0], k = logits.shape()[1];
  CFR_CHECK(static_cast<int64_t>(labels.size()) == m, "softmax_ce: label count mismatch");
  for (int lbl : labels)
    CFR_CHECK(lbl >= 0 && lbl < k, "softmax_ce: label out of range");
  double acc = 0.0;
  for (int64_t i = 0; i < m; ++i) {
    const S* row = logits.ptr() + i * k;
    double mx = row[0];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double lse = 0.0;
    for (int64_t j = 0; j < k; ++j) lse += std::exp(static_cast<double>(row[j]) - mx);
    lse = mx + std::log(lse);
    acc += lse - static_cast<double>(row[labels[i]]);
  }
  auto li = logits.impl();
  auto lbl = std::make_shared<std::vector<int>>(labels);
  return detail::make_op_output<S>(
      "softmax_ce", Shape{1}, {static_cast<S>(acc / m)}, {logits},
      [li, lbl, m, k](const TensorImplT<S>& self) {
        if (!li->requires_grad) return;
        li->ensure_grad();
        const double g = static_cast<double>(self.grad[0]) / m;
        for (int64_t i = 0; i < m; ++i) {
          const S* row = li->data.data() + i * k;
          double mx = row[0];
          for (int64_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
          double z = 0.0;
          for (int64_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
          for (int64_t j = 0; j < k; ++j) {
            const double p = std::exp(static_cast<double>(row[j]) - mx) / z;
            const double onehot = (j == (*lbl)[i]) ? 1.0 : 0.0;
            li->grad[i * k + j] += static_cast<S>(g * (p - onehot));
          }
        }
      });
}

/// Mean smooth-L1 (Huber at beta=1): 0.5*d^2 for |d|<1 else |d|-0.5.
/// Targets are constants.
template <class S>
TensorT<S> smooth_l1(const TensorT<S>& pred, const TensorT<S>& target) {
  CFR_CHECK(pred.shape() == target.shape(), "smooth_l1: shape mismatch");
  const int64_t n = pred.numel();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pred.ptr()[i]) - static_cast<double>(target.ptr()[i]);
    acc += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
  }
  auto pi = pred.impl();
  auto ti = target.impl();
  return detail::make_op_output<S>(
      "smooth_l1", Shape{1}, {static_cast<S>(acc / n)}, {pred},
      [pi, ti, n](const TensorImplT<S>& self) {
        if (!pi->requires_grad) return;
        pi->ensure_grad();
        const double g = static_cast<double>(self.grad[0]) / n;
        for (int64_t i = 0; i < n; ++i) {
          const double d =
              static_cast<double>(pi->data[i]) - static_cast<double>(ti->data[i]);
          pi->grad[i] += static_cast<S>(g * std::clamp(d, -1.0, 1.0));
        }
      });
}

}  // namespace cfr

#endif  // CFR_LOSSES_HPP_
