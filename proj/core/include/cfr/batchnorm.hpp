#ifndef CFR_BATCHNORM_HPP_
#define CFR_BATCHNORM_HPP_

#include <cmath>
#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

enum class RunMode { train, eval };

/// Per-channel running statistics of a batch-norm site. Mutable state, not
/// learned parameters; updated only in train mode.
template <class S>
struct RunningStats {
  std::vector<S> mean;
  std::vector<S> var;

  static RunningStats init(int64_t channels) {
    RunningStats s;
    s.mean.assign(channels, S(0));
    s.var.assign(channels, S(1));
    return s;
  }
};

/// Per-channel batch normalization over N,H,W.
/// Train mode normalizes with batch statistics (biased variance) and blends
/// them into `stats` with the given momentum: r = (1-m)*r + m*batch.
/// Eval mode normalizes with `stats` as frozen constants.
template <class S>
TensorT<S> batchnorm2d(const TensorT<S>& x, const TensorT<S>& gamma,
                       const TensorT<S>& beta, RunningStats<S>& stats, RunMode mode,
                       double momentum, double eps) {
  CFR_CHECK(x.shape().rank() == 4, "batchnorm2d: input must be rank 4");
  CFR_CHECK(eps > 0.0, "batchnorm2d: eps must be > 0");
  const Shape& s = x.shape();
  const int64_t n = s[0], c = s[1], h = s[2], w = s[3];
  CFR_CHECK(gamma.shape() == Shape{c} && beta.shape() == Shape{c},
            "batchnorm2d: gamma/beta must be [C]");
  CFR_CHECK(static_cast<int64_t>(stats.mean.size()) == c, "batchnorm2d: stats size");
  const int64_t m = n * h * w;
  if (mode == RunMode::train)
    CFR_CHECK(m >= 2, "batchnorm2d: train mode needs N*H*W >= 2");

  std::vector<double> mu(c), invstd(c);
  if (mode == RunMode::train) {
    for (int64_t ic = 0; ic < c; ++ic) {
      double acc = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        const S* plane = x.ptr() + (i * c + ic) * h * w;
        for (int64_t j = 0; j < h * w; ++j) acc += plane[j];
      }
      const double mean = acc / m;
      double vacc = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        const S* plane = x.ptr() + (i * c + ic) * h * w;
        for (int64_t j = 0; j < h * w; ++j) {
          const double d = plane[j] - mean;
          vacc += d * d;
        }
      }
      const double var = vacc / m;
      mu[ic] = mean;
      invstd[ic] = 1.0 / std::sqrt(var + eps);
      stats.mean[ic] = static_cast<S>((1.0 - momentum) * stats.mean[ic] + momentum * mean);
      stats.var[ic] = static_cast<S>((1.0 - momentum) * stats.var[ic] + momentum * var);
    }
  } else {
    for (int64_t ic = 0; ic < c; ++ic) {
      mu[ic] = static_cast<double>(stats.mean[ic]);
      invstd[ic] = 1.0 / std::sqrt(static_cast<double>(stats.var[ic]) + eps);
    }
  }

  std::vector<S> out(x.data().size());
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t ic = 0; ic < c; ++ic) {
      const S* src = x.ptr() + (i * c + ic) * h * w;
      S* dst = out.data() + (i * c + ic) * h * w;
      const double g = static_cast<double>(gamma.ptr()[ic]);
      const double b = static_cast<double>(beta.ptr()[ic]);
      for (int64_t j = 0; j < h * w; ++j)
        dst[j] = static_cast<S>((src[j] - mu[ic]) * invstd[ic] * g + b);
    }
  }

  auto xi = x.impl();
  auto gi = gamma.impl();
  auto bi = beta.impl();
  auto mu_c = std::make_shared<std::vector<double>>(std::move(mu));
  auto invstd_c = std::make_shared<std::vector<double>>(std::move(invstd));
  const bool train = mode == RunMode::train;
  return detail::make_op_output<S>(
      "batchnorm2d", x.shape(), std::move(out), {x, gamma, beta},
      [xi, gi, bi, mu_c, invstd_c, train, n, c, h, w](const TensorImplT<S>& self) {
        const int64_t m = n * h * w;
        if (gi->requires_grad) gi->ensure_grad();
        if (bi->requires_grad) bi->ensure_grad();
        if (xi->requires_grad) xi->ensure_grad();
        for (int64_t ic = 0; ic < c; ++ic) {
          const double mean = (*mu_c)[ic];
          const double istd = (*invstd_c)[ic];
          const double g = static_cast<double>(gi->data[ic]);
          // channel reductions: sum(gy), sum(gy * xhat)
          double sum_gy = 0.0, sum_gy_xhat = 0.0;
          for (int64_t i = 0; i < n; ++i) {
            const S* xp = xi->data.data() + (i * c + ic) * h * w;
            const S* gy = self.grad.data() + (i * c + ic) * h * w;
            for (int64_t j = 0; j < h * w; ++j) {
              const double xhat = (xp[j] - mean) * istd;
              sum_gy += gy[j];
              sum_gy_xhat += gy[j] * xhat;
            }
          }
          if (gi->requires_grad) gi->grad[ic] += static_cast<S>(sum_gy_xhat);
          if (bi->requires_grad) bi->grad[ic] += static_cast<S>(sum_gy);
          if (!xi->requires_grad) continue;
          if (train) {
            const double k1 = g * istd / m;
            for (int64_t i = 0; i < n; ++i) {
              const S* xp = xi->data.data() + (i * c + ic) * h * w;
              const S* gy = self.grad.data() + (i * c + ic) * h * w;
              S* gx = xi->grad.data() + (i * c + ic) * h * w;
              for (int64_t j = 0; j < h * w; ++j) {
                const double xhat = (xp[j] - mean) * istd;
                gx[j] += static_cast<S>(k1 * (m * gy[j] - sum_gy - xhat * sum_gy_xhat));
              }
            }
          } else {
            const double k = g * istd;
            for (int64_t i = 0; i < n; ++i) {
              const S* gy = self.grad.data() + (i * c + ic) * h * w;
              S* gx = xi->grad.data() + (i * c + ic) * h * w;
              for (int64_t j = 0; j < h * w; ++j) gx[j] += static_cast<S>(k * gy[j]);
            }
          }
        }
      });
}

}  // namespace cfr

#endif  // CFR_BATCHNORM_HPP_
