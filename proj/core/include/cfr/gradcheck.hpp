#ifndef CFR_GRADCHECK_HPP_
#define CFR_GRADCHECK_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

struct FiniteDiffReport {
  std::string op;
  double max_rel_err = 0.0;
  bool pass = false;
  std::string note;  // failure detail (non-finite value, element index)
};

/// Central-difference gradient check of a scalar-valued forward pass.
///
/// `forward` must re-evaluate the computation from the current contents of
/// `inputs` on every call (a fresh graph each time). Every element of every
/// input is perturbed by +-h; the analytic gradient comes from one backward
/// sweep. Relative error per element is |a-n| / max(1e-6, |a|+|n|).
template <class S>
FiniteDiffReport finite_diff_check(const std::string& name,
                                   const std::function<TensorT<S>()>& forward,
                                   std::vector<TensorT<S>> inputs, double h,
                                   double tol) {
  CFR_CHECK(h >= 1e-6 && h <= 1e-3, "finite_diff_check: h must be in [1e-6, 1e-3]");
  FiniteDiffReport report;
  report.op = name;

  for (auto& in : inputs) {
    in.set_requires_grad(true);
    in.zero_grad();
  }
  TensorT<S> loss = forward();
  loss.backward();

  std::vector<std::vector<double>> analytic;
  for (auto& in : inputs) {
    std::vector<double> g(in.data().size(), 0.0);
    for (size_t i = 0; i < in.grad().size(); ++i) g[i] = static_cast<double>(in.grad()[i]);
    analytic.push_back(std::move(g));
    in.zero_grad();
  }

  for (size_t t = 0; t < inputs.size(); ++t) {
    auto& in = inputs[t];
    for (size_t i = 0; i < in.data().size(); ++i) {
      const S saved = in.data()[i];
      in.data()[i] = static_cast<S>(static_cast<double>(saved) + h);
      const double fp = static_cast<double>(forward().item());
      in.data()[i] = static_cast<S>(static_cast<double>(saved) - h);
      const double fm = static_cast<double>(forward().item());
      in.data()[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[t][i];
      if (!std::isfinite(a) || !std::isfinite(numeric)) {
        report.pass = false;
        report.max_rel_err = std::numeric_limits<double>::infinity();
        report.note = "non-finite gradient at input " + std::to_string(t) +
                      " element " + std::to_string(i);
        return report;
      }
      const double err = std::abs(a - numeric) / std::max(1e-6, std::abs(a) + std::abs(numeric));
      if (err > report.max_rel_err) {
        report.max_rel_err = err;
        report.note = "worst at input " + std::to_string(t) + " element " + std::to_string(i);
      }
    }
  }
  report.pass = report.max_rel_err < tol;
  return report;
}

}  // namespace cfr

#endif  // CFR_GRADCHECK_HPP_
