#ifndef CFR_TENSOR_HPP_
#define CFR_TENSOR_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cfr/errors.hpp"
#include "cfr/rng.hpp"
#include "cfr/shape.hpp"

namespace cfr {

namespace autograd {

/// Thread-local switch; when off, ops do not record backward closures.
inline bool& grad_enabled() {
  thread_local bool enabled = true;
  return enabled;
}

/// RAII guard disabling graph construction (inference / data paths).
class NoGradGuard {
public:
  NoGradGuard() : prev_(grad_enabled()) { grad_enabled() = false; }
  ~NoGradGuard() { grad_enabled() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
  bool prev_;
};

/// When on, every op validates its output for NaN/Inf and throws NumericError
/// naming itself. Used by the trainer to identify the offending op after a
/// non-finite loss.
inline bool& check_finite() {
  thread_local bool on = false;
  return on;
}

}  // namespace autograd

template <class S>
struct TensorImplT {
  Shape shape;
  std::vector<S> data;
  std::vector<S> grad;  // allocated on first accumulation
  bool requires_grad = false;
  const char* op_name = nullptr;  // op that produced this tensor, if any
  std::vector<std::shared_ptr<TensorImplT>> parents;
  std::function<void(const TensorImplT&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), S(0));
  }
};

/// Dense rank-1..4 tensor with value (handle) semantics and an optional
/// reverse-mode gradient. Copies share the underlying buffer.
template <class S>
class TensorT {
public:
  using Scalar = S;

  TensorT() = default;
  explicit TensorT(std::shared_ptr<TensorImplT<S>> impl) : impl_(std::move(impl)) {}

  static TensorT zeros(Shape shape, bool requires_grad = false) {
    return full(shape, S(0), requires_grad);
  }

  static TensorT full(Shape shape, S value, bool requires_grad = false) {
    auto impl = std::make_shared<TensorImplT<S>>();
    impl->shape = shape;
    impl->data.assign(static_cast<size_t>(shape.numel()), value);
    impl->requires_grad = requires_grad;
    return TensorT(std::move(impl));
  }

  static TensorT from_data(Shape shape, std::vector<S> values, bool requires_grad = false) {
    CFR_CHECK(static_cast<int64_t>(values.size()) == shape.numel(),
              "data length must equal product of shape extents");
    auto impl = std::make_shared<TensorImplT<S>>();
    impl->shape = shape;
    impl->data = std::move(values);
    impl->requires_grad = requires_grad;
    return TensorT(std::move(impl));
  }

  /// Normal(0, stddev) fill, deterministic in rng state.
  static TensorT randn(Shape shape, Rng& rng, double stddev = 1.0,
                       bool requires_grad = false) {
    TensorT t = zeros(shape, requires_grad);
    for (auto& x : t.data()) x = static_cast<S>(rng.normal(0.0, stddev));
    return t;
  }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int64_t numel() const { return impl_->shape.numel(); }
  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }

  std::vector<S>& data() { return impl_->data; }
  const std::vector<S>& data() const { return impl_->data; }
  std::vector<S>& grad() { return impl_->grad; }
  const std::vector<S>& grad() const { return impl_->grad; }

  S* ptr() { return impl_->data.data(); }
  const S* ptr() const { return impl_->data.data(); }

  /// Value of a single-element tensor.
  S item() const {
    CFR_CHECK(numel() == 1, "item() requires a single-element tensor");
    return impl_->data[0];
  }

  S at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    const Shape& s = impl_->shape;
    return impl_->data[((n * s[1] + c) * s[2] + h) * s[3] + w];
  }

  void zero_grad() { if (impl_) impl_->grad.clear(); }

  bool all_finite() const {
    for (S v : impl_->data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  std::shared_ptr<TensorImplT<S>> impl() const { return impl_; }

  /// Deep copy of values; the copy is a detached leaf.
  TensorT clone() const {
    auto impl = std::make_shared<TensorImplT<S>>();
    impl->shape = impl_->shape;
    impl->data = impl_->data;
    impl->requires_grad = impl_->requires_grad;
    return TensorT(std::move(impl));
  }

  /// Reverse-mode sweep from this (scalar) tensor. Accumulates into .grad of
  /// every reachable tensor with requires_grad set.
  void backward() const {
    CFR_CHECK(numel() == 1, "backward() must start from a scalar");
    // topological order over the recorded graph
    std::vector<TensorImplT<S>*> order;
    std::unordered_set<TensorImplT<S>*> seen;
    std::function<void(TensorImplT<S>*)> visit = [&](TensorImplT<S>* node) {
      if (!node || seen.count(node)) return;
      seen.insert(node);
      for (auto& p : node->parents) visit(p.get());
      order.push_back(node);
    };
    visit(impl_.get());
    impl_->ensure_grad();
    impl_->grad[0] = S(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      TensorImplT<S>* node = *it;
      if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
    }
  }

private:
  std::shared_ptr<TensorImplT<S>> impl_;
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

namespace detail {

/// Shared forward bookkeeping: builds the output impl, wires parents and the
/// backward closure when autograd is active, and applies the finite check.
template <class S>
TensorT<S> make_op_output(const char* op_name, Shape shape, std::vector<S> values,
                          std::vector<TensorT<S>> parents,
                          std::function<void(const TensorImplT<S>&)> backward_fn) {
  auto impl = std::make_shared<TensorImplT<S>>();
  impl->shape = shape;
  impl->data = std::move(values);
  impl->op_name = op_name;
  if (autograd::check_finite()) {
    for (S v : impl->data)
      if (!std::isfinite(static_cast<double>(v)))
        throw NumericError(op_name, "output contains NaN/Inf");
  }
  bool needs_grad = false;
  for (const auto& p : parents) needs_grad = needs_grad || p.requires_grad();
  if (needs_grad && autograd::grad_enabled()) {
    impl->requires_grad = true;
    for (auto& p : parents) impl->parents.push_back(p.impl());
    impl->backward_fn = std::move(backward_fn);
  }
  return TensorT<S>(std::move(impl));
}

}  // namespace detail

/// Named learnable tensor; `value` carries requires_grad.
template <class S>
struct ParameterT {
  std::string name;
  TensorT<S> value;
};

}  // namespace cfr

#endif  // CFR_TENSOR_HPP_
