#ifndef CFR_SGD_HPP_
#define CFR_SGD_HPP_

#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

/// One SGD update on a single tensor: v = momentum*v + g; w -= lr*v.
/// Velocity is owned by the caller and must match the parameter size.
template <class S>
void sgd_step(TensorT<S>& param, std::vector<S>& velocity, double lr, double momentum) {
  if (param.grad().empty()) return;  // parameter unused in this graph
  if (velocity.empty()) velocity.assign(param.data().size(), S(0));
  CFR_CHECK(velocity.size() == param.data().size(), "sgd_step: velocity size mismatch");
  S* w = param.ptr();
  const S* g = param.grad().data();
  for (size_t i = 0; i < velocity.size(); ++i) {
    velocity[i] = static_cast<S>(momentum * velocity[i] + g[i]);
    w[i] -= static_cast<S>(lr * velocity[i]);
  }
}

/// Momentum SGD over a fixed parameter list.
template <class S>
class SgdOptimizer {
public:
  SgdOptimizer(std::vector<TensorT<S>> params, double lr, double momentum)
      : params_(std::move(params)), velocity_(params_.size()), lr_(lr),
        momentum_(momentum) {}

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step() {
    for (size_t i = 0; i < params_.size(); ++i)
      sgd_step(params_[i], velocity_[i], lr_, momentum_);
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

private:
  std::vector<TensorT<S>> params_;
  std::vector<std::vector<S>> velocity_;
  double lr_;
  double momentum_;
};

}  // namespace cfr

#endif  // CFR_SGD_HPP_
