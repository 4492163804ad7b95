#ifndef CFR_STATE_HPP_
#define CFR_STATE_HPP_

#include <string>
#include <vector>

#include "cfr/serialize.hpp"
#include "cfr/tensor.hpp"

namespace cfr {

/// One named piece of model state: either a learnable tensor (shared handle)
/// or a raw buffer such as batch-norm running statistics.
template <class S>
struct StateEntry {
  std::string name;
  TensorT<S> tensor;          // defined() when the entry is a tensor
  std::vector<S>* raw = nullptr;  // set when the entry is a raw vector
};

template <class S>
NamedTensors<S> state_to_named(const std::vector<StateEntry<S>>& state) {
  NamedTensors<S> out;
  for (const auto& e : state) {
    if (e.raw) {
      out.emplace_back(e.name,
                       TensorT<S>::from_data(Shape{static_cast<int64_t>(e.raw->size())},
                                             *e.raw));
    } else {
      out.emplace_back(e.name, e.tensor);
    }
  }
  return out;
}

/// Copies checkpoint values into live state, matching by name. Every state
/// entry must be present with the right element count.
template <class S>
void load_state(std::vector<StateEntry<S>>& state, const NamedTensors<S>& entries) {
  for (auto& e : state) {
    const TensorT<S>* found = nullptr;
    for (const auto& [name, t] : entries)
      if (name == e.name) { found = &t; break; }
    if (!found) throw IoError("checkpoint is missing entry '" + e.name + "'");
    if (e.raw) {
      if (found->data().size() != e.raw->size())
        throw IoError("checkpoint entry '" + e.name + "' has wrong size");
      *e.raw = found->data();
    } else {
      if (found->numel() != e.tensor.numel())
        throw IoError("checkpoint entry '" + e.name + "' has wrong size");
      e.tensor.data() = found->data();
    }
  }
}

}  // namespace cfr

#endif  // CFR_STATE_HPP_
