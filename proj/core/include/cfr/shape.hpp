#ifndef CFR_SHAPE_HPP_
#define CFR_SHAPE_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>

#include "cfr/errors.hpp"

namespace cfr {

/// Dense row-major shape of rank 1..4, last axis fastest.
class Shape {
public:
  Shape() = default;
  Shape(std::initializer_list<int64_t> dims) {
    CFR_CHECK(dims.size() >= 1 && dims.size() <= 4, "shape rank must be 1..4");
    rank_ = static_cast<int>(dims.size());
    int i = 0;
    for (int64_t d : dims) {
      CFR_CHECK(d > 0, "shape extents must be positive");
      d_[i++] = d;
    }
  }

  int rank() const { return rank_; }
  int64_t operator[](int i) const { return d_[i]; }
  int64_t& operator[](int i) { return d_[i]; }

  int64_t numel() const {
    int64_t n = 1;
    for (int i = 0; i < rank_; ++i) n *= d_[i];
    return n;
  }

  bool operator==(const Shape& o) const {
    if (rank_ != o.rank_) return false;
    for (int i = 0; i < rank_; ++i)
      if (d_[i] != o.d_[i]) return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < rank_; ++i) os << (i ? "x" : "") << d_[i];
    os << "]";
    return os.str();
  }

private:
  int rank_ = 0;
  std::array<int64_t, 4> d_{1, 1, 1, 1};
};

}  // namespace cfr

#endif  // CFR_SHAPE_HPP_
