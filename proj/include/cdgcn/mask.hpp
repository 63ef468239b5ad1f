#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cdgcn/tensor.hpp"

namespace cdgcn {

/// Boolean marker per tensor entry, stored in the same layout as Tensor3.
struct Mask {
  std::size_t rows = 0, cols = 0, depth = 0;
  std::vector<std::uint8_t> v;

  Mask() = default;
  Mask(std::size_t r, std::size_t c, std::size_t d, bool fill = false)
      : rows(r), cols(c), depth(d), v(r * c * d, fill ? 1 : 0) {}

  std::uint8_t& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return v[(k * cols + j) * rows + i];
  }
  std::uint8_t operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return v[(k * cols + j) * rows + i];
  }

  std::size_t size() const { return v.size(); }
  const std::uint8_t* data() const { return v.data(); }
  std::uint8_t* data() { return v.data(); }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t b : v) n += b != 0;
    return n;
  }

  bool same_dims(const Tensor3& t) const {
    return rows == t.rows() && cols == t.cols() && depth == t.depth();
  }
  bool same_dims(const Mask& o) const {
    return rows == o.rows && cols == o.cols && depth == o.depth;
  }
};

}  // namespace cdgcn
