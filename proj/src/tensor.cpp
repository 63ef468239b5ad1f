#include "cdgcn/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "cdgcn/kernels.hpp"

namespace cdgcn {

bool Tensor3::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor3& Tensor3::add_scaled(const Tensor3& x, double a) {
  if (!same_dims(x)) {
    throw std::invalid_argument("Tensor3::add_scaled: dimension mismatch");
  }
  kernels::ops().axpy(data_.data(), a, x.data_.data(), data_.size());
  return *this;
}

Tensor3& Tensor3::scale(double a) {
  kernels::ops().scale(data_.data(), a, data_.size());
  return *this;
}

double frobenius_norm(const Tensor3& w) {
  return std::sqrt(kernels::ops().sum_sq(w.data(), w.size()));
}

}  // namespace cdgcn
