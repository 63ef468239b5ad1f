// Scalar reference kernels. These define the semantics every other backend
// is tested against; keep them simple.

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "cdgcn/kernels.hpp"

namespace cdgcn::kernels::scalar {

void axpy(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double* y, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void relu(double* out, const double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_gate(double* g, const double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(z[i] > 0.0)) g[i] = 0.0;
  }
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double huber_masked(const double* pred, const double* target,
                    const std::uint8_t* mask, double delta, double* grad,
                    std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) {
      grad[i] = 0.0;
      continue;
    }
    const double r = pred[i] - target[i];
    const double ar = std::fabs(r);
    if (ar <= delta) {
      s += 0.5 * r * r;
      grad[i] = r;
    } else {
      s += delta * (ar - 0.5 * delta);
      grad[i] = r > 0.0 ? delta : -delta;
    }
  }
  return s;
}

double masked_sq_diff_sum(const double* a, const double* b,
                          const std::uint8_t* mask, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) {
      const double d = a[i] - b[i];
      s += d * d;
    }
  }
  return s;
}

double masked_sq_sum(const double* a, const std::uint8_t* mask,
                     std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) s += a[i] * a[i];
  }
  return s;
}

}  // namespace cdgcn::kernels::scalar

namespace cdgcn::kernels {

const Ops& scalar_ops() {
  static const Ops table{
      "scalar",
      scalar::axpy,
      scalar::scale,
      scalar::dot,
      scalar::sum_sq,
      scalar::relu,
      scalar::relu_gate,
      scalar::abs_diff_sum,
      scalar::huber_masked,
      scalar::masked_sq_diff_sum,
      scalar::masked_sq_sum,
  };
  return table;
}

}  // namespace cdgcn::kernels
