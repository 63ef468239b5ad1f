#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace cdgcn::kernels {

// Double-precision inner loops shared by the tensor algebra, losses and
// metrics. A scalar reference backend is always available; the AVX2 backend
// is selected at startup when the CPU supports AVX2+FMA. The choice can be
// overridden with the CDGCN_KERNELS environment variable (auto|scalar|avx2)
// or programmatically via select_backend().
//
// Reductions accumulate in a backend-specific but fixed order, so results are
// deterministic for a given backend. Backends agree with the scalar reference
// to a few ulps per element; the equivalence suite in tests/test_kernels.cpp
// pins the tolerance.
struct Ops {
  const char* name;

  // y[i] += a * x[i]
  void (*axpy)(double* y, double a, const double* x, std::size_t n);
  // y[i] *= a
  void (*scale)(double* y, double a, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  // out[i] = max(z[i], 0)
  void (*relu)(double* out, const double* z, std::size_t n);
  // g[i] = z[i] > 0 ? g[i] : 0
  void (*relu_gate)(double* g, const double* z, std::size_t n);
  // sum_i |a[i] - b[i]|
  double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);
  // Per masked element, with r = pred[i] - target[i]:
  //   adds 0.5 r^2 (|r| <= delta) or delta (|r| - delta/2) to the return value
  //   and writes the unscaled derivative (r, or delta * sign r) into grad[i];
  // unmasked elements contribute nothing and get grad[i] = 0.
  double (*huber_masked)(const double* pred, const double* target,
                         const std::uint8_t* mask, double delta, double* grad,
                         std::size_t n);
  // sum over masked i of (a[i] - b[i])^2
  double (*masked_sq_diff_sum)(const double* a, const double* b,
                               const std::uint8_t* mask, std::size_t n);
  // sum over masked i of a[i]^2
  double (*masked_sq_sum)(const double* a, const std::uint8_t* mask,
                          std::size_t n);
};

/// Kernel table currently in use.
const Ops& ops();

/// Scalar reference kernels (always available, used as the test oracle).
const Ops& scalar_ops();

/// AVX2 kernels, or nullptr when the build or CPU does not support them.
const Ops* avx2_ops();

/// Force a backend by name: "auto", "scalar" or "avx2".
/// Throws std::invalid_argument for unknown or unavailable backends.
void select_backend(std::string_view name);

std::string_view backend_name();

}  // namespace cdgcn::kernels
