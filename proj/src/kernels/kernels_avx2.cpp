// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma on x86-64 only; dispatch.cpp decides at startup whether the
// running CPU may use it. Lane accumulation order is fixed, so every kernel
// is deterministic for a given input.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>

#include "cdgcn/kernels.hpp"

namespace cdgcn::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Four mask bytes widened to an all-ones/all-zeros double lane mask.
inline __m256d mask_lanes(const std::uint8_t* m) {
  std::int32_t packed;
  std::memcpy(&packed, m, 4);
  __m128i bytes = _mm_cvtsi32_si128(packed);
  __m256i wide = _mm256_cvtepu8_epi64(bytes);
  return _mm256_castsi256_pd(
      _mm256_cmpgt_epi64(wide, _mm256_setzero_si256()));
}

const __m256d kSignMask = _mm256_set1_pd(-0.0);

}  // namespace

void axpy(double* y, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double* y, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
  }
  for (; i < n; ++i) y[i] *= a;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

void relu(double* out, const double* z, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(z + i), zero));
  }
  for (; i < n; ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_gate(double* g, const double* z, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d open = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), open));
  }
  for (; i < n; ++i) {
    if (!(z[i] > 0.0)) g[i] = 0.0;
  }
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(kSignMask, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double huber_masked(const double* pred, const double* target,
                    const std::uint8_t* mask, double delta, double* grad,
                    std::size_t n) {
  const __m256d vdelta = _mm256_set1_pd(delta);
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vhalf_delta = _mm256_set1_pd(0.5 * delta);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d lanes = mask_lanes(mask + i);
    __m256d r =
        _mm256_sub_pd(_mm256_loadu_pd(pred + i), _mm256_loadu_pd(target + i));
    __m256d ar = _mm256_andnot_pd(kSignMask, r);
    __m256d quad = _mm256_cmp_pd(ar, vdelta, _CMP_LE_OQ);
    __m256d quad_loss = _mm256_mul_pd(vhalf, _mm256_mul_pd(r, r));
    __m256d lin_loss =
        _mm256_mul_pd(vdelta, _mm256_sub_pd(ar, vhalf_delta));
    __m256d lin_grad =
        _mm256_or_pd(_mm256_and_pd(r, kSignMask), vdelta);  // copysign
    __m256d loss = _mm256_blendv_pd(lin_loss, quad_loss, quad);
    __m256d g = _mm256_blendv_pd(lin_grad, r, quad);
    acc = _mm256_add_pd(acc, _mm256_and_pd(loss, lanes));
    _mm256_storeu_pd(grad + i, _mm256_and_pd(g, lanes));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
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
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    d = _mm256_and_pd(d, mask_lanes(mask + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    if (mask[i]) {
      const double d = a[i] - b[i];
      s += d * d;
    }
  }
  return s;
}

double masked_sq_sum(const double* a, const std::uint8_t* mask,
                     std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_and_pd(_mm256_loadu_pd(a + i), mask_lanes(mask + i));
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    if (mask[i]) s += a[i] * a[i];
  }
  return s;
}

}  // namespace cdgcn::kernels::avx2

namespace cdgcn::kernels {

const Ops* avx2_table() {
  static const Ops table{
      "avx2",
      avx2::axpy,
      avx2::scale,
      avx2::dot,
      avx2::sum_sq,
      avx2::relu,
      avx2::relu_gate,
      avx2::abs_diff_sum,
      avx2::huber_masked,
      avx2::masked_sq_diff_sum,
      avx2::masked_sq_sum,
  };
  return &table;
}

}  // namespace cdgcn::kernels
