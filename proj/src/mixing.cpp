#include "cdgcn/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cdgcn/kernels.hpp"

namespace cdgcn {

namespace {

std::string dim_text(const Tensor3& t) {
  return "(" + std::to_string(t.rows()) + "," + std::to_string(t.cols()) +
         "," + std::to_string(t.depth()) + ")";
}

void check_depth(const Tensor3& w, const MixingMatrix& m, const char* op) {
  if (w.depth() != m.dim()) {
    throw std::invalid_argument(std::string(op) + ": tensor depth " +
                                std::to_string(w.depth()) +
                                " does not match mixing matrix size " +
                                std::to_string(m.dim()));
  }
}

void copy_slice(double* dst, const double* src, std::size_t n) {
  std::memcpy(dst, src, n * sizeof(double));
}

}  // namespace

MixingMatrix::MixingMatrix(std::size_t dim, MixingKind kind,
                           std::size_t bandwidth, std::vector<double> entries,
                           bool lower_triangular)
    : dim_(dim),
      kind_(kind),
      bandwidth_(bandwidth),
      m_(std::move(entries)),
      lower_triangular_(lower_triangular) {}

MixingMatrix MixingMatrix::banded_mean(std::size_t dim, std::size_t bandwidth) {
  if (dim == 0) throw std::invalid_argument("banded_mean: size must be >= 1");
  if (bandwidth == 0) {
    throw std::invalid_argument("banded_mean: bandwidth must be >= 1");
  }
  std::vector<double> m(dim * dim, 0.0);
  for (std::size_t t = 0; t < dim; ++t) {
    const std::size_t count = std::min(bandwidth, t + 1);
    const double v = 1.0 / static_cast<double>(count);
    for (std::size_t k = t + 1 - count; k <= t; ++k) m[t * dim + k] = v;
  }
  return MixingMatrix(dim, MixingKind::banded_mean, bandwidth, std::move(m),
                      true);
}

MixingMatrix MixingMatrix::identity(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("identity: size must be >= 1");
  std::vector<double> m(dim * dim, 0.0);
  for (std::size_t t = 0; t < dim; ++t) m[t * dim + t] = 1.0;
  return MixingMatrix(dim, MixingKind::identity, 1, std::move(m), true);
}

MixingMatrix MixingMatrix::dft(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("dft: size must be >= 1");
  std::vector<double> m(dim * dim);
  const double n = static_cast<double>(dim);
  for (std::size_t t = 0; t < dim; ++t) {
    const double c = t == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t k = 0; k < dim; ++k) {
      m[t * dim + k] =
          c * std::cos(std::numbers::pi * (2.0 * k + 1.0) * t / (2.0 * n));
    }
  }
  MixingMatrix out(dim, MixingKind::dft, 0, std::move(m), false);
  out.factorize();
  return out;
}

MixingMatrix MixingMatrix::custom(std::size_t dim,
                                  std::vector<double> entries) {
  if (dim == 0) throw std::invalid_argument("custom: size must be >= 1");
  if (entries.size() != dim * dim) {
    throw std::invalid_argument("custom: expected " +
                                std::to_string(dim * dim) + " entries, got " +
                                std::to_string(entries.size()));
  }
  MixingMatrix out(dim, MixingKind::custom, 0, std::move(entries), false);
  out.factorize();
  return out;
}

std::size_t MixingMatrix::row_begin(std::size_t row) const {
  switch (kind_) {
    case MixingKind::banded_mean:
      return row + 1 - std::min(bandwidth_, row + 1);
    case MixingKind::identity:
      return row;
    default:
      return 0;
  }
}

void MixingMatrix::factorize() {
  const std::size_t n = dim_;
  lu_ = m_;
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

  double max_abs = 0.0;
  for (double v : m_) max_abs = std::max(max_abs, std::fabs(v));
  const double tol = max_abs * 1e-12;

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    double best = std::fabs(lu_[c * n + c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double v = std::fabs(lu_[r * n + c]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > tol)) {
      throw std::invalid_argument("mixing matrix is singular (pivot " +
                                  std::to_string(c) + ")");
    }
    if (pivot != c) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(lu_[c * n + j], lu_[pivot * n + j]);
      }
      std::swap(perm_[c], perm_[pivot]);
    }
    const double inv = 1.0 / lu_[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = lu_[r * n + c] * inv;
      lu_[r * n + c] = f;
      if (f == 0.0) continue;
      for (std::size_t j = c + 1; j < n; ++j) {
        lu_[r * n + j] -= f * lu_[c * n + j];
      }
    }
  }
}

Tensor3 m_transform(const Tensor3& w, const MixingMatrix& m) {
  check_depth(w, m, "m_transform");
  const std::size_t ss = w.slice_size();
  const std::size_t n = m.dim();
  Tensor3 out(w.rows(), w.cols(), w.depth());
  for (std::size_t t = 0; t < n; ++t) {
    double* o = out.slice(t);
    const std::size_t k0 = m.lower_triangular() ? m.row_begin(t) : 0;
    const std::size_t k1 = m.lower_triangular() ? t : n - 1;
    for (std::size_t k = k0; k <= k1; ++k) {
      const double coef = m.entry(t, k);
      if (coef != 0.0) kernels::ops().axpy(o, coef, w.slice(k), ss);
    }
  }
  return out;
}

Tensor3 m_transform_transpose(const Tensor3& w, const MixingMatrix& m) {
  check_depth(w, m, "m_transform_transpose");
  const std::size_t ss = w.slice_size();
  const std::size_t n = m.dim();
  Tensor3 out(w.rows(), w.cols(), w.depth());
  for (std::size_t t = 0; t < n; ++t) {
    double* o = out.slice(t);
    // column t of M, i.e. rows k whose band reaches t
    std::size_t k0 = t, k1 = n - 1;
    if (!m.lower_triangular()) {
      k0 = 0;
    } else if (m.bandwidth() > 0) {
      k1 = std::min(n - 1, t + m.bandwidth() - 1);
    }
    for (std::size_t k = k0; k <= k1; ++k) {
      const double coef = m.entry(k, t);
      if (coef != 0.0) kernels::ops().axpy(o, coef, w.slice(k), ss);
    }
  }
  return out;
}

Tensor3 m_transform_inverse(const Tensor3& w, const MixingMatrix& m) {
  check_depth(w, m, "m_transform_inverse");
  const std::size_t ss = w.slice_size();
  const std::size_t n = m.dim();
  Tensor3 out(w.rows(), w.cols(), w.depth());

  if (m.lower_triangular()) {
    // Forward substitution over frontal slices.
    for (std::size_t t = 0; t < n; ++t) {
      double* o = out.slice(t);
      copy_slice(o, w.slice(t), ss);
      for (std::size_t k = m.row_begin(t); k < t; ++k) {
        const double coef = m.entry(t, k);
        if (coef != 0.0) kernels::ops().axpy(o, -coef, out.slice(k), ss);
      }
      const double d = m.entry(t, t);
      if (d != 1.0) kernels::ops().scale(o, 1.0 / d, ss);
    }
    return out;
  }

  // PM = LU; solve LU X = P W.
  const auto& lu = m.lu();
  const auto& perm = m.perm();
  for (std::size_t r = 0; r < n; ++r) {
    copy_slice(out.slice(r), w.slice(perm[r]), ss);
  }
  for (std::size_t t = 1; t < n; ++t) {
    double* o = out.slice(t);
    for (std::size_t k = 0; k < t; ++k) {
      const double coef = lu[t * n + k];
      if (coef != 0.0) kernels::ops().axpy(o, -coef, out.slice(k), ss);
    }
  }
  for (std::size_t ti = n; ti-- > 0;) {
    double* o = out.slice(ti);
    for (std::size_t k = ti + 1; k < n; ++k) {
      const double coef = lu[ti * n + k];
      if (coef != 0.0) kernels::ops().axpy(o, -coef, out.slice(k), ss);
    }
    kernels::ops().scale(o, 1.0 / lu[ti * n + ti], ss);
  }
  return out;
}

Tensor3 m_transform_inverse_transpose(const Tensor3& w,
                                      const MixingMatrix& m) {
  check_depth(w, m, "m_transform_inverse_transpose");
  const std::size_t ss = w.slice_size();
  const std::size_t n = m.dim();
  Tensor3 out(w.rows(), w.cols(), w.depth());

  if (m.lower_triangular()) {
    // M^T is upper triangular: back substitution over slices.
    for (std::size_t ti = n; ti-- > 0;) {
      double* o = out.slice(ti);
      copy_slice(o, w.slice(ti), ss);
      std::size_t k1 = n - 1;
      if (m.bandwidth() > 0) k1 = std::min(n - 1, ti + m.bandwidth() - 1);
      for (std::size_t k = ti + 1; k <= k1 && k < n; ++k) {
        const double coef = m.entry(k, ti);
        if (coef != 0.0) kernels::ops().axpy(o, -coef, out.slice(k), ss);
      }
      const double d = m.entry(ti, ti);
      if (d != 1.0) kernels::ops().scale(o, 1.0 / d, ss);
    }
    return out;
  }

  // M^T = U^T L^T P. Solve U^T z = w, then L^T y = z, then x = P^T y.
  const auto& lu = m.lu();
  const auto& perm = m.perm();
  Tensor3 y(w.rows(), w.cols(), w.depth());
  for (std::size_t t = 0; t < n; ++t) {
    double* o = y.slice(t);
    copy_slice(o, w.slice(t), ss);
    for (std::size_t k = 0; k < t; ++k) {
      const double coef = lu[k * n + t];  // U(k, t)
      if (coef != 0.0) kernels::ops().axpy(o, -coef, y.slice(k), ss);
    }
    kernels::ops().scale(o, 1.0 / lu[t * n + t], ss);
  }
  for (std::size_t ti = n; ti-- > 0;) {
    double* o = y.slice(ti);
    for (std::size_t k = ti + 1; k < n; ++k) {
      const double coef = lu[k * n + ti];  // L(k, ti)
      if (coef != 0.0) kernels::ops().axpy(o, -coef, y.slice(k), ss);
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    copy_slice(out.slice(perm[r]), y.slice(r), ss);
  }
  return out;
}

Tensor3 facewise_product(const Tensor3& w, const Tensor3& y) {
  if (w.cols() != y.rows()) {
    throw std::invalid_argument("facewise_product: inner dimensions " +
                                dim_text(w) + " x " + dim_text(y) +
                                " do not match");
  }
  if (w.depth() != y.depth()) {
    throw std::invalid_argument("facewise_product: depth mismatch " +
                                dim_text(w) + " x " + dim_text(y));
  }
  const std::size_t rows = w.rows();
  const std::size_t inner = w.cols();
  const std::size_t cols = y.cols();
  Tensor3 out(rows, cols, w.depth());
  for (std::size_t k = 0; k < w.depth(); ++k) {
    const double* a = w.slice(k);
    const double* b = y.slice(k);
    double* c = out.slice(k);
    for (std::size_t q = 0; q < cols; ++q) {
      double* ccol = c + q * rows;
      for (std::size_t r = 0; r < inner; ++r) {
        kernels::ops().axpy(ccol, b[q * inner + r], a + r * rows, rows);
      }
    }
  }
  return out;
}

Tensor3 m_product(const Tensor3& w, const Tensor3& y, const MixingMatrix& m) {
  check_depth(w, m, "m_product");
  check_depth(y, m, "m_product");
  if (w.cols() != y.rows()) {
    throw std::invalid_argument("m_product: inner dimensions " + dim_text(w) +
                                " x " + dim_text(y) + " do not match");
  }
  return m_transform_inverse(
      facewise_product(m_transform(w, m), m_transform(y, m)), m);
}

}  // namespace cdgcn
