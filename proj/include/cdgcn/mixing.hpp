#pragma once

#include <cstddef>
#include <vector>

#include "cdgcn/tensor.hpp"

namespace cdgcn {

enum class MixingKind { banded_mean, identity, dft, custom };

/// Invertible T x T mixing matrix that defines the mode-3 transform.
///
/// The banded_mean kind averages, per row t, the min(b, t+1) most recent
/// time steps, so it is lower triangular with a strictly positive diagonal.
/// Triangular kinds are inverted by substitution over frontal slices; the
/// dft and custom kinds carry an LU factorization (partial pivoting) built
/// at construction time. The inverse matrix itself is never formed.
class MixingMatrix {
 public:
  static MixingMatrix banded_mean(std::size_t dim, std::size_t bandwidth);
  static MixingMatrix identity(std::size_t dim);
  /// Real orthogonal cosine-transform matrix. Provided as a constructor
  /// only; there is no fast-transform path.
  static MixingMatrix dft(std::size_t dim);
  /// Arbitrary invertible matrix, row-major entries of length dim*dim.
  /// Throws std::invalid_argument when the matrix is singular.
  static MixingMatrix custom(std::size_t dim, std::vector<double> entries);

  std::size_t dim() const { return dim_; }
  MixingKind kind() const { return kind_; }
  std::size_t bandwidth() const { return bandwidth_; }
  bool lower_triangular() const { return lower_triangular_; }

  double entry(std::size_t row, std::size_t col) const {
    return m_[row * dim_ + col];
  }

  /// First column with a nonzero entry in the given row (triangular kinds).
  std::size_t row_begin(std::size_t row) const;

  // Internals used by the mode-3 solves.
  const std::vector<double>& lu() const { return lu_; }
  const std::vector<std::size_t>& perm() const { return perm_; }

 private:
  MixingMatrix(std::size_t dim, MixingKind kind, std::size_t bandwidth,
               std::vector<double> entries, bool lower_triangular);
  void factorize();

  std::size_t dim_ = 0;
  MixingKind kind_ = MixingKind::identity;
  std::size_t bandwidth_ = 0;
  std::vector<double> m_;
  bool lower_triangular_ = false;
  std::vector<double> lu_;          // combined L (unit diag) and U, row-major
  std::vector<std::size_t> perm_;   // row permutation: (PM)[r] = M[perm[r]]
};

/// Mode-3 product W x3 M: out(i,j,t) = sum_k M(t,k) W(i,j,k).
Tensor3 m_transform(const Tensor3& w, const MixingMatrix& m);

/// Mode-3 product with the inverse, W x3 M^-1, via substitution/LU solve.
Tensor3 m_transform_inverse(const Tensor3& w, const MixingMatrix& m);

/// Mode-3 product with the transpose, W x3 M^T.
Tensor3 m_transform_transpose(const Tensor3& w, const MixingMatrix& m);

/// Mode-3 product with the inverse transpose, W x3 M^-T.
Tensor3 m_transform_inverse_transpose(const Tensor3& w, const MixingMatrix& m);

/// Slice-wise matrix product: out slice k = W slice k times Y slice k.
Tensor3 facewise_product(const Tensor3& w, const Tensor3& y);

/// ((W x3 M) facewise (Y x3 M)) x3 M^-1.
Tensor3 m_product(const Tensor3& w, const Tensor3& y, const MixingMatrix& m);

}  // namespace cdgcn
