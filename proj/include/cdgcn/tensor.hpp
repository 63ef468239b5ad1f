#pragma once

#include <cstddef>
#include <vector>

namespace cdgcn {

/// Dense third-order tensor of doubles.
///
/// The frontal slice k (the rows x cols matrix at third index k) is stored
/// contiguously, column-major inside the slice:
///   index(i, j, k) = (k * cols + j) * rows + i.
/// Slice contiguity is what the mode-3 transforms and the facewise product
/// rely on; all heavy loops reduce to kernel calls over slices or slice
/// columns.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t rows, std::size_t cols, std::size_t depth,
          double fill = 0.0)
      : rows_(rows),
        cols_(cols),
        depth_(depth),
        data_(rows * cols * depth, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t depth() const { return depth_; }
  std::size_t size() const { return data_.size(); }
  std::size_t slice_size() const { return rows_ * cols_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(k * cols_ + j) * rows_ + i];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(k * cols_ + j) * rows_ + i];
  }

  double* slice(std::size_t k) { return data_.data() + k * slice_size(); }
  const double* slice(std::size_t k) const {
    return data_.data() + k * slice_size();
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_dims(const Tensor3& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && depth_ == o.depth_;
  }

  bool all_finite() const;

  /// this += a * x (dimensions must match).
  Tensor3& add_scaled(const Tensor3& x, double a);
  Tensor3& scale(double a);

 private:
  std::size_t rows_ = 0, cols_ = 0, depth_ = 0;
  std::vector<double> data_;
};

/// sqrt of the sum of squared entries.
double frobenius_norm(const Tensor3& w);

}  // namespace cdgcn
