#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rbias {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

// Dense rank-2 tensor of doubles stored row-major. Vectors are 1 x n rows and
// scalars are 1 x 1, so a batch of inputs is simply a matrix with one example
// per row.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Eigen::Index rows, Eigen::Index cols) : values_(Matrix::Zero(rows, cols)) {}

  template <typename Derived>
  Tensor(const Eigen::MatrixBase<Derived>& values) : values_(values) {}  // NOLINT

  static Tensor scalar(double value) {
    Tensor t(1, 1);
    t.values_(0, 0) = value;
    return t;
  }

  static Tensor row(std::initializer_list<double> values) {
    Tensor t(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index j = 0;
    for (double v : values) t.values_(0, j++) = v;
    return t;
  }

  std::vector<std::size_t> shape() const {
    return {static_cast<std::size_t>(values_.rows()),
            static_cast<std::size_t>(values_.cols())};
  }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  bool empty() const { return values_.size() == 0; }

  std::span<const double> data() const { return {values_.data(), size()}; }

  const Matrix& matrix() const { return values_; }
  Matrix& matrix() { return values_; }

  double operator()(Eigen::Index r, Eigen::Index c) const { return values_(r, c); }
  double& operator()(Eigen::Index r, Eigen::Index c) { return values_(r, c); }

  double item() const { return values_(0, 0); }
  bool all_finite() const { return values_.allFinite(); }

  bool same_shape(const Tensor& other) const {
    return rows() == other.rows() && cols() == other.cols();
  }

 private:
  Matrix values_;
};

}  // namespace rbias
