#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace srl::num {

using Index = Eigen::Index;
using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<MatrixRM>;
using CMatMap = Eigen::Map<const MatrixRM>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

/// Dense tensor of doubles: a shape list over a row-major flat buffer.
/// Rank 1 values act as column vectors wherever a matrix is expected.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<Index> shape)
      : shape_(std::move(shape)), data_(Eigen::ArrayXd::Zero(count(shape_))) {}
  Tensor(std::vector<Index> shape, Eigen::ArrayXd data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) throw std::invalid_argument("tensor: shape/data size mismatch");
  }

  static Tensor zeros(std::vector<Index> shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(double v) {
    Tensor t({1, 1});
    t.data_(0) = v;
    return t;
  }
  static Tensor from_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    Tensor t({m.rows(), m.cols()});
    t.mat() = m;
    return t;
  }
  static Tensor from_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Tensor t({v.size(), 1});
    t.vec() = v;
    return t;
  }

  const std::vector<Index>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  Index size() const { return data_.size(); }
  Index dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

  /// Rows/cols of the matrix view (rank 1 -> column vector, rank 2 -> as is).
  Index rows() const {
    if (rank() == 1) return shape_[0];
    if (rank() == 2) return shape_[0];
    throw std::invalid_argument("tensor: matrix view needs rank 1 or 2");
  }
  Index cols() const {
    if (rank() == 1) return 1;
    if (rank() == 2) return shape_[1];
    throw std::invalid_argument("tensor: matrix view needs rank 1 or 2");
  }

  MatMap mat() { return MatMap(data_.data(), rows(), cols()); }
  CMatMap mat() const { return CMatMap(data_.data(), rows(), cols()); }
  VecMap vec() { return VecMap(data_.data(), data_.size()); }
  CVecMap vec() const { return CVecMap(data_.data(), data_.size()); }

  Eigen::ArrayXd& array() { return data_; }
  const Eigen::ArrayXd& array() const { return data_; }

  double& at(Index i, Index j) { return data_(i * cols() + j); }
  double at(Index i, Index j) const { return data_(i * cols() + j); }
  double& at3(Index i, Index j, Index k) { return data_((i * shape_[1] + j) * shape_[2] + k); }
  double at3(Index i, Index j, Index k) const { return data_((i * shape_[1] + j) * shape_[2] + k); }

  /// Contiguous matrix view of slice i of a rank-3 tensor.
  MatMap slice(Index i) {
    return MatMap(data_.data() + i * shape_[1] * shape_[2], shape_[1], shape_[2]);
  }
  CMatMap slice(Index i) const {
    return CMatMap(data_.data() + i * shape_[1] * shape_[2], shape_[1], shape_[2]);
  }

  double value() const {
    if (size() != 1) throw std::invalid_argument("tensor: not a scalar");
    return data_(0);
  }

  bool all_finite() const { return data_.isFinite().all(); }
  void set_zero() { data_.setZero(); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) s += (i ? "," : "") + std::to_string(shape_[i]);
    return s + "]";
  }

  static Index count(const std::vector<Index>& shape) {
    Index n = 1;
    for (Index d : shape) {
      if (d < 0) throw std::invalid_argument("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<Index> shape_;
  Eigen::ArrayXd data_;
};

}  // namespace srl::num
