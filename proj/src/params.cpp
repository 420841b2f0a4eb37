#include "srl/params.hpp"

#include <cmath>
#include <stdexcept>

namespace srl::num {

Tensor& Params::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw std::invalid_argument("params: duplicate name " + name);
  index_.emplace(name, names_.size());
  names_.push_back(name);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

Tensor& Params::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("params: unknown name " + name);
  return tensors_[it->second];
}

const Tensor& Params::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("params: unknown name " + name);
  return tensors_[it->second];
}

std::vector<std::pair<std::string, Tensor>> Params::items() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(names_.size());
  for (size_t i = 0; i < names_.size(); ++i) out.emplace_back(names_[i], tensors_[i]);
  return out;
}

Tensor uniform(std::vector<Index> shape, double lo, double hi, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (Index i = 0; i < t.size(); ++i) t.array()(i) = dist(rng);
  return t;
}

Tensor xavier_uniform(std::vector<Index> shape, std::mt19937_64& rng) {
  if (shape.size() != 2) throw std::invalid_argument("xavier_uniform: rank 2 expected");
  const double a = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
  return uniform(std::move(shape), -a, a, rng);
}

Tensor orthogonal_blocks(Index rows, Index cols, std::mt19937_64& rng) {
  if (rows % cols != 0) throw std::invalid_argument("orthogonal_blocks: rows must be multiple of cols");
  Tensor t({rows, cols});
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index b = 0; b < rows / cols; ++b) {
    Eigen::MatrixXd g(cols, cols);
    for (Index i = 0; i < cols; ++i)
      for (Index j = 0; j < cols; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cols, cols);
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < cols; ++j)
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    t.mat().middleRows(b * cols, cols) = q;
  }
  return t;
}

}  // namespace srl::num
