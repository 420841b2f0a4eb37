#pragma once

#include "srl/tensor.hpp"

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace srl::num {

/// Named parameter tensors in a stable insertion order (serialization and
/// optimizer state rely on the ordering).
class Params {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Tensor& tensor(size_t i) { return tensors_[i]; }
  const Tensor& tensor(size_t i) const { return tensors_[i]; }

  std::vector<std::pair<std::string, Tensor>> items() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)) for an (out x in)
/// projection.
Tensor xavier_uniform(std::vector<Index> shape, std::mt19937_64& rng);

/// Stacked square orthogonal blocks for recurrent weights: rows must be a
/// multiple of cols; each cols x cols block is orthogonal.
Tensor orthogonal_blocks(Index rows, Index cols, std::mt19937_64& rng);

Tensor uniform(std::vector<Index> shape, double lo, double hi, std::mt19937_64& rng);

}  // namespace srl::num
