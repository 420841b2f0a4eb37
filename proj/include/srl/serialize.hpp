#pragma once

#include "srl/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace srl::num {

/// Flat binary container of named tensors, little-endian:
///   magic "NTC1" | u32 version (=1) | u64 meta_len | meta bytes |
///   u64 count | count * entry
/// entry: u32 name_len | name bytes | u32 rank | u64 dims[rank] |
///        f64 payload (row-major)
/// The meta field carries an arbitrary UTF-8 string (typically JSON).
void write_tensor_container(const std::string& path, const std::string& meta,
                            const std::vector<std::pair<std::string, Tensor>>& tensors);

struct TensorContainer {
  std::string meta;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

TensorContainer read_tensor_container(const std::string& path);

}  // namespace srl::num
