#include "srl/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace srl::num {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'C', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("tensor container: truncated file");
  return v;
}

}  // namespace

void write_tensor_container(const std::string& path, const std::string& meta,
                            const std::vector<std::pair<std::string, Tensor>>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("tensor container: cannot open for writing: " + path);
  os.write(kMagic, 4);
  put<uint32_t>(os, kVersion);
  put<uint64_t>(os, meta.size());
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put<uint64_t>(os, tensors.size());
  for (const auto& [name, t] : tensors) {
    put<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<uint32_t>(os, static_cast<uint32_t>(t.rank()));
    for (Index d : t.shape()) put<uint64_t>(os, static_cast<uint64_t>(d));
    os.write(reinterpret_cast<const char*>(t.array().data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(t.size())));
  }
  if (!os) throw std::runtime_error("tensor container: write failed: " + path);
}

TensorContainer read_tensor_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("tensor container: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("tensor container: bad magic: " + path);
  const uint32_t version = get<uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("tensor container: unsupported version " + std::to_string(version));
  TensorContainer out;
  const uint64_t meta_len = get<uint64_t>(is);
  out.meta.resize(meta_len);
  is.read(out.meta.data(), static_cast<std::streamsize>(meta_len));
  const uint64_t count = get<uint64_t>(is);
  for (uint64_t i = 0; i < count; ++i) {
    const uint32_t name_len = get<uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const uint32_t rank = get<uint32_t>(is);
    std::vector<Index> shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<Index>(get<uint64_t>(is)));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.array().data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(t.size())));
    if (!is) throw std::runtime_error("tensor container: truncated payload: " + path);
    out.tensors.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

}  // namespace srl::num
