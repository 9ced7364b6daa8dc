#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coexist/tensor.hpp"

namespace coexist::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;

  bool operator==(const NamedTensor&) const = default;
};

using ArchHash = std::array<std::uint8_t, 32>;

/// Contents of a .cnw container (weights, or golden activations, which
/// share the layout).
struct TensorFile {
  ArchHash arch_hash{};
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
  bool operator==(const TensorFile&) const = default;
};

std::string encode_tensor_file(const TensorFile& f);
TensorFile decode_tensor_file(const std::string& bytes, const std::string& what = "cnw");

void write_tensor_file(const TensorFile& f, const std::string& path);
TensorFile read_tensor_file(const std::string& path);

}  // namespace coexist::nn
