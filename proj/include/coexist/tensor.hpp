#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace coexist::nn {

/// Row-major float32 array.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> d);
  Tensor(std::vector<std::size_t> d, std::vector<float> values);

  std::size_t numel() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return dims.size(); }
  std::size_t dim(std::size_t i) const { return dims.at(i); }

  float* ptr() noexcept { return data.data(); }
  const float* ptr() const noexcept { return data.data(); }

  /// Throws ShapeError if product(dims) != data.size().
  void validate(const std::string& name = "tensor") const;

  bool all_finite() const noexcept;

  bool operator==(const Tensor&) const = default;
};

std::size_t product(std::span<const std::size_t> dims);
std::string dims_to_string(std::span<const std::size_t> dims);

}  // namespace coexist::nn
