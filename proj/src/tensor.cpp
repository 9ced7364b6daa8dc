#include "coexist/tensor.hpp"

#include <cmath>

#include "coexist/errors.hpp"

namespace coexist::nn {

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

std::string dims_to_string(std::span<const std::size_t> dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> d) : dims(std::move(d)), data(product(dims), 0.0f) {}

Tensor::Tensor(std::vector<std::size_t> d, std::vector<float> values)
    : dims(std::move(d)), data(std::move(values)) {
  validate();
}

void Tensor::validate(const std::string& name) const {
  if (product(dims) != data.size()) {
    throw ShapeError(name + ": dims " + dims_to_string(dims) + " imply " + std::to_string(product(dims)) +
                     " values, have " + std::to_string(data.size()));
  }
}

bool Tensor::all_finite() const noexcept {
  for (float v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace coexist::nn
