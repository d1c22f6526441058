#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fidkit {

// N x D row-major float32 matrix with optional row identifiers.
// ids empty means the default labels "0".."N-1".
struct TensorSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;
  std::vector<std::string> ids;

  TensorSet() = default;
  TensorSet(std::size_t n, std::size_t d)
      : rows(n), cols(d), data(n * d, 0.0f) {}

  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const float> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<float> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  bool has_ids() const { return !ids.empty(); }
  std::string id(std::size_t r) const {
    return has_ids() ? ids[r] : std::to_string(r);
  }

  // Throws std::runtime_error on any invariant violation: empty shape,
  // mismatched data length, non-finite values, duplicate ids.
  void validate() const;
};

}  // namespace fidkit
