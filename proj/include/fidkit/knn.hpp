#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fidkit/tensor.hpp"

namespace fidkit {

struct NNConfig {
  std::size_t k = 1;
  // When true, query row i never matches reference row i (the sets are
  // taken to alias row-for-row). Exclusion is by row identity, not by
  // zero distance: duplicate points legitimately have distance 0.
  bool exclude_self = false;
};

struct NNResult {
  std::size_t query_count = 0;
  std::size_t k = 0;
  std::vector<std::int64_t> indices;  // query_count x k, row-major
  std::vector<double> distances;      // same shape, non-decreasing per row

  std::int64_t index(std::size_t q, std::size_t j) const {
    return indices[q * k + j];
  }
  double distance(std::size_t q, std::size_t j) const {
    return distances[q * k + j];
  }
};

// Squared L2 distance accumulated in float64 over four independent lanes:
// coordinate j feeds lane j%4 (tail coordinates continue the cycle from
// lane 0), lanes combine as (l0+l1)+(l2+l3). This is the fixed summation
// order every scan and oracle must share for bit-identical results.
double squared_l2(std::span<const float> a, std::span<const float> b);

// K smallest L2 distances to `query` among refs rows, ties broken toward
// the lowest reference index; `exclude_index` never appears.
std::pair<std::vector<std::int64_t>, std::vector<double>> top_k(
    std::span<const float> query, const TensorSet& refs, const NNConfig& cfg,
    std::optional<std::size_t> exclude_index = std::nullopt);

// top_k over every query row, parallelized over queries; output is
// identical for every thread count.
NNResult batch_nn(const TensorSet& queries, const TensorSet& refs,
                  const NNConfig& cfg);

}  // namespace fidkit
