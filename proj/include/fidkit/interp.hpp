#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fidkit/knn.hpp"
#include "fidkit/tensor.hpp"

namespace fidkit {

enum class InterpMethod { linear, spherical, mask };

InterpMethod interp_method_from(const std::string& name);
std::string to_string(InterpMethod m);

struct InterpConfig {
  InterpMethod method = InterpMethod::linear;
  double alpha = 0.5;
  std::uint64_t seed = 0;       // mask draws and top-K partner selection
  std::size_t k_select = 1;
};

// (1-alpha)*z1 + alpha*z2. alpha in {0,1} returns the endpoint bit-exactly.
std::vector<double> lerp(std::span<const float> z1, std::span<const float> z2,
                         double alpha);

// Great-circle interpolation about the origin; angle below 1e-6 falls back
// to lerp, within 1e-6 of pi (antipodal) is an error.
std::vector<double> slerp(std::span<const float> z1, std::span<const float> z2,
                          double alpha);

// Per-coordinate Bernoulli(alpha) mask keyed by (seed, row): coordinate j
// takes z2[j] where the mask fires, else z1[j].
std::vector<double> mask_interp(std::span<const float> z1,
                                std::span<const float> z2, double alpha,
                                std::uint64_t seed, std::uint64_t row = 0);

// Row i pairs with partners.row(nn.indices[i][u]), u drawn uniformly from
// [0, k_select) by the seeded generator (u = 0 when k_select == 1); ids
// preserved. The three-argument form takes partners from latents itself.
TensorSet interpolate_set(const TensorSet& latents, const TensorSet& partners,
                          const NNResult& nn, const InterpConfig& cfg);
TensorSet interpolate_set(const TensorSet& latents, const NNResult& nn,
                          const InterpConfig& cfg);

}  // namespace fidkit
