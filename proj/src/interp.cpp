#include "fidkit/interp.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fidkit/parallel.hpp"
#include "fidkit/rng.hpp"

namespace fidkit {

namespace {

void check_dims(std::span<const float> z1, std::span<const float> z2) {
  if (z1.size() != z2.size())
    throw std::runtime_error("interp dim mismatch: " +
                             std::to_string(z1.size()) + " vs " +
                             std::to_string(z2.size()));
}

std::vector<double> copy_of(std::span<const float> z) {
  return std::vector<double>(z.begin(), z.end());
}

}  // namespace

InterpMethod interp_method_from(const std::string& name) {
  if (name == "linear") return InterpMethod::linear;
  if (name == "spherical") return InterpMethod::spherical;
  if (name == "mask") return InterpMethod::mask;
  throw std::runtime_error("unknown interpolation method \"" + name + "\"");
}

std::string to_string(InterpMethod m) {
  switch (m) {
    case InterpMethod::linear: return "linear";
    case InterpMethod::spherical: return "spherical";
    case InterpMethod::mask: return "mask";
  }
  return "?";
}

std::vector<double> lerp(std::span<const float> z1, std::span<const float> z2,
                         double alpha) {
  check_dims(z1, z2);
  if (alpha == 0.0) return copy_of(z1);
  if (alpha == 1.0) return copy_of(z2);
  std::vector<double> out(z1.size());
  for (std::size_t j = 0; j < z1.size(); ++j)
    out[j] = (1.0 - alpha) * double(z1[j]) + alpha * double(z2[j]);
  return out;
}

std::vector<double> slerp(std::span<const float> z1, std::span<const float> z2,
                          double alpha) {
  check_dims(z1, z2);
  if (alpha == 0.0) return copy_of(z1);
  if (alpha == 1.0) return copy_of(z2);
  double n1 = 0.0, n2 = 0.0, dot = 0.0;
  for (std::size_t j = 0; j < z1.size(); ++j) {
    n1 += double(z1[j]) * double(z1[j]);
    n2 += double(z2[j]) * double(z2[j]);
    dot += double(z1[j]) * double(z2[j]);
  }
  n1 = std::sqrt(n1);
  n2 = std::sqrt(n2);
  if (n1 == 0.0 || n2 == 0.0)
    throw std::runtime_error("slerp requires nonzero-norm inputs");
  const double cosang = std::clamp(dot / (n1 * n2), -1.0, 1.0);
  const double theta = std::acos(cosang);
  if (theta < 1e-6) return lerp(z1, z2, alpha);
  if (theta > std::numbers::pi - 1e-6)
    throw std::runtime_error("undefined spherical path (antipodal inputs)");
  const double s = std::sin(theta);
  const double w1 = std::sin((1.0 - alpha) * theta) / s;
  const double w2 = std::sin(alpha * theta) / s;
  std::vector<double> out(z1.size());
  for (std::size_t j = 0; j < z1.size(); ++j)
    out[j] = w1 * double(z1[j]) + w2 * double(z2[j]);
  return out;
}

std::vector<double> mask_interp(std::span<const float> z1,
                                std::span<const float> z2, double alpha,
                                std::uint64_t seed, std::uint64_t row) {
  check_dims(z1, z2);
  if (alpha == 0.0) return copy_of(z1);
  if (alpha == 1.0) return copy_of(z2);
  const rng::Stream stream(seed, "mask", row);
  std::vector<double> out(z1.size());
  for (std::size_t j = 0; j < z1.size(); ++j)
    out[j] = stream.uniform(j) < alpha ? double(z2[j]) : double(z1[j]);
  return out;
}

TensorSet interpolate_set(const TensorSet& latents, const TensorSet& partners,
                          const NNResult& nn, const InterpConfig& cfg) {
  if (latents.cols != partners.cols)
    throw std::runtime_error("latent dim " + std::to_string(latents.cols) +
                             " != partner dim " +
                             std::to_string(partners.cols));
  if (nn.query_count != latents.rows)
    throw std::runtime_error("NN query count " +
                             std::to_string(nn.query_count) + " != latent rows " +
                             std::to_string(latents.rows));
  if (cfg.k_select < 1 || cfg.k_select > nn.k)
    throw std::runtime_error("k_select " + std::to_string(cfg.k_select) +
                             " out of range for k=" + std::to_string(nn.k));
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw std::runtime_error("alpha must be in [0,1]");
  TensorSet out(latents.rows, latents.cols);
  out.ids = latents.ids;
  std::string error;  // lowest-row failure, reported with its row index
  std::size_t error_row = SIZE_MAX;
  std::mutex error_mu;
  par::parallel_for(latents.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        std::size_t u = 0;
        if (cfg.k_select > 1)
          u = rng::Stream(cfg.seed, "ksel", i).below(0, cfg.k_select);
        const auto pi = nn.index(i, u);
        if (pi < 0 || static_cast<std::size_t>(pi) >= partners.rows)
          throw std::runtime_error("partner index " + std::to_string(pi) +
                                   " out of range");
        const auto partner = partners.row(static_cast<std::size_t>(pi));
        std::vector<double> v;
        switch (cfg.method) {
          case InterpMethod::linear:
            v = lerp(latents.row(i), partner, cfg.alpha);
            break;
          case InterpMethod::spherical:
            v = slerp(latents.row(i), partner, cfg.alpha);
            break;
          case InterpMethod::mask:
            v = mask_interp(latents.row(i), partner, cfg.alpha,
                            cfg.seed, i);
            break;
        }
        for (std::size_t j = 0; j < out.cols; ++j)
          out.at(i, j) = static_cast<float>(v[j]);
      } catch (const std::exception& e) {
        const std::scoped_lock lock(error_mu);
        if (i < error_row) {
          error_row = i;
          error = "row " + std::to_string(i) + ": " + e.what();
        }
      }
    }
  });
  if (!error.empty()) throw std::runtime_error(error);
  return out;
}

TensorSet interpolate_set(const TensorSet& latents, const NNResult& nn,
                          const InterpConfig& cfg) {
  return interpolate_set(latents, latents, nn, cfg);
}

}  // namespace fidkit

