#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fidkit/diffusion.hpp"
#include "fidkit/tensor.hpp"

namespace fidkit {

// Isotropic Gaussian mixture: M modes in D dims with shared scalar std.
struct GmmSpec {
  std::size_t modes = 0;
  std::size_t dim = 0;
  std::vector<double> centers;  // modes x dim, row-major
  double std = 1.0;
  std::vector<double> weights;  // sums to 1

  void validate() const;
  std::span<const double> center(std::size_t m) const {
    return {centers.data() + m * dim, dim};
  }
};

// side^2 modes on a {0, spacing, ...}^2 grid centered at the origin,
// uniform weights.
GmmSpec make_grid_gmm(std::size_t side, double spacing, double std);

// Two modes at (+c, 0) and (-c, 0).
GmmSpec make_two_mode_gmm(double c, double std);

// The toy presets: grid25 (side 5, spacing 1; isolated std 0.05,
// connected std 0.25) and two_mode (centers at (+-2, 0); isolated std 0.1,
// connected std 1.0).
struct ToyPreset {
  std::string name;
  GmmSpec isolated;
  GmmSpec connected;
};
ToyPreset toy_preset(const std::string& name);

// Seeded categorical mode draw, then the Gaussian draw; deterministic
// per (spec, n, seed).
TensorSet sample_gmm(const GmmSpec& spec, std::size_t n, std::uint64_t seed);

// Log mixture density via log-sum-exp.
double gmm_logpdf(const GmmSpec& spec, std::span<const double> x);
double gmm_logpdf(const GmmSpec& spec, std::span<const float> x);

// Threshold tau = the `quantile` empirical quantile of gmm_logpdf over
// the reference rows; returns the fraction of samples with logpdf < tau.
double hallucination_rate(const TensorSet& samples, const GmmSpec& spec,
                          const TensorSet& reference, double quantile = 1e-3);

struct DilemmaConfig {
  std::string preset = "grid25";
  double bandwidth = 0.3;
  std::uint64_t seed = 1;
  SamplerConfig sampler;          // t_start=1, steps=100, deterministic
  std::size_t replicates = 40;    // interpolation replicate draws
  std::size_t n_train = 400;      // score-model train set
  std::size_t n_chains = 800;     // sampler chains
  std::size_t n_ref = 2000;       // fresh true samples / tau reference
  double quantile = 1e-3;
};

struct DilemmaVariant {
  double ifid = 0.0;      // identity-feature fid in mode-std units
  double ifid_raw = 0.0;  // the same fid on raw coordinates
  double hall_rate = 0.0;
  TensorSet train;
  TensorSet interpolated;
  TensorSet generated;
};

struct DilemmaResult {
  DilemmaVariant isolated;
  DilemmaVariant connected;
  bool ifid_ordered = false;  // isolated.ifid > connected.ifid
  bool hall_ordered = false;  // isolated.hall_rate > connected.hall_rate
};

// Per variant: stratified interpolation replicates (one latent per mode,
// nearest-neighbor partner within the replicate, midpoint), fid of the
// midpoints against fresh true samples, then the smoothed-score sampler
// from t=1 and the hallucination rate of its outputs.
//
// The reported ifid divides the raw identity-feature fid by std^2 —
// i.e. it measures the interpolated set in mode-std units (a gain-1/std
// linear decode). On raw coordinates the global moments cannot see how
// many stds an off-manifold midpoint is from its mode, which is the
// property that separates the isolated and connected variants.
DilemmaResult run_dilemma_experiment(const DilemmaConfig& cfg);

}  // namespace fidkit
