#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fidkit/tensor.hpp"

namespace fidkit {

enum class ScheduleKind { rectified_flow, vp_cosine };

ScheduleKind schedule_from(const std::string& name);
std::string to_string(ScheduleKind k);

// alpha/sigma pair on t in [0,1]: rectified_flow has alpha=1-t, sigma=t;
// vp_cosine has alpha=cos(pi*t/2), sigma=sin(pi*t/2).
struct DiffusionSchedule {
  ScheduleKind kind = ScheduleKind::rectified_flow;
  double alpha(double t) const;
  double sigma(double t) const;
};

struct ScoreConfig {
  const TensorSet* train_set = nullptr;  // the z^(1:M) support
  // Smoothing added to sigma_t^2 — an underfitting surrogate for a learned
  // score. 0 gives the exact empirical score of the discrete train set.
  double bandwidth = 0.0;
};

struct SamplerConfig {
  std::size_t steps = 100;
  double t_start = 1.0;
  std::uint64_t seed = 0;
  bool stochastic = false;  // false = deterministic update
  double eta = 0.0;         // stochastic mix: fresh-noise variance factor 1-eta^2
};

// z_t = alpha_t*z + sigma_t*eps with eps keyed by (seed, row).
std::vector<double> forward_sample(std::span<const float> z, double t,
                                   const DiffusionSchedule& sched,
                                   std::uint64_t seed, std::uint64_t row);

// Closed-form score of the train set, softmax-weighted over anchors
// alpha_t*z^(k). The squared distance enters the softmax NEGATED — the
// weights are the Gaussian posterior q(k | z_t), so nearer anchors must
// get larger weight (with a positive sign the single-anchor case would
// not reduce to the exact Gaussian score).
class EmpiricalScore {
 public:
  EmpiricalScore(const ScoreConfig& cfg, const DiffusionSchedule& sched);

  // Writes s(z_t, t) into out (same length as z_t).
  void eval(std::span<const double> z_t, double t,
            std::span<double> out) const;

  // sigma_t^2 + bandwidth: the variance of the mixture family this score
  // is exact for. The sampler inverts through it.
  double effective_var(double t) const;

  const ScoreConfig& config() const { return cfg_; }

 private:
  ScoreConfig cfg_;
  DiffusionSchedule sched_;
};

// Integrates from t_start to 0 on a uniform grid of cfg.steps intervals.
// Each step computes x0_hat = (z_t + v_t*s)/alpha_t and
// eps_hat = (z_t - alpha_t*x0_hat)/sqrt(v_t) with v_t the score's
// effective variance, then steps to
//   z_t' = alpha_t'*x0_hat + sqrt(v_t')*eps_hat          (deterministic)
// or mixes eps_hat with fresh noise as eta*eps + sqrt(1-eta^2)*xi
// (stochastic; fresh-noise variance v_t'*(1-eta^2), keyed to
// (seed, chain) with one counter per step and coordinate).
// With bandwidth 0, v_t = sigma_t^2 and this is the plain x0-prediction
// update. t_start = 0 returns z_start unchanged. t_start = 1 is clipped
// to 1-1e-4 so alpha stays nonzero.
std::vector<double> reverse_sample(std::span<const double> z_start,
                                   const SamplerConfig& cfg,
                                   const EmpiricalScore& score,
                                   const DiffusionSchedule& sched,
                                   std::uint64_t chain = 0);

// reverse_sample over every row of starts, parallel over chains; row i
// uses chain index i. Output float32.
TensorSet sample_chains(const TensorSet& starts, const SamplerConfig& cfg,
                        const EmpiricalScore& score,
                        const DiffusionSchedule& sched);

// N(0,I) chain starts, keyed (seed, "chain.start", row).
TensorSet gaussian_starts(std::size_t n, std::size_t dim, std::uint64_t seed);

// gFID(t): noise every source row to time t, denoise from t, map through
// the feature handshake, FID against features_a.
double gfid_t(const TensorSet& sources, double t, const ScoreConfig& score_cfg,
              const SamplerConfig& sampler, const DiffusionSchedule& sched,
              const TensorSet& features_a,
              const std::function<TensorSet(const TensorSet&)>& feature_map);

}  // namespace fidkit
