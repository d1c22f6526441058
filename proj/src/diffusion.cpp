#include "fidkit/diffusion.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fidkit/frechet.hpp"
#include "fidkit/parallel.hpp"
#include "fidkit/rng.hpp"

namespace fidkit {

ScheduleKind schedule_from(const std::string& name) {
  if (name == "rectified_flow") return ScheduleKind::rectified_flow;
  if (name == "vp_cosine") return ScheduleKind::vp_cosine;
  throw std::runtime_error("unknown schedule \"" + name + "\"");
}

std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::rectified_flow ? "rectified_flow" : "vp_cosine";
}

double DiffusionSchedule::alpha(double t) const {
  return kind == ScheduleKind::rectified_flow
             ? 1.0 - t
             : std::cos(0.5 * std::numbers::pi * t);
}

double DiffusionSchedule::sigma(double t) const {
  return kind == ScheduleKind::rectified_flow
             ? t
             : std::sin(0.5 * std::numbers::pi * t);
}

std::vector<double> forward_sample(std::span<const float> z, double t,
                                   const DiffusionSchedule& sched,
                                   std::uint64_t seed, std::uint64_t row) {
  if (t < 0.0 || t > 1.0) throw std::runtime_error("t must be in [0,1]");
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  std::vector<double> out(z.size());
  if (s == 0.0) {
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = double(z[j]);
    return out;
  }
  const rng::Stream noise(seed, "forward", row);
  for (std::size_t j = 0; j < z.size(); ++j)
    out[j] = a * double(z[j]) + s * noise.normal(j);
  return out;
}

EmpiricalScore::EmpiricalScore(const ScoreConfig& cfg,
                               const DiffusionSchedule& sched)
    : cfg_(cfg), sched_(sched) {
  if (!cfg_.train_set || cfg_.train_set->rows < 1)
    throw std::runtime_error("empirical score needs a nonempty train set");
  if (cfg_.bandwidth < 0.0)
    throw std::runtime_error("bandwidth must be >= 0");
}

double EmpiricalScore::effective_var(double t) const {
  const double s = sched_.sigma(t);
  return s * s + cfg_.bandwidth;
}

void EmpiricalScore::eval(std::span<const double> z_t, double t,
                          std::span<double> out) const {
  const TensorSet& train = *cfg_.train_set;
  if (z_t.size() != train.cols)
    throw std::runtime_error("score input dim " + std::to_string(z_t.size()) +
                             " != train dim " + std::to_string(train.cols));
  const double v = effective_var(t);
  if (v == 0.0)
    throw std::runtime_error("empirical score undefined at sigma_t^2 + "
                             "bandwidth == 0");
  const double a = sched_.alpha(t);
  const std::size_t m = train.rows;
  const std::size_t d = train.cols;

  // Log-sum-exp with max subtraction over logits -d2_k/(2v).
  std::vector<double> logits(m);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    double d2 = 0.0;
    const auto zk = train.row(k);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = z_t[j] - a * double(zk[j]);
      d2 += diff * diff;
    }
    logits[k] = -d2 / (2.0 * v);
    if (logits[k] > max_logit) max_logit = logits[k];
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    logits[k] = std::exp(logits[k] - max_logit);
    denom += logits[k];
  }
  std::vector<double> mean(d, 0.0);  // softmax-weighted anchor mean
  for (std::size_t k = 0; k < m; ++k) {
    const double w = logits[k] / denom;
    const auto zk = train.row(k);
    for (std::size_t j = 0; j < d; ++j) mean[j] += w * double(zk[j]);
  }
  for (std::size_t j = 0; j < d; ++j) out[j] = (-z_t[j] + a * mean[j]) / v;
}

namespace {

double clip_t_start(double t_start, std::size_t steps) {
  if (t_start < 0.0 || t_start > 1.0)
    throw std::runtime_error("t_start must be in [0,1]");
  if (steps < 1) throw std::runtime_error("steps must be >= 1");
  // alpha hits 0 at t=1 for both schedules; start just below.
  return t_start >= 1.0 ? 1.0 - 1e-4 : t_start;
}

}  // namespace

std::vector<double> reverse_sample(std::span<const double> z_start,
                                   const SamplerConfig& cfg,
                                   const EmpiricalScore& score,
                                   const DiffusionSchedule& sched,
                                   std::uint64_t chain) {
  std::vector<double> z(z_start.begin(), z_start.end());
  if (cfg.t_start == 0.0) return z;
  const double ts = clip_t_start(cfg.t_start, cfg.steps);
  const std::size_t d = z.size();
  std::vector<double> s(d);
  const rng::Stream noise(cfg.seed, "sampler.noise", chain);
  for (std::size_t i = 0; i < cfg.steps; ++i) {
    const double t = ts * (1.0 - double(i) / double(cfg.steps));
    const double tn = ts * (1.0 - double(i + 1) / double(cfg.steps));
    const double a = sched.alpha(t);
    const double an = sched.alpha(tn);
    const double v = score.effective_var(t);
    const double vn = score.effective_var(tn);
    const double st = std::sqrt(v);
    const double stn = std::sqrt(vn);
    score.eval(z, t, s);
    for (std::size_t j = 0; j < d; ++j) {
      const double x0 = (z[j] + v * s[j]) / a;
      const double eps = (z[j] - a * x0) / st;
      double noisy = eps;
      if (cfg.stochastic) {
        const double xi = noise.normal(i * d + j);
        noisy = cfg.eta * eps + std::sqrt(1.0 - cfg.eta * cfg.eta) * xi;
      }
      z[j] = an * x0 + stn * noisy;
    }
  }
  return z;
}

TensorSet sample_chains(const TensorSet& starts, const SamplerConfig& cfg,
                        const EmpiricalScore& score,
                        const DiffusionSchedule& sched) {
  TensorSet out(starts.rows, starts.cols);
  par::parallel_for(starts.rows, [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(starts.cols);
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = starts.row(i);
      for (std::size_t j = 0; j < starts.cols; ++j) z[j] = double(row[j]);
      const auto zi = reverse_sample(z, cfg, score, sched, i);
      for (std::size_t j = 0; j < starts.cols; ++j)
        out.at(i, j) = static_cast<float>(zi[j]);
    }
  });
  return out;
}

TensorSet gaussian_starts(std::size_t n, std::size_t dim, std::uint64_t seed) {
  TensorSet out(n, dim);
  par::parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const rng::Stream stream(seed, "chain.start", i);
      for (std::size_t j = 0; j < dim; ++j)
        out.at(i, j) = static_cast<float>(stream.normal(j));
    }
  });
  return out;
}

double gfid_t(const TensorSet& sources, double t, const ScoreConfig& score_cfg,
              const SamplerConfig& sampler, const DiffusionSchedule& sched,
              const TensorSet& features_a,
              const std::function<TensorSet(const TensorSet&)>& feature_map) {
  if (sources.rows == 0) throw std::runtime_error("empty source set");
  if (t < 0.0 || t > 1.0) throw std::runtime_error("t must be in [0,1]");
  const EmpiricalScore score(score_cfg, sched);
  SamplerConfig chain_cfg = sampler;
  chain_cfg.t_start = t;
  TensorSet denoised(sources.rows, sources.cols);
  denoised.ids = sources.ids;
  par::parallel_for(sources.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto z_t =
          forward_sample(sources.row(i), t, sched, sampler.seed, i);
      const auto z0 = reverse_sample(z_t, chain_cfg, score, sched, i);
      for (std::size_t j = 0; j < sources.cols; ++j)
        denoised.at(i, j) = static_cast<float>(z0[j]);
    }
  });
  return fid(features_a, feature_map(denoised));
}

}  // namespace fidkit
