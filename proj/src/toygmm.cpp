#include "fidkit/toygmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fidkit/frechet.hpp"
#include "fidkit/interp.hpp"
#include "fidkit/parallel.hpp"
#include "fidkit/rng.hpp"

namespace fidkit {

void GmmSpec::validate() const {
  if (modes < 1 || dim < 1) throw std::runtime_error("empty GMM spec");
  if (centers.size() != modes * dim)
    throw std::runtime_error("GMM centers length mismatch");
  if (std <= 0.0) throw std::runtime_error("GMM std must be > 0");
  if (weights.size() != modes)
    throw std::runtime_error("GMM weights length mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::runtime_error("GMM weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::runtime_error("GMM weights must sum to 1");
}

GmmSpec make_grid_gmm(std::size_t side, double spacing, double std) {
  if (side < 1) throw std::runtime_error("grid side must be >= 1");
  GmmSpec spec;
  spec.modes = side * side;
  spec.dim = 2;
  spec.std = std;
  const double offset = 0.5 * spacing * double(side - 1);
  for (std::size_t iy = 0; iy < side; ++iy)
    for (std::size_t ix = 0; ix < side; ++ix) {
      spec.centers.push_back(double(ix) * spacing - offset);
      spec.centers.push_back(double(iy) * spacing - offset);
    }
  spec.weights.assign(spec.modes, 1.0 / double(spec.modes));
  spec.validate();
  return spec;
}

GmmSpec make_two_mode_gmm(double c, double std) {
  GmmSpec spec;
  spec.modes = 2;
  spec.dim = 2;
  spec.std = std;
  spec.centers = {c, 0.0, -c, 0.0};
  spec.weights = {0.5, 0.5};
  spec.validate();
  return spec;
}

ToyPreset toy_preset(const std::string& name) {
  if (name == "grid25")
    return {name, make_grid_gmm(5, 1.0, 0.05), make_grid_gmm(5, 1.0, 0.25)};
  if (name == "two_mode")
    return {name, make_two_mode_gmm(2.0, 0.1), make_two_mode_gmm(2.0, 1.0)};
  throw std::runtime_error("unknown preset \"" + name + "\"");
}

TensorSet sample_gmm(const GmmSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::runtime_error("sample count must be >= 1");
  // Cumulative weights for the categorical draw.
  std::vector<double> cdf(spec.modes);
  double acc = 0.0;
  for (std::size_t m = 0; m < spec.modes; ++m) {
    acc += spec.weights[m];
    cdf[m] = acc;
  }
  TensorSet out(n, spec.dim);
  par::parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const rng::Stream mode_stream(seed, "gmm.mode", i);
      const rng::Stream noise(seed, "gmm.noise", i);
      const double u = mode_stream.uniform(0);
      const std::size_t m =
          std::min<std::size_t>(spec.modes - 1,
                                std::lower_bound(cdf.begin(), cdf.end(), u) -
                                    cdf.begin());
      const auto c = spec.center(m);
      for (std::size_t j = 0; j < spec.dim; ++j)
        out.at(i, j) =
            static_cast<float>(c[j] + spec.std * noise.normal(j));
    }
  });
  return out;
}

namespace {

double logpdf_impl(const GmmSpec& spec, const double* x) {
  const double v = spec.std * spec.std;
  const double log_norm =
      -0.5 * double(spec.dim) * std::log(2.0 * std::numbers::pi * v);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(spec.modes);
  for (std::size_t m = 0; m < spec.modes; ++m) {
    const auto c = spec.center(m);
    double d2 = 0.0;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      const double diff = x[j] - c[j];
      d2 += diff * diff;
    }
    terms[m] = std::log(spec.weights[m]) + log_norm - d2 / (2.0 * v);
    max_term = std::max(max_term, terms[m]);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

}  // namespace

double gmm_logpdf(const GmmSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dim) throw std::runtime_error("logpdf dim mismatch");
  return logpdf_impl(spec, x.data());
}

double gmm_logpdf(const GmmSpec& spec, std::span<const float> x) {
  if (x.size() != spec.dim) throw std::runtime_error("logpdf dim mismatch");
  std::vector<double> xd(x.begin(), x.end());
  return logpdf_impl(spec, xd.data());
}

namespace {

std::vector<double> logpdfs_of(const TensorSet& t, const GmmSpec& spec) {
  std::vector<double> out(t.rows);
  par::parallel_for(t.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = gmm_logpdf(spec, t.row(i));
  });
  return out;
}

}  // namespace

double hallucination_rate(const TensorSet& samples, const GmmSpec& spec,
                          const TensorSet& reference, double quantile) {
  if (samples.rows == 0 || reference.rows == 0)
    throw std::runtime_error("hallucination_rate needs nonempty inputs");
  if (quantile <= 0.0 || quantile >= 1.0)
    throw std::runtime_error("quantile must be in (0,1)");
  std::vector<double> ref_lp = logpdfs_of(reference, spec);
  std::sort(ref_lp.begin(), ref_lp.end());
  const std::size_t pos =
      std::min(ref_lp.size() - 1,
               static_cast<std::size_t>(quantile * double(ref_lp.size())));
  const double tau = ref_lp[pos];
  const std::vector<double> lp = logpdfs_of(samples, spec);
  std::size_t below = 0;
  for (double v : lp)
    if (v < tau) ++below;
  return double(below) / double(samples.rows);
}

namespace {

// One latent per mode per replicate, NN partner within the replicate
// (self excluded), midpoints at alpha = 1/2 — the 2D stand-in for the
// interpolated-latent construction.
TensorSet stratified_midpoints(const GmmSpec& spec, std::size_t replicates,
                               std::uint64_t seed) {
  const std::size_t m = spec.modes;
  TensorSet mids(replicates * m, spec.dim);
  const NNConfig nn_cfg{.k = 1, .exclude_self = true};
  const InterpConfig interp_cfg{.method = InterpMethod::linear, .alpha = 0.5};
  for (std::size_t r = 0; r < replicates; ++r) {
    TensorSet rep(m, spec.dim);
    for (std::size_t k = 0; k < m; ++k) {
      const rng::Stream noise(seed, "toy.strat", r * m + k);
      const auto c = spec.center(k);
      for (std::size_t j = 0; j < spec.dim; ++j)
        rep.at(k, j) =
            static_cast<float>(c[j] + spec.std * noise.normal(j));
    }
    const NNResult nn = batch_nn(rep, rep, nn_cfg);
    const TensorSet rep_mids = interpolate_set(rep, nn, interp_cfg);
    std::copy(rep_mids.data.begin(), rep_mids.data.end(),
              mids.data.begin() + r * m * spec.dim);
  }
  return mids;
}

DilemmaVariant run_variant(const GmmSpec& spec, const DilemmaConfig& cfg,
                           std::uint64_t vseed) {
  DilemmaVariant out;
  out.interpolated = stratified_midpoints(spec, cfg.replicates, vseed);
  const TensorSet fresh =
      sample_gmm(spec, cfg.n_ref, rng::derive(vseed, "toy.ref", 0));
  out.ifid_raw = fid(out.interpolated, fresh);
  // fid scales quadratically under x -> x/std of both sets, so the
  // standardized value is exactly the raw value / std^2.
  out.ifid = out.ifid_raw / (spec.std * spec.std);

  out.train = sample_gmm(spec, cfg.n_train, rng::derive(vseed, "toy.train", 0));
  const DiffusionSchedule sched{ScheduleKind::rectified_flow};
  const EmpiricalScore score(
      ScoreConfig{.train_set = &out.train, .bandwidth = cfg.bandwidth}, sched);
  SamplerConfig sampler = cfg.sampler;
  sampler.seed = rng::derive(vseed, "toy.sampler", 0);
  const TensorSet starts = gaussian_starts(
      cfg.n_chains, spec.dim, rng::derive(vseed, "toy.starts", 0));
  out.generated = sample_chains(starts, sampler, score, sched);
  out.hall_rate = hallucination_rate(out.generated, spec, fresh, cfg.quantile);
  return out;
}

}  // namespace

DilemmaResult run_dilemma_experiment(const DilemmaConfig& cfg) {
  const ToyPreset preset = toy_preset(cfg.preset);
  if (cfg.bandwidth < 0.0) throw std::runtime_error("bandwidth must be >= 0");
  DilemmaResult res;
  res.isolated = run_variant(preset.isolated, cfg,
                             rng::derive(cfg.seed, "toy.variant", 0));
  res.connected = run_variant(preset.connected, cfg,
                              rng::derive(cfg.seed, "toy.variant", 1));
  res.ifid_ordered = res.isolated.ifid > res.connected.ifid;
  res.hall_ordered = res.isolated.hall_rate > res.connected.hall_rate;
  return res;
}

}  // namespace fidkit
