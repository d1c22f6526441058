#include "fidkit/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "fidkit/diffusion.hpp"
#include "fidkit/frechet.hpp"
#include "fidkit/interp.hpp"
#include "fidkit/knn.hpp"
#include "fidkit/report.hpp"
#include "fidkit/rng.hpp"
#include "fidkit/stats.hpp"
#include "fidkit/svg.hpp"
#include "fidkit/tensorio.hpp"
#include "fidkit/toygmm.hpp"

namespace fidkit::cli {

namespace {

namespace fs = std::filesystem;

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// Tracks every input file read so reports can embed content digests.
class Inputs {
 public:
  TensorSet read(const std::string& path) {
    note(path);
    return read_any(path);
  }
  void note(const std::string& path) {
    if (!fs::exists(path))
      throw std::runtime_error("input file not found: " + path);
    digests_[path] = file_digest(path);
  }
  json digests() const { return digests_; }

 private:
  std::map<std::string, std::string> digests_;
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

// --config my be a bare config object or a full report (its "config"
// field is used). Values fill in for flags the user did not pass.
json load_config_json(const std::string& path) {
  json j = read_json(path);
  if (j.is_object() && j.contains("config") && j.contains("schema"))
    return j.at("config");
  if (!j.is_object()) throw std::runtime_error(path + ": config must be an object");
  return j;
}

template <class T>
void merge(const json& cfg, const CLI::App* cmd, const std::string& flag,
           const char* key, T& value) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) {
    try {
      value = cfg.at(key).get<T>();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("config key \"") + key +
                               "\": " + e.what());
    }
  }
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// builtin decoders

struct DecoderConfig {
  std::string kind = "identity";
  std::uint64_t seed = 0;
  std::size_t out_dim = 0;  // 0 = latent dim
  double scale = 1.0;       // gain of the "scale" decoder
};

void add_decoder_flags(CLI::App* cmd, DecoderConfig& dc) {
  cmd->add_option("--decoder", dc.kind,
                  "builtin decoder: identity | random_linear_tanh | scale")
      ->check(CLI::IsMember({"identity", "random_linear_tanh", "scale"}));
  cmd->add_option("--decoder-seed", dc.seed, "decoder weight seed");
  cmd->add_option("--decoder-out-dim", dc.out_dim,
                  "output dim of random_linear_tanh (default: latent dim)");
  cmd->add_option("--decoder-scale", dc.scale, "gain of the scale decoder");
}

json decoder_config_json(const DecoderConfig& dc) {
  return {{"kind", dc.kind},
          {"seed", dc.seed},
          {"out_dim", dc.out_dim},
          {"scale", dc.scale}};
}

void merge_decoder(const json& cfg, const CLI::App* cmd, DecoderConfig& dc) {
  if (!cfg.contains("decoder")) return;
  const json& d = cfg.at("decoder");
  merge(d, cmd, "--decoder", "kind", dc.kind);
  merge(d, cmd, "--decoder-seed", "seed", dc.seed);
  merge(d, cmd, "--decoder-out-dim", "out_dim", dc.out_dim);
  merge(d, cmd, "--decoder-scale", "scale", dc.scale);
}

TensorSet apply_decoder(const TensorSet& z, const DecoderConfig& dc) {
  if (dc.kind == "identity") return z;
  if (dc.kind == "scale") {
    TensorSet out = z;
    for (auto& f : out.data) f = static_cast<float>(double(f) * dc.scale);
    return out;
  }
  // random_linear_tanh: W is out_dim x D with entries N(0, 1/D).
  const std::size_t d = z.cols;
  const std::size_t out_dim = dc.out_dim ? dc.out_dim : d;
  const double w_std = 1.0 / std::sqrt(double(d));
  std::vector<double> w(out_dim * d);
  for (std::size_t o = 0; o < out_dim; ++o) {
    const rng::Stream row(dc.seed, "decoder.weights", o);
    for (std::size_t j = 0; j < d; ++j) w[o * d + j] = w_std * row.normal(j);
  }
  TensorSet out(z.rows, out_dim);
  out.ids = z.ids;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const auto zi = z.row(i);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += w[o * d + j] * double(zi[j]);
      out.at(i, o) = static_cast<float>(std::tanh(acc));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// shared option bundles

struct CommonOpts {
  std::string out_dir = ".";
  std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out-dir", c.out_dir, "output directory");
  cmd->add_option("--config", c.config_path,
                  "JSON config file or a report with an embedded config");
}

json resolve_config(const CLI::App* cmd, CommonOpts& c) {
  json cfg = json::object();
  if (!c.config_path.empty()) cfg = load_config_json(c.config_path);
  merge(cfg, cmd, "--out-dir", "out_dir", c.out_dir);
  return cfg;
}

// Metrics stay keyed by the literal tokens of --t, so "0.1" is "0.1" in
// the report and not a re-rendered double.
std::vector<std::pair<std::string, double>> parse_t_list(
    const std::string& spec) {
  std::vector<std::pair<std::string, double>> ts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double t = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw std::runtime_error("bad t value \"" + item + "\"");
    ts.emplace_back(item, t);
  }
  if (ts.empty()) throw std::runtime_error("empty t list");
  return ts;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const unsigned long long s = std::strtoull(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0')
      throw std::runtime_error("bad seed \"" + item + "\"");
    seeds.push_back(s);
  }
  if (seeds.empty()) throw std::runtime_error("empty seed list");
  return seeds;
}

// ---------------------------------------------------------------------------
// fid

struct FidOpts {
  CommonOpts common;
  std::string a, b;
};

int run_fid(const CLI::App* cmd, FidOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--a", "a", o.a);
  merge(cfg, cmd, "--b", "b", o.b);
  if (o.a.empty() || o.b.empty())
    throw std::runtime_error("fid needs --a and --b");
  Timer timer;
  Inputs inputs;
  const TensorSet a = inputs.read(o.a);
  const TensorSet b = inputs.read(o.b);
  const double v = fid(a, b);
  ensure_dir(o.common.out_dir);
  const json report = make_report(
      "fid", {{"a", o.a}, {"b", o.b}, {"out_dir", o.common.out_dir}},
      inputs.digests(), {{"fid", v}}, timer.ms());
  write_report(join_path(o.common.out_dir, "fid_report.json"), report);
  out << "fid " << fmt(v) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rfid

struct RfidOpts {
  CommonOpts common;
  std::string features, recon_features, latents;
  DecoderConfig decoder;
};

int run_rfid(const CLI::App* cmd, RfidOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--features", "features", o.features);
  merge(cfg, cmd, "--recon-features", "recon_features", o.recon_features);
  merge(cfg, cmd, "--latents", "latents", o.latents);
  merge_decoder(cfg, cmd, o.decoder);
  if (o.features.empty())
    throw std::runtime_error("rfid needs --features");
  if (o.recon_features.empty() == o.latents.empty())
    throw std::runtime_error(
        "rfid needs exactly one of --recon-features or --latents");
  Timer timer;
  Inputs inputs;
  const TensorSet x = inputs.read(o.features);
  TensorSet recon;
  if (!o.recon_features.empty()) {
    recon = inputs.read(o.recon_features);
  } else {
    recon = apply_decoder(inputs.read(o.latents), o.decoder);
  }
  const double v = fid(x, recon);
  ensure_dir(o.common.out_dir);
  json config = {{"features", o.features},
                 {"out_dir", o.common.out_dir},
                 {"decoder", decoder_config_json(o.decoder)}};
  if (!o.recon_features.empty()) config["recon_features"] = o.recon_features;
  if (!o.latents.empty()) config["latents"] = o.latents;
  const json report = make_report("rfid", config, inputs.digests(),
                                  {{"rfid", v}}, timer.ms());
  write_report(join_path(o.common.out_dir, "rfid_report.json"), report);
  out << "rfid " << fmt(v) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ifid

struct IfidOpts {
  CommonOpts common;
  std::string latents, refs, features, resume;
  std::string mode = "toy";  // toy | real
  std::string method = "linear";
  std::string exclude_self = "auto";  // auto | on | off
  double alpha = 0.5;
  std::size_t k = 1;
  std::size_t k_select = 1;
  std::uint64_t seed = 0;
  DecoderConfig decoder;
};

int run_ifid(const CLI::App* cmd, IfidOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--latents", "latents", o.latents);
  merge(cfg, cmd, "--refs", "refs", o.refs);
  merge(cfg, cmd, "--features", "features", o.features);
  merge(cfg, cmd, "--mode", "mode", o.mode);
  merge(cfg, cmd, "--method", "method", o.method);
  merge(cfg, cmd, "--exclude-self", "exclude_self", o.exclude_self);
  merge(cfg, cmd, "--alpha", "alpha", o.alpha);
  merge(cfg, cmd, "--k", "k", o.k);
  merge(cfg, cmd, "--k-select", "k_select", o.k_select);
  merge(cfg, cmd, "--seed", "seed", o.seed);
  merge(cfg, cmd, "--resume", "resume", o.resume);
  merge_decoder(cfg, cmd, o.decoder);
  if (o.latents.empty() || o.features.empty())
    throw std::runtime_error("ifid needs --latents and --features");
  if (o.refs.empty()) o.refs = o.latents;

  Timer timer;
  Inputs inputs;
  const std::string zhat_path = join_path(o.common.out_dir, "ifid_zhat.tns1");
  json config = {{"latents", o.latents},
                 {"refs", o.refs},
                 {"features", o.features},
                 {"mode", o.mode},
                 {"method", o.method},
                 {"exclude_self", o.exclude_self},
                 {"alpha", o.alpha},
                 {"k", o.k},
                 {"k_select", o.k_select},
                 {"seed", o.seed},
                 {"out_dir", o.common.out_dir},
                 {"decoder", decoder_config_json(o.decoder)}};

  const TensorSet x = inputs.read(o.features);

  if (!o.resume.empty()) {
    // Phase 2 of the handshake: decoded features came back.
    config["resume"] = o.resume;
    const TensorSet decoded = inputs.read(o.resume);
    const TensorSet zhat = read_tensor(zhat_path);
    if (decoded.rows != zhat.rows)
      throw std::runtime_error("resume file row count " +
                               std::to_string(decoded.rows) +
                               " != interpolated latent count " +
                               std::to_string(zhat.rows));
    for (std::size_t i = 0; i < zhat.rows; ++i)
      if (decoded.id(i) != zhat.id(i))
        throw std::runtime_error("resume id mismatch at row " +
                                 std::to_string(i) + ": \"" + decoded.id(i) +
                                 "\" vs \"" + zhat.id(i) + "\"");
    const double v = fid(x, decoded);
    ensure_dir(o.common.out_dir);
    const json report = make_report("ifid", config, inputs.digests(),
                                    {{"ifid", v}}, timer.ms());
    write_report(join_path(o.common.out_dir, "ifid_report.json"), report);
    out << "ifid " << fmt(v) << "\n";
    return 0;
  }

  const TensorSet latents = inputs.read(o.latents);
  const bool self_refs = o.refs == o.latents;
  const TensorSet refs = self_refs ? latents : inputs.read(o.refs);
  NNConfig nn_cfg;
  nn_cfg.k = o.k;
  nn_cfg.exclude_self =
      o.exclude_self == "auto" ? self_refs : o.exclude_self == "on";
  const NNResult nn = batch_nn(latents, refs, nn_cfg);
  InterpConfig interp_cfg;
  interp_cfg.method = interp_method_from(o.method);
  interp_cfg.alpha = o.alpha;
  interp_cfg.seed = o.seed;
  interp_cfg.k_select = o.k_select;
  const TensorSet zhat = interpolate_set(latents, refs, nn, interp_cfg);

  ensure_dir(o.common.out_dir);
  if (o.mode == "real") {
    // Phase 1: hand the interpolated latents to the external decoder.
    write_tensor(zhat_path, zhat);
    out << "awaiting-decode: wrote " << zhat_path << "\n"
        << "decode + featurize it externally, then re-run with "
           "--resume <features_of_decoded.tns1>\n";
    return 2;
  }
  if (o.mode != "toy")
    throw std::runtime_error("unknown mode \"" + o.mode + "\"");
  const double v = fid(x, apply_decoder(zhat, o.decoder));
  const json report = make_report("ifid", config, inputs.digests(),
                                  {{"ifid", v}}, timer.ms());
  write_report(join_path(o.common.out_dir, "ifid_report.json"), report);
  out << "ifid " << fmt(v) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gfid-t

struct GfidOpts {
  CommonOpts common;
  std::string train, sources, features;
  std::string t_list = "0,0.1,0.2,0.4,0.6,0.8,1.0";
  std::string schedule = "rectified_flow";
  double bandwidth = 0.0;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  bool stochastic = false;
  double eta = 0.0;
  DecoderConfig decoder;
};

int run_gfid(const CLI::App* cmd, GfidOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--train", "train", o.train);
  merge(cfg, cmd, "--sources", "sources", o.sources);
  merge(cfg, cmd, "--features", "features", o.features);
  merge(cfg, cmd, "--t", "t", o.t_list);
  merge(cfg, cmd, "--schedule", "schedule", o.schedule);
  merge(cfg, cmd, "--bandwidth", "bandwidth", o.bandwidth);
  merge(cfg, cmd, "--steps", "steps", o.steps);
  merge(cfg, cmd, "--seed", "seed", o.seed);
  merge(cfg, cmd, "--stochastic", "stochastic", o.stochastic);
  merge(cfg, cmd, "--eta", "eta", o.eta);
  merge_decoder(cfg, cmd, o.decoder);
  if (o.train.empty()) throw std::runtime_error("gfid-t needs --train");
  if (o.sources.empty()) o.sources = o.train;

  Timer timer;
  Inputs inputs;
  const TensorSet train = inputs.read(o.train);
  const TensorSet sources =
      o.sources == o.train ? train : inputs.read(o.sources);
  const TensorSet features_a = o.features.empty()
                                   ? apply_decoder(sources, o.decoder)
                                   : inputs.read(o.features);
  const auto ts = parse_t_list(o.t_list);
  const DiffusionSchedule sched{schedule_from(o.schedule)};
  const ScoreConfig score_cfg{.train_set = &train, .bandwidth = o.bandwidth};
  SamplerConfig sampler;
  sampler.steps = o.steps;
  sampler.seed = o.seed;
  sampler.stochastic = o.stochastic;
  sampler.eta = o.eta;
  const auto feature_map = [&](const TensorSet& z) {
    return apply_decoder(z, o.decoder);
  };
  json sweep = json::object();
  for (const auto& [key, t] : ts)
    sweep[key] =
        gfid_t(sources, t, score_cfg, sampler, sched, features_a, feature_map);
  ensure_dir(o.common.out_dir);
  json config = {{"train", o.train},
                 {"sources", o.sources},
                 {"t", o.t_list},
                 {"schedule", o.schedule},
                 {"bandwidth", o.bandwidth},
                 {"steps", o.steps},
                 {"seed", o.seed},
                 {"stochastic", o.stochastic},
                 {"eta", o.eta},
                 // reserved: classifier-free guidance has no analog in the
                 // closed-form sampler, but the schema keeps the slot
                 {"guidance", nullptr},
                 {"out_dir", o.common.out_dir},
                 {"decoder", decoder_config_json(o.decoder)}};
  if (!o.features.empty()) config["features"] = o.features;
  const json report = make_report("gfid-t", config, inputs.digests(),
                                  {{"gfid_t", sweep}}, timer.ms());
  write_report(join_path(o.common.out_dir, "gfid_t_report.json"), report);
  for (const auto& [key, t] : ts)
    out << "gfid(" << key << ") " << fmt(sweep.at(key).get<double>()) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// toy

struct ToyOpts {
  CommonOpts common;
  std::string preset = "grid25";
  std::string seeds = "1";
  double bandwidth = 0.3;
  std::size_t steps = 100;
  std::size_t replicates = 40;
  std::size_t n_train = 400;
  std::size_t n_chains = 800;
  std::size_t n_ref = 2000;
  double quantile = 1e-3;
  bool stochastic = false;
  double eta = 0.0;
};

json variant_json(const DilemmaVariant& v) {
  return {{"ifid", v.ifid},
          {"ifid_raw", v.ifid_raw},
          {"hallucination_rate", v.hall_rate}};
}

void write_variant_svgs(const std::string& out_dir, const std::string& tag,
                        const DilemmaVariant& v) {
  const auto scatter = [&](const TensorSet& t, const std::string& name,
                           const std::string& color) {
    SvgSeries s;
    s.label = name;
    s.color = color;
    for (std::size_t i = 0; i < t.rows; ++i) {
      s.x.push_back(double(t.at(i, 0)));
      s.y.push_back(double(t.at(i, 1)));
    }
    const std::string title = name + " (" + tag + ")";
    atomic_write(join_path(out_dir, name + "_" + tag + ".svg"),
                 scatter_svg(title, "z0", "z1", {s}));
  };
  scatter(v.train, "train", "#1f77b4");
  scatter(v.interpolated, "interp", "#d62728");
  scatter(v.generated, "generated", "#2ca02c");
}

int run_toy(const CLI::App* cmd, ToyOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--preset", "preset", o.preset);
  merge(cfg, cmd, "--seeds", "seeds", o.seeds);
  merge(cfg, cmd, "--bandwidth", "bandwidth", o.bandwidth);
  merge(cfg, cmd, "--steps", "steps", o.steps);
  merge(cfg, cmd, "--replicates", "replicates", o.replicates);
  merge(cfg, cmd, "--n-train", "n_train", o.n_train);
  merge(cfg, cmd, "--n-chains", "n_chains", o.n_chains);
  merge(cfg, cmd, "--n-ref", "n_ref", o.n_ref);
  merge(cfg, cmd, "--quantile", "quantile", o.quantile);
  merge(cfg, cmd, "--stochastic", "stochastic", o.stochastic);
  merge(cfg, cmd, "--eta", "eta", o.eta);

  Timer timer;
  const std::vector<std::uint64_t> seeds = parse_seed_list(o.seeds);
  DilemmaConfig dc;
  dc.preset = o.preset;
  dc.bandwidth = o.bandwidth;
  dc.sampler.steps = o.steps;
  dc.sampler.t_start = 1.0;
  dc.sampler.stochastic = o.stochastic;
  dc.sampler.eta = o.eta;
  dc.replicates = o.replicates;
  dc.n_train = o.n_train;
  dc.n_chains = o.n_chains;
  dc.n_ref = o.n_ref;
  dc.quantile = o.quantile;

  ensure_dir(o.common.out_dir);
  json per_seed = json::object();
  std::size_t ifid_passes = 0, hall_passes = 0;
  bool first = true;
  for (std::uint64_t seed : seeds) {
    dc.seed = seed;
    const DilemmaResult res = run_dilemma_experiment(dc);
    ifid_passes += res.ifid_ordered;
    hall_passes += res.hall_ordered;
    per_seed[std::to_string(seed)] = {
        {"isolated", variant_json(res.isolated)},
        {"connected", variant_json(res.connected)},
        {"ifid_ordered", res.ifid_ordered},
        {"hall_ordered", res.hall_ordered}};
    if (first) {
      write_variant_svgs(o.common.out_dir, "isolated", res.isolated);
      write_variant_svgs(o.common.out_dir, "connected", res.connected);
      first = false;
    }
  }
  const json config = {{"preset", o.preset},
                       {"seeds", o.seeds},
                       {"bandwidth", o.bandwidth},
                       {"steps", o.steps},
                       {"replicates", o.replicates},
                       {"n_train", o.n_train},
                       {"n_chains", o.n_chains},
                       {"n_ref", o.n_ref},
                       {"quantile", o.quantile},
                       {"stochastic", o.stochastic},
                       {"eta", o.eta},
                       {"out_dir", o.common.out_dir}};
  const json metrics = {
      {"seeds", per_seed},
      {"seed_count", seeds.size()},
      {"ifid_ordering_passes", ifid_passes},
      {"hall_ordering_passes", hall_passes},
      {"all_orderings_hold",
       ifid_passes == seeds.size() && hall_passes == seeds.size()}};
  const json report =
      make_report("toy", config, json::object(), metrics, timer.ms());
  write_report(join_path(o.common.out_dir, "toy_report.json"), report);
  out << "toy " << o.preset << ": ifid ordering " << ifid_passes << "/"
      << seeds.size() << ", hallucination ordering " << hall_passes << "/"
      << seeds.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateOpts {
  CommonOpts common;
  std::string table, target, negate;
};

int run_correlate(const CLI::App* cmd, CorrelateOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--table", "table", o.table);
  merge(cfg, cmd, "--target", "target", o.target);
  merge(cfg, cmd, "--negate", "negate", o.negate);
  if (o.table.empty() || o.target.empty())
    throw std::runtime_error("correlate needs --table and --target");
  Timer timer;
  Inputs inputs;
  inputs.note(o.table);
  MetricTable table = read_metric_table(o.table);
  if (!o.negate.empty()) {
    std::stringstream ss(o.negate);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      const std::size_t c = table.col_index(name);
      for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
        auto& cell = table.values[r * table.col_labels.size() + c];
        if (cell) cell = -*cell;
      }
      table.col_labels[c] = "-" + name;
    }
  }
  const auto correlations = correlate_table(table, o.target);
  json rows = json::array();
  std::string csv = "metric,pcc,srcc,n\n";
  for (const auto& c : correlations) {
    rows.push_back(
        {{"metric", c.metric}, {"pcc", c.pcc}, {"srcc", c.srcc}, {"n", c.n}});
    csv += c.metric + "," + fmt(c.pcc) + "," + fmt(c.srcc) + "," +
           std::to_string(c.n) + "\n";
  }
  ensure_dir(o.common.out_dir);
  const json config = {{"table", o.table},
                       {"target", o.target},
                       {"negate", o.negate},
                       {"out_dir", o.common.out_dir}};
  const json report = make_report(
      "correlate", config, inputs.digests(),
      {{"target", o.target}, {"correlations", rows}}, timer.ms());
  write_report(join_path(o.common.out_dir, "correlate_report.json"), report);
  atomic_write(join_path(o.common.out_dir, "correlate_table.csv"), csv);
  for (const auto& c : correlations)
    out << c.metric << " pcc " << fmt(c.pcc) << " srcc " << fmt(c.srcc)
        << " n " << c.n << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// interpolate

struct InterpolateOpts {
  CommonOpts common;
  std::string latents, refs, nn_indices, out_path;
  std::string method = "linear";
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::size_t k_select = 1;
};

int run_interpolate(const CLI::App* cmd, InterpolateOpts& o,
                    std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--latents", "latents", o.latents);
  merge(cfg, cmd, "--refs", "refs", o.refs);
  merge(cfg, cmd, "--nn-indices", "nn_indices", o.nn_indices);
  merge(cfg, cmd, "--method", "method", o.method);
  merge(cfg, cmd, "--alpha", "alpha", o.alpha);
  merge(cfg, cmd, "--seed", "seed", o.seed);
  merge(cfg, cmd, "--k-select", "k_select", o.k_select);
  merge(cfg, cmd, "--out", "out", o.out_path);
  if (o.latents.empty() || o.nn_indices.empty())
    throw std::runtime_error("interpolate needs --latents and --nn-indices");
  if (o.refs.empty()) o.refs = o.latents;
  Timer timer;
  Inputs inputs;
  const TensorSet latents = inputs.read(o.latents);
  const TensorSet refs =
      o.refs == o.latents ? latents : inputs.read(o.refs);
  const TensorSet idx_t = inputs.read(o.nn_indices);
  if (idx_t.rows != latents.rows)
    throw std::runtime_error("nn index rows " + std::to_string(idx_t.rows) +
                             " != latent rows " +
                             std::to_string(latents.rows));
  NNResult nn;
  nn.query_count = idx_t.rows;
  nn.k = idx_t.cols;
  nn.indices.resize(idx_t.data.size());
  nn.distances.assign(idx_t.data.size(), 0.0);
  for (std::size_t i = 0; i < idx_t.data.size(); ++i) {
    const float f = idx_t.data[i];
    const auto v = static_cast<std::int64_t>(f);
    if (double(v) != double(f) || v < 0 ||
        static_cast<std::size_t>(v) >= refs.rows)
      throw std::runtime_error("bad reference index " + std::to_string(f));
    nn.indices[i] = v;
  }
  InterpConfig icfg;
  icfg.method = interp_method_from(o.method);
  icfg.alpha = o.alpha;
  icfg.seed = o.seed;
  icfg.k_select = o.k_select;
  const TensorSet zhat = interpolate_set(latents, refs, nn, icfg);
  ensure_dir(o.common.out_dir);
  const std::string out_path =
      o.out_path.empty() ? join_path(o.common.out_dir, "interpolated.tns1")
                         : o.out_path;
  write_tensor(out_path, zhat);
  const json config = {{"latents", o.latents},   {"refs", o.refs},
                       {"nn_indices", o.nn_indices}, {"method", o.method},
                       {"alpha", o.alpha},       {"seed", o.seed},
                       {"k_select", o.k_select}, {"out", out_path},
                       {"out_dir", o.common.out_dir}};
  const json report = make_report(
      "interpolate", config, inputs.digests(),
      {{"rows", zhat.rows}, {"cols", zhat.cols}}, timer.ms());
  write_report(join_path(o.common.out_dir, "interpolate_report.json"),
               report);
  out << "wrote " << out_path << " (" << zhat.rows << "x" << zhat.cols
      << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// nn-dump

struct NnDumpOpts {
  CommonOpts common;
  std::string queries, refs;
  std::size_t k = 1;
  std::string exclude_self = "auto";
};

int run_nn_dump(const CLI::App* cmd, NnDumpOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--queries", "queries", o.queries);
  merge(cfg, cmd, "--refs", "refs", o.refs);
  merge(cfg, cmd, "--k", "k", o.k);
  merge(cfg, cmd, "--exclude-self", "exclude_self", o.exclude_self);
  if (o.queries.empty()) throw std::runtime_error("nn-dump needs --queries");
  if (o.refs.empty()) o.refs = o.queries;
  Timer timer;
  Inputs inputs;
  const TensorSet queries = inputs.read(o.queries);
  const bool self_refs = o.refs == o.queries;
  const TensorSet refs = self_refs ? queries : inputs.read(o.refs);
  NNConfig nn_cfg;
  nn_cfg.k = o.k;
  nn_cfg.exclude_self =
      o.exclude_self == "auto" ? self_refs : o.exclude_self == "on";
  const NNResult nn = batch_nn(queries, refs, nn_cfg);

  TensorSet idx_t(nn.query_count, nn.k), dist_t(nn.query_count, nn.k);
  idx_t.ids = queries.ids;
  dist_t.ids = queries.ids;
  double mean_d = 0.0;
  for (std::size_t i = 0; i < nn.indices.size(); ++i) {
    idx_t.data[i] = static_cast<float>(nn.indices[i]);
    dist_t.data[i] = static_cast<float>(nn.distances[i]);
    mean_d += nn.distances[i];
  }
  mean_d /= double(nn.indices.size());
  ensure_dir(o.common.out_dir);
  write_tensor(join_path(o.common.out_dir, "nn_indices.tns1"), idx_t);
  write_tensor(join_path(o.common.out_dir, "nn_distances.tns1"), dist_t);
  std::string csv = "id";
  for (std::size_t j = 0; j < nn.k; ++j)
    csv += ",idx" + std::to_string(j) + ",dist" + std::to_string(j);
  csv += "\n";
  for (std::size_t i = 0; i < nn.query_count; ++i) {
    csv += queries.id(i);
    for (std::size_t j = 0; j < nn.k; ++j)
      csv += "," + std::to_string(nn.index(i, j)) + "," +
             fmt(nn.distance(i, j));
    csv += "\n";
  }
  atomic_write(join_path(o.common.out_dir, "nn_summary.csv"), csv);
  const json config = {{"queries", o.queries},
                       {"refs", o.refs},
                       {"k", o.k},
                       {"exclude_self", o.exclude_self},
                       {"out_dir", o.common.out_dir}};
  const json report = make_report(
      "nn-dump", config, inputs.digests(),
      {{"queries", nn.query_count}, {"k", nn.k}, {"mean_distance", mean_d}},
      timer.ms());
  write_report(join_path(o.common.out_dir, "nn_dump_report.json"), report);
  out << "nn-dump " << nn.query_count << " queries, k=" << nn.k
      << ", mean distance " << fmt(mean_d) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotOpts {
  CommonOpts common;
  std::string csv_path, x_col, y_col, out_path;
};

int run_plot(const CLI::App* cmd, PlotOpts& o, std::ostream& out) {
  const json cfg = resolve_config(cmd, o.common);
  merge(cfg, cmd, "--csv", "csv", o.csv_path);
  merge(cfg, cmd, "--x", "x", o.x_col);
  merge(cfg, cmd, "--y", "y", o.y_col);
  merge(cfg, cmd, "--out", "out", o.out_path);
  if (o.csv_path.empty() || o.x_col.empty() || o.y_col.empty())
    throw std::runtime_error("plot needs --csv, --x and --y");
  Timer timer;
  Inputs inputs;
  inputs.note(o.csv_path);
  const MetricTable table = read_metric_table(o.csv_path);
  const std::size_t xc = table.col_index(o.x_col);
  const std::size_t yc = table.col_index(o.y_col);
  SvgSeries s;
  s.label = "";
  s.radius_frac = 0.008;
  std::vector<double> xs, ys;
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    const auto x = table.value(r, xc);
    const auto y = table.value(r, yc);
    if (x && y) {
      s.x.push_back(*x);
      s.y.push_back(*y);
      s.point_labels.push_back(table.row_labels[r]);
      xs.push_back(*x);
      ys.push_back(*y);
    }
  }
  if (xs.empty()) throw std::runtime_error("no rows with both columns");
  std::ostringstream title;
  title << o.y_col << " vs " << o.x_col;
  if (xs.size() >= 2) {
    try {
      const double p = pcc(xs, ys);
      const double sr = srcc(xs, ys);
      title.precision(2);
      title << std::fixed << " (PCC=" << p << ", SRCC=" << sr << ")";
    } catch (const std::exception&) {
      // constant column: plot without the correlation banner
    }
  }
  const std::string svg = scatter_svg(title.str(), o.x_col, o.y_col, {s});
  ensure_dir(o.common.out_dir);
  const std::string out_path =
      o.out_path.empty() ? join_path(o.common.out_dir, "plot.svg")
                         : o.out_path;
  atomic_write(out_path, svg);
  const json config = {{"csv", o.csv_path}, {"x", o.x_col},
                       {"y", o.y_col},      {"out", out_path},
                       {"out_dir", o.common.out_dir}};
  const json report =
      make_report("plot", config, inputs.digests(),
                  {{"points", xs.size()}}, timer.ms());
  write_report(join_path(o.common.out_dir, "plot_report.json"), report);
  out << "wrote " << out_path << " (" << xs.size() << " points)\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"latent-space diffusability evaluation engine"};
  app.require_subcommand(1);

  FidOpts fid_o;
  auto* fid_cmd = app.add_subcommand("fid", "FID between two feature files");
  fid_cmd->add_option("--a", fid_o.a, "first .tns1/.csv feature file");
  fid_cmd->add_option("--b", fid_o.b, "second .tns1/.csv feature file");
  add_common(fid_cmd, fid_o.common);

  RfidOpts rfid_o;
  auto* rfid_cmd = app.add_subcommand("rfid", "reconstruction FID");
  rfid_cmd->add_option("--features", rfid_o.features, "original features");
  rfid_cmd->add_option("--recon-features", rfid_o.recon_features,
                       "reconstructed features");
  rfid_cmd->add_option("--latents", rfid_o.latents,
                       "latents to decode with the builtin decoder");
  add_decoder_flags(rfid_cmd, rfid_o.decoder);
  add_common(rfid_cmd, rfid_o.common);

  IfidOpts ifid_o;
  auto* ifid_cmd = app.add_subcommand("ifid", "interpolated FID");
  ifid_cmd->add_option("--latents", ifid_o.latents, "latent .tns1/.csv");
  ifid_cmd->add_option("--refs", ifid_o.refs,
                       "reference latents for the NN search (default: "
                       "--latents)");
  ifid_cmd->add_option("--features", ifid_o.features, "original features");
  ifid_cmd->add_option("--mode", ifid_o.mode, "toy | real")
      ->check(CLI::IsMember({"toy", "real"}));
  ifid_cmd->add_option("--method", ifid_o.method,
                       "linear | spherical | mask");
  ifid_cmd->add_option("--alpha", ifid_o.alpha, "interpolation strength");
  ifid_cmd->add_option("--k", ifid_o.k, "NN count");
  ifid_cmd->add_option("--k-select", ifid_o.k_select,
                       "partner drawn uniformly from the top k_select");
  ifid_cmd->add_option("--seed", ifid_o.seed, "mask/top-K selection seed");
  ifid_cmd->add_option("--exclude-self", ifid_o.exclude_self,
                       "auto | on | off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  ifid_cmd->add_option("--resume", ifid_o.resume,
                       "decoded features returning from the handshake");
  add_decoder_flags(ifid_cmd, ifid_o.decoder);
  add_common(ifid_cmd, ifid_o.common);

  GfidOpts gfid_o;
  auto* gfid_cmd = app.add_subcommand("gfid-t", "gFID(t) sweep (toy mode)");
  gfid_cmd->add_option("--train", gfid_o.train,
                       "train latents for the empirical score");
  gfid_cmd->add_option("--sources", gfid_o.sources,
                       "source latents (default: --train)");
  gfid_cmd->add_option("--features", gfid_o.features,
                       "target features (default: decoded sources)");
  gfid_cmd->add_option("--t", gfid_o.t_list, "comma-separated t values");
  gfid_cmd->add_option("--schedule", gfid_o.schedule,
                       "rectified_flow | vp_cosine");
  gfid_cmd->add_option("--bandwidth", gfid_o.bandwidth, "score smoothing");
  gfid_cmd->add_option("--steps", gfid_o.steps, "sampler steps");
  gfid_cmd->add_option("--seed", gfid_o.seed, "noise seed");
  gfid_cmd->add_flag("--stochastic", gfid_o.stochastic,
                     "stochastic sampler updates");
  gfid_cmd->add_option("--eta", gfid_o.eta,
                       "stochastic mix (fresh-noise variance 1-eta^2)");
  add_decoder_flags(gfid_cmd, gfid_o.decoder);
  add_common(gfid_cmd, gfid_o.common);

  ToyOpts toy_o;
  auto* toy_cmd =
      app.add_subcommand("toy", "reconstruction-generation dilemma toy");
  toy_cmd->add_option("--preset", toy_o.preset, "grid25 | two_mode")
      ->check(CLI::IsMember({"grid25", "two_mode"}));
  toy_cmd->add_option("--seeds", toy_o.seeds, "comma-separated seed list");
  toy_cmd->add_option("--bandwidth", toy_o.bandwidth, "score smoothing");
  toy_cmd->add_option("--steps", toy_o.steps, "sampler steps");
  toy_cmd->add_option("--replicates", toy_o.replicates,
                      "interpolation replicates");
  toy_cmd->add_option("--n-train", toy_o.n_train, "train set size");
  toy_cmd->add_option("--n-chains", toy_o.n_chains, "sampler chains");
  toy_cmd->add_option("--n-ref", toy_o.n_ref, "fresh reference samples");
  toy_cmd->add_option("--quantile", toy_o.quantile,
                      "hallucination threshold quantile");
  toy_cmd->add_flag("--stochastic", toy_o.stochastic,
                    "stochastic sampler updates");
  toy_cmd->add_option("--eta", toy_o.eta, "stochastic mix");
  add_common(toy_cmd, toy_o.common);

  CorrelateOpts corr_o;
  auto* corr_cmd =
      app.add_subcommand("correlate", "PCC/SRCC of metric columns");
  corr_cmd->add_option("--table", corr_o.table, "metric CSV");
  corr_cmd->add_option("--target", corr_o.target, "target column");
  corr_cmd->add_option("--negate", corr_o.negate,
                       "comma-separated columns to negate");
  add_common(corr_cmd, corr_o.common);

  InterpolateOpts ip_o;
  auto* ip_cmd =
      app.add_subcommand("interpolate", "interpolate latents along NN pairs");
  ip_cmd->add_option("--latents", ip_o.latents, "latent file");
  ip_cmd->add_option("--refs", ip_o.refs, "partner latents (default: "
                     "--latents)");
  ip_cmd->add_option("--nn-indices", ip_o.nn_indices,
                     "nn_indices.tns1 from nn-dump");
  ip_cmd->add_option("--method", ip_o.method, "linear | spherical | mask");
  ip_cmd->add_option("--alpha", ip_o.alpha, "interpolation strength");
  ip_cmd->add_option("--seed", ip_o.seed, "mask/top-K seed");
  ip_cmd->add_option("--k-select", ip_o.k_select, "partner pool size");
  ip_cmd->add_option("--out", ip_o.out_path, "output .tns1 path");
  add_common(ip_cmd, ip_o.common);

  NnDumpOpts nn_o;
  auto* nn_cmd = app.add_subcommand("nn-dump", "exact k-NN search dump");
  nn_cmd->add_option("--queries", nn_o.queries, "query latents");
  nn_cmd->add_option("--refs", nn_o.refs, "reference latents (default: "
                     "--queries)");
  nn_cmd->add_option("--k", nn_o.k, "neighbors per query");
  nn_cmd->add_option("--exclude-self", nn_o.exclude_self, "auto | on | off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  add_common(nn_cmd, nn_o.common);

  PlotOpts plot_o;
  auto* plot_cmd = app.add_subcommand("plot", "scatter SVG from a CSV");
  plot_cmd->add_option("--csv", plot_o.csv_path, "metric CSV");
  plot_cmd->add_option("--x", plot_o.x_col, "x column");
  plot_cmd->add_option("--y", plot_o.y_col, "y column");
  plot_cmd->add_option("--out", plot_o.out_path, "output .svg path");
  add_common(plot_cmd, plot_o.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (fid_cmd->parsed()) return run_fid(fid_cmd, fid_o, out);
    if (rfid_cmd->parsed()) return run_rfid(rfid_cmd, rfid_o, out);
    if (ifid_cmd->parsed()) return run_ifid(ifid_cmd, ifid_o, out);
    if (gfid_cmd->parsed()) return run_gfid(gfid_cmd, gfid_o, out);
    if (toy_cmd->parsed()) return run_toy(toy_cmd, toy_o, out);
    if (corr_cmd->parsed()) return run_correlate(corr_cmd, corr_o, out);
    if (ip_cmd->parsed()) return run_interpolate(ip_cmd, ip_o, out);
    if (nn_cmd->parsed()) return run_nn_dump(nn_cmd, nn_o, out);
    if (plot_cmd->parsed()) return run_plot(plot_cmd, plot_o, out);
    err << "error: no subcommand\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fidkit::cli
