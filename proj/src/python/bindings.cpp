#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "fidkit/frechet.hpp"
#include "fidkit/interp.hpp"
#include "fidkit/knn.hpp"
#include "fidkit/stats.hpp"
#include "fidkit/tensor.hpp"
#include "fidkit/tensorio.hpp"
#include "fidkit/toygmm.hpp"
#include "fidkit/version.hpp"

namespace py = pybind11;

namespace {

using fidkit::TensorSet;

// Row-major contiguous views with dtype coercion at the boundary; the core
// stores float32 rows, stats run in float64.
using FArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

TensorSet to_tensor(const FArray& a, std::vector<std::string> ids = {}) {
  if (a.ndim() != 2) throw std::runtime_error("expected a 2-D array");
  TensorSet t(std::size_t(a.shape(0)), std::size_t(a.shape(1)));
  if (!t.data.empty())
    std::memcpy(t.data.data(), a.data(), sizeof(float) * t.data.size());
  t.ids = std::move(ids);
  t.validate();
  return t;
}

py::array_t<float> from_tensor(const TensorSet& t) {
  py::array_t<float> out({py::ssize_t(t.rows), py::ssize_t(t.cols)});
  if (!t.data.empty())
    std::memcpy(out.mutable_data(), t.data.data(),
                sizeof(float) * t.data.size());
  return out;
}

std::vector<float> fvec(const FArray& a) {
  if (a.ndim() != 1) throw std::runtime_error("expected a 1-D array");
  return {a.data(), a.data() + a.shape(0)};
}

std::vector<double> dvec(const DArray& a) {
  if (a.ndim() != 1) throw std::runtime_error("expected a 1-D array");
  return {a.data(), a.data() + a.shape(0)};
}

py::array_t<double> dvec_out(const std::vector<double>& v) {
  // Shape and strides spelled out: the count-only array_t constructor made
  // stride-0 views in older pybind11 releases.
  py::array_t<double> out({py::ssize_t(v.size())},
                          {py::ssize_t(sizeof(double))});
  if (!v.empty())
    std::memcpy(out.mutable_data(), v.data(), sizeof(double) * v.size());
  return out;
}

py::tuple nn_out(const fidkit::NNResult& nn) {
  py::array_t<std::int64_t> idx(
      {py::ssize_t(nn.query_count), py::ssize_t(nn.k)});
  py::array_t<double> dist({py::ssize_t(nn.query_count), py::ssize_t(nn.k)});
  if (!nn.indices.empty()) {
    std::memcpy(idx.mutable_data(), nn.indices.data(),
                sizeof(std::int64_t) * nn.indices.size());
    std::memcpy(dist.mutable_data(), nn.distances.data(),
                sizeof(double) * nn.distances.size());
  }
  return py::make_tuple(idx, dist);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Latent-space diffusability metrics: Frechet distances, exact k-NN, "
      "latent interpolation, rank correlations, and the toy two-regime "
      "mixture experiment.";

  m.def(
      "fid",
      [](const FArray& a, const FArray& b) {
        return fidkit::fid(to_tensor(a), to_tensor(b));
      },
      py::arg("a"), py::arg("b"),
      "Frechet distance between the Gaussian moment fits of two row sets.");

  m.def(
      "batch_nn",
      [](const FArray& queries, const FArray& refs, std::size_t k,
         bool exclude_self) {
        const fidkit::NNConfig cfg{k, exclude_self};
        return nn_out(fidkit::batch_nn(to_tensor(queries), to_tensor(refs),
                                       cfg));
      },
      py::arg("queries"), py::arg("refs"), py::arg("k") = 1,
      py::arg("exclude_self") = false,
      "Exact k nearest references per query; returns (indices, distances) "
      "arrays of shape (queries, k). exclude_self skips the same-index row "
      "of reference sets that alias the queries row-for-row.");

  m.def(
      "lerp",
      [](const FArray& z1, const FArray& z2, double alpha) {
        return dvec_out(fidkit::lerp(fvec(z1), fvec(z2), alpha));
      },
      py::arg("z1"), py::arg("z2"), py::arg("alpha"),
      "(1-alpha)*z1 + alpha*z2; alpha in {0,1} returns the endpoint "
      "bit-exactly.");

  m.def(
      "slerp",
      [](const FArray& z1, const FArray& z2, double alpha) {
        return dvec_out(fidkit::slerp(fvec(z1), fvec(z2), alpha));
      },
      py::arg("z1"), py::arg("z2"), py::arg("alpha"),
      "Great-circle interpolation about the origin; antipodal inputs are an "
      "error.");

  m.def(
      "mask_interp",
      [](const FArray& z1, const FArray& z2, double alpha, std::uint64_t seed,
         std::uint64_t row) {
        return dvec_out(fidkit::mask_interp(fvec(z1), fvec(z2), alpha, seed,
                                            row));
      },
      py::arg("z1"), py::arg("z2"), py::arg("alpha"), py::arg("seed"),
      py::arg("row") = 0,
      "Per-coordinate Bernoulli(alpha) swap keyed by (seed, row).");

  m.def(
      "interpolate_set",
      [](const FArray& latents, const std::string& method, double alpha,
         std::uint64_t seed, std::size_t k_select) {
        const TensorSet t = to_tensor(latents);
        const fidkit::NNConfig nn_cfg{k_select, true};
        const fidkit::NNResult nn = fidkit::batch_nn(t, t, nn_cfg);
        fidkit::InterpConfig cfg;
        cfg.method = fidkit::interp_method_from(method);
        cfg.alpha = alpha;
        cfg.seed = seed;
        cfg.k_select = k_select;
        return from_tensor(fidkit::interpolate_set(t, nn, cfg));
      },
      py::arg("latents"), py::arg("method") = "linear",
      py::arg("alpha") = 0.5, py::arg("seed") = 0, py::arg("k_select") = 1,
      "Interpolate each row toward a nearest neighbour within the set "
      "(self excluded); k_select > 1 draws the partner uniformly from the "
      "top k.");

  m.def(
      "pcc",
      [](const DArray& x, const DArray& y) {
        return fidkit::pcc(dvec(x), dvec(y));
      },
      py::arg("x"), py::arg("y"), "Pearson correlation coefficient.");

  m.def(
      "srcc",
      [](const DArray& x, const DArray& y) {
        return fidkit::srcc(dvec(x), dvec(y));
      },
      py::arg("x"), py::arg("y"),
      "Spearman rank correlation (Pearson over fractional ranks).");

  py::class_<fidkit::GmmSpec>(m, "GmmSpec")
      .def(py::init<>())
      .def_readwrite("modes", &fidkit::GmmSpec::modes)
      .def_readwrite("dim", &fidkit::GmmSpec::dim)
      .def_readwrite("centers", &fidkit::GmmSpec::centers,
                     "modes x dim center coordinates, row-major flat list")
      .def_readwrite("std", &fidkit::GmmSpec::std)
      .def_readwrite("weights", &fidkit::GmmSpec::weights)
      .def("validate", &fidkit::GmmSpec::validate);

  py::class_<fidkit::ToyPreset>(m, "ToyPreset")
      .def_readonly("name", &fidkit::ToyPreset::name)
      .def_readonly("isolated", &fidkit::ToyPreset::isolated)
      .def_readonly("connected", &fidkit::ToyPreset::connected);

  m.def("make_grid_gmm", &fidkit::make_grid_gmm, py::arg("side"),
        py::arg("spacing"), py::arg("std"),
        "side^2 modes on a square grid centered at the origin, uniform "
        "weights.");
  m.def("make_two_mode_gmm", &fidkit::make_two_mode_gmm, py::arg("c"),
        py::arg("std"), "Two modes at (+c, 0) and (-c, 0).");
  m.def("toy_preset", &fidkit::toy_preset, py::arg("name"),
        "Pinned preset geometries: grid25 or two_mode, each with an "
        "isolated and a connected variant.");

  m.def(
      "sample_gmm",
      [](const fidkit::GmmSpec& spec, std::size_t n, std::uint64_t seed) {
        return from_tensor(fidkit::sample_gmm(spec, n, seed));
      },
      py::arg("spec"), py::arg("n"), py::arg("seed"),
      "Deterministic mixture draw: n float32 rows keyed by (spec, n, "
      "seed).");

  m.def(
      "gmm_logpdf",
      [](const fidkit::GmmSpec& spec, const DArray& x) {
        return fidkit::gmm_logpdf(spec, dvec(x));
      },
      py::arg("spec"), py::arg("x"),
      "Log mixture density at a single point via log-sum-exp.");

  m.def(
      "hallucination_rate",
      [](const FArray& samples, const fidkit::GmmSpec& spec,
         const FArray& reference, double quantile) {
        return fidkit::hallucination_rate(to_tensor(samples), spec,
                                          to_tensor(reference), quantile);
      },
      py::arg("samples"), py::arg("spec"), py::arg("reference"),
      py::arg("quantile") = 1e-3,
      "Fraction of samples below the `quantile` empirical logpdf threshold "
      "of the reference rows.");

  py::class_<fidkit::DilemmaVariant>(m, "DilemmaVariant")
      .def_readonly("ifid", &fidkit::DilemmaVariant::ifid)
      .def_readonly("ifid_raw", &fidkit::DilemmaVariant::ifid_raw)
      .def_readonly("hall_rate", &fidkit::DilemmaVariant::hall_rate)
      .def_property_readonly(
          "train",
          [](const fidkit::DilemmaVariant& v) { return from_tensor(v.train); })
      .def_property_readonly("interpolated",
                             [](const fidkit::DilemmaVariant& v) {
                               return from_tensor(v.interpolated);
                             })
      .def_property_readonly("generated",
                             [](const fidkit::DilemmaVariant& v) {
                               return from_tensor(v.generated);
                             });

  py::class_<fidkit::DilemmaResult>(m, "DilemmaResult")
      .def_readonly("isolated", &fidkit::DilemmaResult::isolated)
      .def_readonly("connected", &fidkit::DilemmaResult::connected)
      .def_readonly("ifid_ordered", &fidkit::DilemmaResult::ifid_ordered)
      .def_readonly("hall_ordered", &fidkit::DilemmaResult::hall_ordered);

  m.def(
      "run_dilemma_experiment",
      [](const std::string& preset, double bandwidth, std::uint64_t seed,
         std::size_t replicates, std::size_t n_train, std::size_t n_chains,
         std::size_t n_ref, double quantile, std::size_t steps,
         double t_start) {
        fidkit::DilemmaConfig cfg;
        cfg.preset = preset;
        cfg.bandwidth = bandwidth;
        cfg.seed = seed;
        cfg.replicates = replicates;
        cfg.n_train = n_train;
        cfg.n_chains = n_chains;
        cfg.n_ref = n_ref;
        cfg.quantile = quantile;
        cfg.sampler.steps = steps;
        cfg.sampler.t_start = t_start;
        return fidkit::run_dilemma_experiment(cfg);
      },
      py::arg("preset") = "grid25", py::arg("bandwidth") = 0.3,
      py::arg("seed") = 1, py::arg("replicates") = 40,
      py::arg("n_train") = 400, py::arg("n_chains") = 800,
      py::arg("n_ref") = 2000, py::arg("quantile") = 1e-3,
      py::arg("steps") = 100, py::arg("t_start") = 1.0,
      "Run both variants of a toy preset: interpolation ifid (in mode-std "
      "units), smoothed-score sampling, and hallucination rate, plus the "
      "isolated-vs-connected orderings.");

  m.def(
      "read_tensor",
      [](const std::string& path) {
        const TensorSet t = fidkit::read_tensor(path);
        return py::make_tuple(from_tensor(t), t.ids);
      },
      py::arg("path"),
      "Read a .tns1 file; returns (float32 array, id list). The list is "
      "empty when the file stores no ids.");

  m.def(
      "write_tensor",
      [](const std::string& path, const FArray& a,
         std::vector<std::string> ids) {
        fidkit::write_tensor(path, to_tensor(a, std::move(ids)));
      },
      py::arg("path"), py::arg("array"),
      py::arg("ids") = std::vector<std::string>{},
      "Write a 2-D float32 array as a .tns1 file, atomically.");

  m.attr("__version__") = fidkit::kVersion;
}
