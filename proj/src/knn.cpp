#include "fidkit/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fidkit/parallel.hpp"

namespace fidkit {

double squared_l2(std::span<const float> a, std::span<const float> b) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t d = a.size();
  const std::size_t d4 = d - d % 4;
  for (std::size_t j = 0; j < d4; j += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double diff = double(a[j + l]) - double(b[j + l]);
      lane[l] += diff * diff;
    }
  }
  for (std::size_t j = d4; j < d; ++j) {
    const double diff = double(a[j]) - double(b[j]);
    lane[j - d4] += diff * diff;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

namespace {

struct Hit {
  double d2;
  std::int64_t idx;
};

// Sorted insert by (d2, idx); scanning refs in index order keeps equal
// distances in lowest-index-first order without extra bookkeeping.
void consider(std::vector<Hit>& best, std::size_t k, double d2,
              std::int64_t idx) {
  if (best.size() == k && d2 >= best.back().d2) return;
  auto pos = std::upper_bound(
      best.begin(), best.end(), d2,
      [](double v, const Hit& h) { return v < h.d2; });
  best.insert(pos, Hit{d2, idx});
  if (best.size() > k) best.pop_back();
}

}  // namespace

std::pair<std::vector<std::int64_t>, std::vector<double>> top_k(
    std::span<const float> query, const TensorSet& refs, const NNConfig& cfg,
    std::optional<std::size_t> exclude_index) {
  if (query.size() != refs.cols)
    throw std::runtime_error("query dim " + std::to_string(query.size()) +
                             " != reference dim " + std::to_string(refs.cols));
  if (refs.rows == 0) throw std::runtime_error("empty reference set");
  const std::size_t usable = refs.rows - (exclude_index ? 1 : 0);
  if (cfg.k < 1 || cfg.k > usable)
    throw std::runtime_error("k=" + std::to_string(cfg.k) +
                             " exceeds usable reference count " +
                             std::to_string(usable));
  std::vector<Hit> best;
  best.reserve(cfg.k + 1);
  for (std::size_t r = 0; r < refs.rows; ++r) {
    if (exclude_index && r == *exclude_index) continue;
    consider(best, cfg.k, squared_l2(query, refs.row(r)),
             static_cast<std::int64_t>(r));
  }
  std::vector<std::int64_t> idx(cfg.k);
  std::vector<double> dist(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) {
    idx[j] = best[j].idx;
    dist[j] = std::sqrt(best[j].d2);
  }
  return {std::move(idx), std::move(dist)};
}

NNResult batch_nn(const TensorSet& queries, const TensorSet& refs,
                  const NNConfig& cfg) {
  if (queries.cols != refs.cols)
    throw std::runtime_error("query dim " + std::to_string(queries.cols) +
                             " != reference dim " + std::to_string(refs.cols));
  NNResult out;
  out.query_count = queries.rows;
  out.k = cfg.k;
  out.indices.resize(queries.rows * cfg.k);
  out.distances.resize(queries.rows * cfg.k);
  par::parallel_for(queries.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      const bool excl = cfg.exclude_self && q < refs.rows;
      auto [idx, dist] =
          top_k(queries.row(q), refs, cfg,
                excl ? std::optional<std::size_t>(q) : std::nullopt);
      std::copy(idx.begin(), idx.end(), out.indices.begin() + q * cfg.k);
      std::copy(dist.begin(), dist.end(), out.distances.begin() + q * cfg.k);
    }
  });
  return out;
}

}  // namespace fidkit
