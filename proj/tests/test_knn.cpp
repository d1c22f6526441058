#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "fidkit/knn.hpp"
#include "fidkit/parallel.hpp"
#include "fidkit/rng.hpp"

using namespace fidkit;

namespace {

TensorSet random_set(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  TensorSet t(rows, cols);
  const rng::Stream s(seed, "knn.test", 0);
  for (std::size_t i = 0; i < t.data.size(); ++i)
    t.data[i] = static_cast<float>(s.normal(i));
  return t;
}

// Reference scan: O(Q*R) full sort per query. Distances go through the
// library's own squared_l2 so the comparison is bit-exact, not approximate;
// the selection logic (sort + tie-break + exclusion) is the part being
// cross-checked.
NNResult naive_nn(const TensorSet& queries, const TensorSet& refs,
                  const NNConfig& cfg) {
  NNResult out;
  out.query_count = queries.rows;
  out.k = cfg.k;
  for (std::size_t q = 0; q < queries.rows; ++q) {
    std::vector<std::pair<double, std::int64_t>> all;
    for (std::size_t r = 0; r < refs.rows; ++r) {
      if (cfg.exclude_self && q == r) continue;
      all.emplace_back(squared_l2(queries.row(q), refs.row(r)),
                       std::int64_t(r));
    }
    std::stable_sort(all.begin(), all.end());  // ties stay in index order
    for (std::size_t j = 0; j < cfg.k; ++j) {
      out.indices.push_back(all[j].second);
      out.distances.push_back(std::sqrt(all[j].first));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("squared_l2 basics") {
  const std::vector<float> a = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f};
  const std::vector<float> b = {0.0f, 2.0f, 1.0f, 4.0f, 8.0f};
  // 1 + 0 + 4 + 0 + 9 = 14
  CHECK(squared_l2(a, b) == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(squared_l2(a, a) == 0.0);
}

TEST_CASE("batch_nn matches the naive oracle bit-exactly") {
  const TensorSet queries = random_set(1, 37, 6);
  const TensorSet refs = random_set(2, 53, 6);
  for (std::size_t k : {std::size_t(1), std::size_t(3), std::size_t(7)}) {
    NNConfig cfg;
    cfg.k = k;
    const NNResult got = batch_nn(queries, refs, cfg);
    const NNResult want = naive_nn(queries, refs, cfg);
    REQUIRE(got.indices == want.indices);
    REQUIRE(got.distances == want.distances);  // identical doubles
  }
}

TEST_CASE("results are identical across thread counts") {
  const TensorSet queries = random_set(3, 101, 8);
  const TensorSet refs = random_set(4, 67, 8);
  NNConfig cfg;
  cfg.k = 4;
  par::set_threads(1);
  const NNResult t1 = batch_nn(queries, refs, cfg);
  par::set_threads(2);
  const NNResult t2 = batch_nn(queries, refs, cfg);
  par::set_threads(8);
  const NNResult t8 = batch_nn(queries, refs, cfg);
  par::set_threads(0);
  CHECK(t1.indices == t2.indices);
  CHECK(t1.indices == t8.indices);
  CHECK(t1.distances == t2.distances);
  CHECK(t1.distances == t8.distances);
}

TEST_CASE("ties break toward the lowest reference index") {
  // four copies of the same point: neighbors must come back 0,1,2,...
  TensorSet refs(4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    refs.at(r, 0) = 1.0f;
    refs.at(r, 1) = -2.0f;
  }
  TensorSet query(1, 2);
  query.at(0, 0) = 1.0f;
  query.at(0, 1) = -2.0f;
  NNConfig cfg;
  cfg.k = 3;
  const NNResult nn = batch_nn(query, refs, cfg);
  CHECK(nn.index(0, 0) == 0);
  CHECK(nn.index(0, 1) == 1);
  CHECK(nn.index(0, 2) == 2);
  CHECK(nn.distance(0, 2) == 0.0);
}

TEST_CASE("exclude_self skips the aliased row, not zero distances") {
  // refs row 2 duplicates row 0; query set aliases refs
  TensorSet pts(3, 2);
  pts.at(0, 0) = 0.0f;
  pts.at(1, 0) = 10.0f;
  pts.at(2, 0) = 0.0f;
  NNConfig cfg;
  cfg.exclude_self = true;
  const NNResult nn = batch_nn(pts, pts, cfg);
  CHECK(nn.index(0, 0) == 2);  // its duplicate, distance 0
  CHECK(nn.distance(0, 0) == 0.0);
  CHECK(nn.index(2, 0) == 0);
  CHECK(nn.index(1, 0) == 0);  // distance tie -> lowest index
  // and the oracle agrees
  const NNResult want = naive_nn(pts, pts, cfg);
  CHECK(nn.indices == want.indices);
  CHECK(nn.distances == want.distances);
}

TEST_CASE("k larger than the usable reference count is an error") {
  const TensorSet pts = random_set(5, 4, 3);
  NNConfig cfg;
  cfg.k = 5;
  CHECK_THROWS_WITH_AS(batch_nn(pts, pts, cfg), doctest::Contains("exceeds"),
                       std::runtime_error);
  // with self-exclusion only rows-1 refs are usable
  cfg.k = 4;
  cfg.exclude_self = true;
  CHECK_THROWS_AS(batch_nn(pts, pts, cfg), std::runtime_error);
  cfg.k = 3;
  CHECK_NOTHROW(batch_nn(pts, pts, cfg));
}

TEST_CASE("dimension mismatch is rejected") {
  const TensorSet a = random_set(6, 5, 3);
  const TensorSet b = random_set(7, 5, 4);
  CHECK_THROWS_AS(batch_nn(a, b, NNConfig{}), std::runtime_error);
}
