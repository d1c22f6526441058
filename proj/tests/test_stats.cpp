#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fidkit/rng.hpp"
#include "fidkit/stats.hpp"

using namespace fidkit;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

// shorthand: span arguments do not bind to braced lists
std::vector<double> v(std::initializer_list<double> xs) { return xs; }

// direct-formula Pearson oracle in long double
double pcc_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += (long double)x[i] * x[i];
    syy += (long double)y[i] * y[i];
    sxy += (long double)x[i] * y[i];
  }
  return double((sxy - sx * sy / n) /
                std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n)));
}

}  // namespace

TEST_CASE("pcc hand cases") {
  CHECK(pcc(v({1, 2, 3}), v({2, 4, 6})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pcc(v({1, 2, 3}), v({6, 4, 2})) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pcc matches the direct-formula oracle on random input") {
  const rng::Stream s(5, "stats.test", 0);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    x[i] = s.normal(2 * i);
    y[i] = 0.3 * x[i] + s.normal(2 * i + 1);
  }
  CHECK(pcc(x, y) == doctest::Approx(pcc_oracle(x, y)).epsilon(1e-12));
}

TEST_CASE("pcc affine invariance and sign flip") {
  const rng::Stream s(6, "stats.test", 1);
  std::vector<double> x(30), y(30), x2(30), yneg(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = s.normal(2 * i);
    y[i] = s.normal(2 * i + 1) + 0.5 * x[i];
    x2[i] = 3.0 * x[i] + 7.0;
    yneg[i] = -y[i];
  }
  const double base = pcc(x, y);
  CHECK(pcc(x2, y) == doctest::Approx(base).epsilon(1e-12));
  CHECK(pcc(x, yneg) == doctest::Approx(-base).epsilon(1e-12));
  CHECK(std::abs(base) <= 1.0);
}

TEST_CASE("pcc rejects degenerate input") {
  CHECK_THROWS_WITH_AS(pcc(v({1, 1, 1}), v({1, 2, 3})),
                       doctest::Contains("zero variance"),
                       std::runtime_error);
  CHECK_THROWS_AS(pcc(v({1}), v({2})), std::runtime_error);
  CHECK_THROWS_AS(pcc(v({1, 2}), v({1, 2, 3})), std::runtime_error);
}

TEST_CASE("fractional ranks average over tie spans") {
  // (10, 20, 20, 30) -> ranks (1, 2.5, 2.5, 4)
  const auto r = fractional_ranks(v({10, 20, 20, 30}));
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.5));
  CHECK(r[2] == doctest::Approx(2.5));
  CHECK(r[3] == doctest::Approx(4.0));
  // all equal -> all mid
  const auto r2 = fractional_ranks(v({7, 7, 7}));
  CHECK(r2[0] == doctest::Approx(2.0));
  CHECK(r2[2] == doctest::Approx(2.0));
}

TEST_CASE("srcc hand cases") {
  // monotone map: exact 1
  CHECK(srcc(v({1, 2, 3}), v({1, 4, 9})) == doctest::Approx(1.0).epsilon(1e-12));
  // ties on both sides, still perfectly concordant
  CHECK(srcc(v({1, 2, 2, 3}), v({10, 20, 20, 30})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Sum d^2 formula: d = (0,1,-1,0) -> 1 - 6*2/(4*15) = 0.8
  CHECK(srcc(v({1, 2, 3, 4}), v({1, 3, 2, 4})) ==
        doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("srcc is invariant under strictly monotone transforms") {
  const rng::Stream s(8, "stats.test", 2);
  std::vector<double> x(40), y(40), ex(40), cy(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x[i] = s.normal(2 * i);
    y[i] = s.normal(2 * i + 1) + x[i];
    ex[i] = std::exp(x[i]);          // strictly increasing
    cy[i] = y[i] * y[i] * y[i] + 2;  // strictly increasing
  }
  const double base = srcc(x, y);
  CHECK(srcc(ex, y) == doctest::Approx(base).epsilon(1e-12));
  CHECK(srcc(x, cy) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("metric table reading and pairwise-missing correlation") {
  // 13 rows x 10 metric columns, two missing cells, mirroring the shape
  // of a per-model metric table. Target column is "target"; column m0 is
  // an exact linear function of it.
  const std::string path = temp_path("fidkit_table.csv");
  std::string csv = "model,target";
  for (int c = 0; c < 9; ++c) csv += ",m" + std::to_string(c);
  csv += "\n";
  const rng::Stream s(9, "stats.table", 0);
  std::vector<std::vector<double>> cols(10, std::vector<double>(13));
  for (int r = 0; r < 13; ++r) {
    cols[0][r] = double(r) + 0.25 * s.normal(100 + r);
    for (int c = 1; c < 10; ++c)
      cols[c][r] = c == 1 ? 2.0 * cols[0][r] + 1.0
                          : s.normal(std::uint64_t(1000 * c + r));
  }
  for (int r = 0; r < 13; ++r) {
    csv += "vae" + std::to_string(r);
    for (int c = 0; c < 10; ++c) {
      // missing: m2 at row 3, m7 at row 11
      const bool missing = (c == 3 && r == 3) || (c == 8 && r == 11);
      csv += missing ? "," : ("," + std::to_string(cols[c][r]));
    }
    csv += "\n";
  }
  spit(path, csv);

  const MetricTable table = read_metric_table(path);
  REQUIRE(table.row_labels.size() == 13);
  REQUIRE(table.col_labels.size() == 10);
  CHECK(table.row_labels[0] == "vae0");
  CHECK(!table.value(3, table.col_index("m2")).has_value());
  CHECK(!table.value(11, table.col_index("m7")).has_value());
  CHECK(table.value(0, 0).has_value());
  CHECK_THROWS_WITH_AS(table.col_index("nope"),
                       doctest::Contains("unknown column"),
                       std::runtime_error);

  const auto rows = correlate_table(table, "target");
  REQUIRE(rows.size() == 9);  // every column except the target
  for (const auto& c : rows) {
    // per-pair oracle over the present rows
    std::vector<double> xs, ys;
    const std::size_t tc = table.col_index("target");
    const std::size_t cc = table.col_index(c.metric);
    for (std::size_t r = 0; r < 13; ++r) {
      const auto a = table.value(r, tc);
      const auto b = table.value(r, cc);
      if (a && b) {
        xs.push_back(*a);
        ys.push_back(*b);
      }
    }
    CHECK(c.n == xs.size());
    CHECK(c.pcc == doctest::Approx(pcc(xs, ys)).epsilon(1e-12));
    CHECK(c.srcc == doctest::Approx(srcc(xs, ys)).epsilon(1e-12));
  }
  // effective n: 12 for the two columns with a hole, 13 elsewhere
  for (const auto& c : rows) {
    if (c.metric == "m2" || c.metric == "m7")
      CHECK(c.n == 12);
    else
      CHECK(c.n == 13);
  }
  // the constructed linear column correlates exactly
  for (const auto& c : rows)
    if (c.metric == "m0") {
      CHECK(c.pcc == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(c.srcc == doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK_THROWS_AS(correlate_table(table, "absent"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("correlate_table rejects an all-missing pair") {
  const std::string path = temp_path("fidkit_allmiss.csv");
  spit(path, "model,target,m\nr0,1,\nr1,2,\nr2,3,\n");
  const MetricTable t = read_metric_table(path);
  CHECK_THROWS_AS(correlate_table(t, "target"), std::runtime_error);
  std::filesystem::remove(path);
}
