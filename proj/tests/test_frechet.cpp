#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fidkit/frechet.hpp"
#include "fidkit/rng.hpp"

using namespace fidkit;

namespace {

TensorSet gaussian_samples(std::uint64_t seed, std::size_t n, std::size_t d,
                           const std::vector<double>& mean_shift = {}) {
  TensorSet t(n, d);
  const rng::Stream s(seed, "frechet.test", 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double shift = mean_shift.empty() ? 0.0 : mean_shift[j];
      t.at(i, j) = static_cast<float>(s.normal(i * d + j) + shift);
    }
  return t;
}

Eigen::MatrixXd random_spd(std::uint64_t seed, int d) {
  const rng::Stream s(seed, "frechet.spd", 0);
  Eigen::MatrixXd b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      b(i, j) = s.normal(std::uint64_t(i) * d + j);
  return b.transpose() * b;
}

}  // namespace

TEST_CASE("fit_gaussian two-point hand case") {
  TensorSet t(2, 2);
  t.at(1, 0) = 2.0f;
  t.at(1, 1) = 2.0f;
  const GaussianStats g = fit_gaussian(t);
  CHECK(g.n == 2);
  CHECK(g.mean(0) == doctest::Approx(1.0));
  CHECK(g.mean(1) == doctest::Approx(1.0));
  // unbiased: divisor 1 -> cov = [[2,2],[2,2]]
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(g.cov(i, j) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fit_gaussian of identical rows has zero covariance") {
  TensorSet t(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) t.at(i, j) = 1.5f;
  const GaussianStats g = fit_gaussian(t);
  CHECK(g.cov.norm() == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("fit_gaussian concentrates on the true moments") {
  const TensorSet t = gaussian_samples(21, 10000, 4);
  const GaussianStats g = fit_gaussian(t);
  for (int i = 0; i < 4; ++i) {
    CHECK(g.mean(i) == doctest::Approx(0.0).scale(1).epsilon(0.05));
    for (int j = 0; j < 4; ++j)
      CHECK(g.cov(i, j) ==
            doctest::Approx(i == j ? 1.0 : 0.0).scale(1).epsilon(0.1));
  }
}

TEST_CASE("fit_gaussian needs at least two rows") {
  CHECK_THROWS_AS(fit_gaussian(TensorSet(1, 3)), std::runtime_error);
}

TEST_CASE("sqrtm_spd diagonal and identity cases") {
  CHECK((sqrtm_spd(Eigen::MatrixXd::Identity(4, 4)) -
         Eigen::MatrixXd::Identity(4, 4))
            .norm() < 1e-12);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(2, 2);
  d2(0, 0) = 4.0;
  d2(1, 1) = 9.0;
  const Eigen::MatrixXd s = sqrtm_spd(d2);
  CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(s(0, 1)) < 1e-12);
}

TEST_CASE("sqrtm_spd reconstructs random SPD matrices") {
  for (int d : {64, 256}) {
    const Eigen::MatrixXd a = random_spd(31 + d, d);
    const Eigen::MatrixXd s = sqrtm_spd(a);
    CHECK((s - s.transpose()).norm() < 1e-8 * s.norm());  // symmetric
    CHECK((s * s - a).norm() / a.norm() < 1e-8);
  }
}

TEST_CASE("sqrtm_spd clamps small negative eigenvalues") {
  // rank-1 PSD perturbed slightly negative on the orthogonal direction
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, -1e-14;
  const Eigen::MatrixXd s = sqrtm_spd(a);
  CHECK(s(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s(1, 1) == doctest::Approx(0.0).scale(1).epsilon(1e-10));
}

TEST_CASE("frechet_distance analytic cases") {
  GaussianStats g1, g2;
  g1.mean = Eigen::VectorXd::Zero(2);
  g1.cov = Eigen::MatrixXd::Identity(2, 2);
  g1.n = 100;
  g2 = g1;

  SUBCASE("identical stats give zero") {
    CHECK(frechet_distance(g1, g2) == doctest::Approx(0.0).scale(1).epsilon(1e-8));
  }
  SUBCASE("pure mean displacement (3,4) gives 25 to 1e-10") {
    g2.mean << 3.0, 4.0;
    CHECK(frechet_distance(g1, g2) == doctest::Approx(25.0).epsilon(1e-10));
  }
  SUBCASE("pure covariance scaling 4I vs I gives 2 to 1e-10") {
    g1.cov = 4.0 * Eigen::MatrixXd::Identity(2, 2);
    // tr(4I + I - 2*sqrt(4I*..)) = 4+4+1+1 - 2*(2+2) = 2
    CHECK(frechet_distance(g1, g2) == doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("dimension mismatch is rejected") {
    g2.mean = Eigen::VectorXd::Zero(3);
    g2.cov = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(frechet_distance(g1, g2), std::runtime_error);
  }
}

TEST_CASE("translation moves only the mean term") {
  const TensorSet a = gaussian_samples(41, 500, 3);
  TensorSet b = gaussian_samples(42, 500, 3);
  const GaussianStats ga = fit_gaussian(a);
  GaussianStats gb = fit_gaussian(b);
  const double base = frechet_distance(ga, gb);
  const double base_mean = (ga.mean - gb.mean).squaredNorm();
  // shift every row of b by c
  const std::vector<double> c = {0.5, -1.25, 2.0};
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      b.at(i, j) = static_cast<float>(double(b.at(i, j)) + c[j]);
  GaussianStats gb2 = fit_gaussian(b);
  const double shifted = frechet_distance(ga, gb2);
  const double shifted_mean = (ga.mean - gb2.mean).squaredNorm();
  CHECK(shifted - base ==
        doctest::Approx(shifted_mean - base_mean).epsilon(1e-8));
}

TEST_CASE("fid of a set with itself is at the noise floor") {
  const TensorSet a = gaussian_samples(51, 64, 8);
  CHECK(fid(a, a) < 1e-6);
}

TEST_CASE("fid recovers a known mean displacement") {
  // b shifted by mu with ||mu||^2 = 25; sampling bias estimated from two
  // independent null resamples at the same size
  const std::vector<double> mu = {3.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0};
  const std::size_t n = 10000;
  const TensorSet a = gaussian_samples(61, n, 8);
  const TensorSet b = gaussian_samples(62, n, 8, mu);
  const TensorSet null_b = gaussian_samples(63, n, 8);
  const double bias = fid(a, null_b);  // distance between equal laws
  const double got = fid(a, b);
  CHECK(got == doctest::Approx(25.0 + bias).epsilon(0.05));
}

TEST_CASE("fid is symmetric") {
  const TensorSet a = gaussian_samples(71, 300, 6);
  const TensorSet b = gaussian_samples(72, 400, 6,
                                       {1.0, 0.0, -1.0, 0.5, 0.0, 2.0});
  const double ab = fid(a, b);
  const double ba = fid(b, a);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
}

TEST_CASE("fid rejects mismatched dims") {
  CHECK_THROWS_AS(fid(TensorSet(4, 3), TensorSet(4, 2)), std::runtime_error);
}
