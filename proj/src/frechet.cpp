#include "fidkit/frechet.hpp"

#include <iostream>
#include <stdexcept>

namespace fidkit {

namespace {

Eigen::MatrixXd to_double(const TensorSet& t) {
  return Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(
             t.data.data(), static_cast<Eigen::Index>(t.rows),
             static_cast<Eigen::Index>(t.cols))
      .cast<double>();
}

}  // namespace

GaussianStats fit_gaussian(const TensorSet& features) {
  if (features.rows < 2)
    throw std::runtime_error("covariance fit needs at least 2 rows, got " +
                             std::to_string(features.rows));
  const Eigen::MatrixXd x = to_double(features);
  GaussianStats g;
  g.n = features.rows;
  g.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) /
          static_cast<double>(features.rows - 1);
  return g;
}

Eigen::MatrixXd sqrtm_spd(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    const double jitter = 1e-10 * sym.trace() / double(sym.rows());
    Eigen::MatrixXd jittered = sym;
    jittered.diagonal().array() += jitter;
    es.compute(jittered);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition failed to converge");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  const double lam_max = lam.size() ? lam.maxCoeff() : 0.0;
  const double lam_min = lam.size() ? lam.minCoeff() : 0.0;
  if (lam_min < -1e-6 * std::max(lam_max, 0.0))
    std::cerr << "sqrtm_spd: clamping eigenvalue " << lam_min
              << " (max " << lam_max << ") — input is not numerically PSD\n";
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    lam[i] = lam[i] > 0.0 ? std::sqrt(lam[i]) : 0.0;
  return es.eigenvectors() * lam.asDiagonal() *
         es.eigenvectors().transpose();
}

double frechet_distance(const GaussianStats& g1, const GaussianStats& g2) {
  if (g1.mean.size() != g2.mean.size())
    throw std::runtime_error("dimension mismatch: " +
                             std::to_string(g1.mean.size()) + " vs " +
                             std::to_string(g2.mean.size()));
  const Eigen::MatrixXd s1 = sqrtm_spd(g1.cov);
  // S1^{1/2} S2 S1^{1/2} is symmetric PSD, so the whole computation stays
  // in real symmetric eigensolves.
  const Eigen::MatrixXd inner = s1 * g2.cov * s1;
  const Eigen::MatrixXd cross = sqrtm_spd(inner);
  const double mean_term = (g1.mean - g2.mean).squaredNorm();
  const double trace_term =
      g1.cov.trace() + g2.cov.trace() - 2.0 * cross.trace();
  const double d = mean_term + trace_term;
  return d > 0.0 ? d : 0.0;
}

double fid(const TensorSet& features_a, const TensorSet& features_b) {
  if (features_a.cols != features_b.cols)
    throw std::runtime_error("feature dim mismatch: " +
                             std::to_string(features_a.cols) + " vs " +
                             std::to_string(features_b.cols));
  return frechet_distance(fit_gaussian(features_a), fit_gaussian(features_b));
}

}  // namespace fidkit
