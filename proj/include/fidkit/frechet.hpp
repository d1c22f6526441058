#pragma once

#include <Eigen/Dense>

#include "fidkit/tensor.hpp"

namespace fidkit {

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetric, unbiased (n-1 divisor)
  std::size_t n = 0;
};

// Two-pass float64 moment fit: column means first, then centered outer
// products, divisor n-1.
GaussianStats fit_gaussian(const TensorSet& features);

// Symmetric PSD square root by eigendecomposition; negative eigenvalues
// are clamped to 0 (with a diagnostic when they exceed roundoff scale).
// Non-convergence is retried once with 1e-10*trace(A)/D diagonal jitter.
Eigen::MatrixXd sqrtm_spd(const Eigen::MatrixXd& a);

// ||mu1-mu2||^2 + tr(S1 + S2 - 2*sqrtm(S1^{1/2} S2 S1^{1/2})), clamped
// to 0 when roundoff drives it negative.
double frechet_distance(const GaussianStats& g1, const GaussianStats& g2);

double fid(const TensorSet& features_a, const TensorSet& features_b);

}  // namespace fidkit
