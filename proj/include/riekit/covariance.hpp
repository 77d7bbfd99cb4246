#pragma once

#include <Eigen/Dense>

#include "riekit/returns_panel.hpp"

namespace riekit {

/// Dense symmetric covariance matrix plus the observation count that
/// produced it (0 for matrices built analytically rather than estimated).
struct CovarianceMatrix {
    Eigen::MatrixXd values;       // n x n, symmetric
    Eigen::Index sample_size = 0;
};

/// Wraps a matrix as a CovarianceMatrix after checking symmetry to within
/// 1e-12 relative tolerance; the stored matrix is exactly symmetrized.
CovarianceMatrix make_covariance(const Eigen::MatrixXd& values, Eigen::Index sample_size = 0);

/// Full invariant check (symmetry plus smallest eigenvalue >= -1e-10 times
/// the largest). Costs an eigendecomposition; intended for tests and
/// ingestion boundaries.
void validate_covariance(const CovarianceMatrix& cov);

/// Sample covariance with 1/T normalization. With demean = true, column
/// means are subtracted first. The 1/T (rather than 1/(T-1)) constant is a
/// documented convention: GMV weights and the eigenvalue programs are
/// invariant to a global scale, so it affects only reported volatilities.
CovarianceMatrix compute_covariance(const ReturnsPanel& panel, bool demean);

/// Element-wise sum of squared differences between two equally sized
/// matrices. Symmetric in its arguments, zero iff the matrices are equal.
double frobenius_cost(const CovarianceMatrix& a, const CovarianceMatrix& b);

}  // namespace riekit
