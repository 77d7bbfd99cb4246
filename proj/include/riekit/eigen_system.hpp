#pragma once

#include <Eigen/Dense>

#include "riekit/covariance.hpp"

namespace riekit {

/// Eigenvalues (sorted descending) and orthonormal eigenvectors of a
/// symmetric matrix; column k of eigenvectors pairs with eigenvalues[k].
struct EigenSystem {
    Eigen::VectorXd eigenvalues;   // length n, nonincreasing
    Eigen::MatrixXd eigenvectors;  // n x n, orthonormal columns
};

/// Spectral decomposition of a symmetric matrix. Output is deterministic:
/// eigenvalues descending, and each eigenvector scaled so that its entry of
/// largest absolute value is positive (ties broken by lowest index).
/// Throws on input asymmetric beyond 1e-12 relative tolerance.
EigenSystem eigendecompose(const CovarianceMatrix& cov);

/// Orthonormality / reconstruction invariant check for tests.
void validate_eigen_system(const EigenSystem& eig, const CovarianceMatrix& source);

/// Rebuilds sum_k lambdas[k] * v_k v_k^T from an orthonormal basis and a
/// vector of nonnegative replacement eigenvalues.
CovarianceMatrix reconstruct_rie(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& lambdas);

/// Inverse estimator sum_k (1 / lambdas[k]) * v_k v_k^T. All lambdas must
/// be strictly positive.
CovarianceMatrix inverse_rie(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& lambdas);

inline constexpr double kDefaultRankTol = 1e-10;

/// Moore-Penrose inverse of a symmetric PSD matrix, zeroing the
/// reciprocals of eigenvalues at or below rank_tol times the largest.
CovarianceMatrix pseudo_inverse(const CovarianceMatrix& cov, double rank_tol = kDefaultRankTol);

/// Same, reusing an existing decomposition paired with an eigenvalue
/// vector. Useful when the caller already holds the eigensystem or wants a
/// pseudo-inverse in a fixed basis (e.g. an RIE with some zero eigenvalues).
CovarianceMatrix pseudo_inverse(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& lambdas,
                                double rank_tol = kDefaultRankTol);

}  // namespace riekit
