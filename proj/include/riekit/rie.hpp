#pragma once

#include <string_view>

#include "riekit/eigen_system.hpp"

namespace riekit {

enum class RieMethod { Sample, Oracle, QpOptimal, QpOptimalSorted };

std::string_view to_string(RieMethod method);

/// A rotationally invariant estimator: a fixed eigenvector basis paired
/// with a replacement eigenvalue vector.
struct RieSpec {
    Eigen::MatrixXd basis;     // n x n orthonormal, in-sample eigenvectors
    Eigen::VectorXd lambdas;   // length n, filtered eigenvalues, >= 0
    RieMethod label = RieMethod::Sample;
};

/// lambda_k = v_k' Sigma_out v_k for each in-sample eigenvector v_k. The
/// result stays paired with the in-sample eigenvector order (descending
/// in-sample eigenvalues) and is not re-sorted.
Eigen::VectorXd oracle_eigenvalues(const EigenSystem& eig_in, const CovarianceMatrix& sigma_out);

/// The identity filter: keeps the in-sample eigenvalues unchanged.
RieSpec sample_rie(const EigenSystem& eig_in);

/// The filter minimizing the element-wise squared distance to sigma_out
/// over all estimators sharing eig_in's basis.
RieSpec oracle_rie(const EigenSystem& eig_in, const CovarianceMatrix& sigma_out);

}  // namespace riekit
