#include "riekit/rie.hpp"

#include <stdexcept>
#include <string>

namespace riekit {

std::string_view to_string(RieMethod method) {
    switch (method) {
        case RieMethod::Sample: return "sample";
        case RieMethod::Oracle: return "oracle";
        case RieMethod::QpOptimal: return "qp_optimal";
        case RieMethod::QpOptimalSorted: return "qp_optimal_sorted";
    }
    return "unknown";
}

Eigen::VectorXd oracle_eigenvalues(const EigenSystem& eig_in, const CovarianceMatrix& sigma_out) {
    const Eigen::Index n = eig_in.eigenvectors.rows();
    if (sigma_out.values.rows() != n || sigma_out.values.cols() != n) {
        throw std::invalid_argument("oracle_eigenvalues: dimension mismatch (basis " +
                                    std::to_string(n) + ", sigma_out " +
                                    std::to_string(sigma_out.values.rows()) + ")");
    }
    Eigen::VectorXd lambdas(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        lambdas(k) = eig_in.eigenvectors.col(k).dot(sigma_out.values * eig_in.eigenvectors.col(k));
    }
    return lambdas;
}

RieSpec sample_rie(const EigenSystem& eig_in) {
    RieSpec spec;
    spec.basis = eig_in.eigenvectors;
    spec.lambdas = eig_in.eigenvalues;
    spec.label = RieMethod::Sample;
    return spec;
}

RieSpec oracle_rie(const EigenSystem& eig_in, const CovarianceMatrix& sigma_out) {
    RieSpec spec;
    spec.basis = eig_in.eigenvectors;
    spec.lambdas = oracle_eigenvalues(eig_in, sigma_out);
    // Quadratic forms of a PSD matrix; clip the roundoff-negative tail so
    // the RieSpec nonnegativity invariant holds exactly.
    for (Eigen::Index k = 0; k < spec.lambdas.size(); ++k) {
        if (spec.lambdas(k) < 0.0) {
            spec.lambdas(k) = 0.0;
        }
    }
    spec.label = RieMethod::Oracle;
    return spec;
}

}  // namespace riekit
