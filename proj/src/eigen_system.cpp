#include "riekit/eigen_system.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace riekit {

namespace {

// Scale each column so its entry of largest absolute value is positive,
// ties broken by lowest index. Makes decompositions deterministic.
void apply_sign_convention(Eigen::MatrixXd& vectors) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, k));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        if (vectors(pivot, k) < 0.0) {
            vectors.col(k) = -vectors.col(k);
        }
    }
}

void check_orthonormal(const Eigen::MatrixXd& eigvecs, double tol) {
    if (eigvecs.rows() != eigvecs.cols()) {
        throw std::invalid_argument("eigenvector matrix must be square");
    }
    const Eigen::Index n = eigvecs.cols();
    const double err =
        (eigvecs.transpose() * eigvecs - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > tol) {
        throw std::invalid_argument("eigenvector columns not orthonormal (max deviation " +
                                    std::to_string(err) + ")");
    }
}

}  // namespace

EigenSystem eigendecompose(const CovarianceMatrix& cov) {
    const double scale = cov.values.size() > 0 ? cov.values.cwiseAbs().maxCoeff() : 0.0;
    const double asym = (cov.values - cov.values.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1e-300)) {
        throw std::invalid_argument("eigendecompose: input asymmetric beyond tolerance (" +
                                    std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov.values);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecompose: symmetric eigensolver did not converge");
    }
    const Eigen::Index n = cov.values.rows();
    EigenSystem eig;
    eig.eigenvalues.resize(n);
    eig.eigenvectors.resize(n, n);
    // Eigen returns ascending order; flip to descending.
    for (Eigen::Index k = 0; k < n; ++k) {
        eig.eigenvalues(k) = solver.eigenvalues()(n - 1 - k);
        eig.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    apply_sign_convention(eig.eigenvectors);
    check_orthonormal(eig.eigenvectors, 1e-10);
    return eig;
}

void validate_eigen_system(const EigenSystem& eig, const CovarianceMatrix& source) {
    check_orthonormal(eig.eigenvectors, 1e-10);
    for (Eigen::Index k = 1; k < eig.eigenvalues.size(); ++k) {
        if (eig.eigenvalues(k) > eig.eigenvalues(k - 1)) {
            throw std::invalid_argument("EigenSystem: eigenvalues not nonincreasing");
        }
    }
    const Eigen::MatrixXd rebuilt = eig.eigenvectors *
                                    eig.eigenvalues.asDiagonal() *
                                    eig.eigenvectors.transpose();
    const double scale = std::max(source.values.cwiseAbs().maxCoeff(), 1e-300);
    const double err = (rebuilt - source.values).cwiseAbs().maxCoeff();
    if (err > 1e-9 * scale) {
        throw std::invalid_argument("EigenSystem: reconstruction error " + std::to_string(err) +
                                    " exceeds 1e-9 relative tolerance");
    }
}

CovarianceMatrix reconstruct_rie(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& lambdas) {
    check_orthonormal(eigvecs, 1e-10);
    if (lambdas.size() != eigvecs.cols()) {
        throw std::invalid_argument("reconstruct_rie: eigenvalue count mismatch");
    }
    for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
        if (!std::isfinite(lambdas(k)) || lambdas(k) < 0.0) {
            throw std::domain_error("reconstruct_rie: eigenvalue " + std::to_string(k) +
                                    " is negative or non-finite");
        }
    }
    Eigen::MatrixXd m = eigvecs * lambdas.asDiagonal() * eigvecs.transpose();
    m = 0.5 * (m + m.transpose());
    CovarianceMatrix out;
    out.values = std::move(m);
    return out;
}

CovarianceMatrix inverse_rie(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& lambdas) {
    check_orthonormal(eigvecs, 1e-10);
    if (lambdas.size() != eigvecs.cols()) {
        throw std::invalid_argument("inverse_rie: eigenvalue count mismatch");
    }
    Eigen::VectorXd inv(lambdas.size());
    for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas(k) > 0.0)) {
            throw std::domain_error("inverse_rie: eigenvalue " + std::to_string(k) +
                                    " not strictly positive; estimator is singular");
        }
        inv(k) = 1.0 / lambdas(k);
    }
    Eigen::MatrixXd m = eigvecs * inv.asDiagonal() * eigvecs.transpose();
    m = 0.5 * (m + m.transpose());
    CovarianceMatrix out;
    out.values = std::move(m);
    return out;
}

CovarianceMatrix pseudo_inverse(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& lambdas,
                                double rank_tol) {
    check_orthonormal(eigvecs, 1e-10);
    if (lambdas.size() != eigvecs.cols()) {
        throw std::invalid_argument("pseudo_inverse: eigenvalue count mismatch");
    }
    const double lam_max = std::max(lambdas.maxCoeff(), 0.0);
    const double cutoff = rank_tol * lam_max;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambdas.size());
    for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
        if (lambdas(k) > cutoff && lambdas(k) > 0.0) {
            inv(k) = 1.0 / lambdas(k);
        }
    }
    Eigen::MatrixXd m = eigvecs * inv.asDiagonal() * eigvecs.transpose();
    m = 0.5 * (m + m.transpose());
    CovarianceMatrix out;
    out.values = std::move(m);
    return out;
}

CovarianceMatrix pseudo_inverse(const CovarianceMatrix& cov, double rank_tol) {
    EigenSystem eig = eigendecompose(cov);
    return pseudo_inverse(eig.eigenvectors, eig.eigenvalues, rank_tol);
}

}  // namespace riekit
