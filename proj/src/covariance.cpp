#include "riekit/covariance.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace riekit {

void validate_panel(const ReturnsPanel& panel, bool allow_missing) {
    const Eigen::Index t = panel.n_days();
    const Eigen::Index n = panel.n_assets();
    if (t < 2 || n < 2) {
        throw std::invalid_argument("ReturnsPanel: need T >= 2 and n >= 2, got T=" +
                                    std::to_string(t) + ", n=" + std::to_string(n));
    }
    if (static_cast<Eigen::Index>(panel.dates.size()) != t) {
        throw std::invalid_argument("ReturnsPanel: dates length does not match row count");
    }
    if (static_cast<Eigen::Index>(panel.assets.size()) != n) {
        throw std::invalid_argument("ReturnsPanel: assets length does not match column count");
    }
    for (std::size_t i = 1; i < panel.dates.size(); ++i) {
        if (!(panel.dates[i - 1] < panel.dates[i])) {
            throw std::invalid_argument("ReturnsPanel: dates not strictly increasing at row " +
                                        std::to_string(i) + " (" + panel.dates[i] + ")");
        }
    }
    std::set<std::string> seen(panel.assets.begin(), panel.assets.end());
    if (static_cast<Eigen::Index>(seen.size()) != n) {
        throw std::invalid_argument("ReturnsPanel: asset identifiers not unique");
    }
    if (!allow_missing) {
        if (!panel.values.allFinite()) {
            throw std::invalid_argument("ReturnsPanel: non-finite entry present after cleanup");
        }
    } else {
        // NaN markers are fine pre-cleanup, but infinities never are.
        if (panel.values.array().isInf().any()) {
            throw std::invalid_argument("ReturnsPanel: infinite entry present");
        }
    }
}

CovarianceMatrix make_covariance(const Eigen::MatrixXd& values, Eigen::Index sample_size) {
    if (values.rows() != values.cols()) {
        throw std::invalid_argument("CovarianceMatrix: matrix must be square, got " +
                                    std::to_string(values.rows()) + "x" +
                                    std::to_string(values.cols()));
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("CovarianceMatrix: non-finite entry");
    }
    const double scale = values.cwiseAbs().maxCoeff();
    const double asym = (values - values.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1e-300)) {
        throw std::invalid_argument("CovarianceMatrix: asymmetry " + std::to_string(asym) +
                                    " exceeds 1e-12 relative tolerance");
    }
    CovarianceMatrix cov;
    cov.values = 0.5 * (values + values.transpose());
    cov.sample_size = sample_size;
    return cov;
}

void validate_covariance(const CovarianceMatrix& cov) {
    make_covariance(cov.values, cov.sample_size);  // symmetry + finiteness
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov.values, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("CovarianceMatrix: eigenvalue computation failed");
    }
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(hi, 0.0)) {
        throw std::invalid_argument("CovarianceMatrix: not positive semi-definite (min eig " +
                                    std::to_string(lo) + ")");
    }
}

CovarianceMatrix compute_covariance(const ReturnsPanel& panel, bool demean) {
    const Eigen::Index t = panel.n_days();
    if (t < 2) {
        throw std::invalid_argument("compute_covariance: need at least 2 rows, got " +
                                    std::to_string(t));
    }
    if (!panel.values.allFinite()) {
        throw std::invalid_argument("compute_covariance: panel has missing or non-finite entries");
    }
    Eigen::MatrixXd x = panel.values;
    if (demean) {
        Eigen::RowVectorXd means = x.colwise().mean();
        x.rowwise() -= means;
    }
    Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(t);
    cov = 0.5 * (cov + cov.transpose());
    CovarianceMatrix out;
    out.values = std::move(cov);
    out.sample_size = t;
    return out;
}

double frobenius_cost(const CovarianceMatrix& a, const CovarianceMatrix& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
        throw std::invalid_argument("frobenius_cost: dimension mismatch (" +
                                    std::to_string(a.values.rows()) + " vs " +
                                    std::to_string(b.values.rows()) + ")");
    }
    return (a.values - b.values).squaredNorm();
}

}  // namespace riekit
