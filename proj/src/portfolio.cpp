#include "riekit/portfolio.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace riekit {

PortfolioWeights gmv_weights(const CovarianceMatrix& precision, std::string method) {
    const Eigen::Index n = precision.values.rows();
    if (n < 1 || precision.values.cols() != n) {
        throw std::invalid_argument("gmv_weights: precision matrix must be square and nonempty");
    }
    Eigen::VectorXd row_sums = precision.values.rowwise().sum();
    const double total = row_sums.sum();
    if (std::abs(total) <= 1e-14) {
        throw std::domain_error("gmv_weights: precision entries sum to zero; "
                                "normalization is degenerate");
    }
    PortfolioWeights out;
    out.weights = row_sums / total;
    // Kill the last-ulp drift so the budget constraint holds exactly.
    out.weights /= out.weights.sum();
    out.method = std::move(method);
    return out;
}

double realized_variance(const PortfolioWeights& w, const CovarianceMatrix& sigma_out) {
    if (w.weights.size() != sigma_out.values.rows()) {
        throw std::invalid_argument("realized_variance: dimension mismatch");
    }
    return w.weights.dot(sigma_out.values * w.weights);
}

double annualized_volatility(double daily_variance) {
    if (daily_variance < 0.0) {
        throw std::domain_error("annualized_volatility: variance must be nonnegative");
    }
    return std::sqrt(kTradingDaysPerYear * daily_variance);
}

}  // namespace riekit
