#pragma once

#include <string>

#include "riekit/covariance.hpp"

namespace riekit {

inline constexpr double kTradingDaysPerYear = 252.0;

/// Capital fractions summing to one; short positions allowed.
struct PortfolioWeights {
    Eigen::VectorXd weights;
    std::string method;
};

/// Global-minimum-variance weights from a precision (inverse covariance)
/// matrix: w_k = (row sum k) / (total sum). Scale invariant in the
/// precision matrix.
PortfolioWeights gmv_weights(const CovarianceMatrix& precision, std::string method = "");

/// w' Sigma_out w.
double realized_variance(const PortfolioWeights& w, const CovarianceMatrix& sigma_out);

/// sqrt(252 * daily_variance), fractional units per year.
double annualized_volatility(double daily_variance);

}  // namespace riekit
