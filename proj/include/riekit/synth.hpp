#pragma once

#include <cstdint>
#include <limits>

#include "riekit/covariance.hpp"
#include "riekit/returns_panel.hpp"

namespace riekit {

/// Linear factor market r_t = B_t f_t + eps_t. With loading_drift = 0 the
/// loading matrix is fixed and the series is stationary; with drift > 0 the
/// loadings rotate a little every day (a seeded sweep of Givens rotations
/// over a random pairing of the asset coordinates), so the population eigenvectors
/// slowly turn and any calibration window looks at a basis that is already
/// going stale.
struct MarketModel {
    long n_assets = 20;
    long n_factors = 3;
    double loading_drift = 0.0;  // in [0, 1]: fraction of a quarter turn per 250 days
    double idio_vol = 0.01;      // per-asset idiosyncratic daily volatility
    double factor_vol = 0.02;    // common daily volatility of each factor
    double tail_dof = std::numeric_limits<double>::infinity();  // inf = Gaussian
    std::uint64_t seed = 0;
};

/// Field sanity: 2 <= n_assets, 0 <= n_factors < n_assets, positive
/// volatilities, drift in [0, 1], tail_dof > 2 (finite variance) or inf.
void validate_model(const MarketModel& model);

/// t_days x n_assets panel of daily returns, deterministic per model.seed.
/// Draws are variance-normalized so tail_dof changes the shape of the
/// distribution, not the covariance.
ReturnsPanel generate_returns(const MarketModel& model, long t_days);

/// Ground-truth covariance of the returns generated for a given day:
/// B_day diag(factor_vol^2) B_day' + diag(idio_vol^2). The loading
/// rotations are replayed from their own seeded stream, so this never
/// perturbs (and is never perturbed by) the return draws.
CovarianceMatrix population_covariance(const MarketModel& model, long day);

}  // namespace riekit
