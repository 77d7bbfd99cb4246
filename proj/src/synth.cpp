#include "riekit/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "riekit/rng.hpp"

namespace riekit {

namespace {

// Independent per-purpose streams derived from the model seed, so replaying
// the loading path never consumes (or shifts) the return draws.
constexpr std::uint64_t kLoadingStream = 0xB0;
constexpr std::uint64_t kRotationStream = 0xB1;
constexpr std::uint64_t kReturnStream = 0xB2;

constexpr double kPi = 3.14159265358979323846;

std::string iso_date_for_day(long day) {
    using namespace std::chrono;
    const sys_days base = year{2000} / January / 1;
    const year_month_day ymd{base + days{day}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Eigen::MatrixXd initial_loadings(const MarketModel& model) {
    Eigen::MatrixXd b(model.n_assets, model.n_factors);
    if (model.n_factors == 0) return b;
    Rng rng(derive_seed(model.seed, kLoadingStream));
    b.col(0).setOnes();  // market mode: every asset loads equally on factor 0
    for (Eigen::Index k = 1; k < model.n_factors; ++k) {
        for (Eigen::Index i = 0; i < model.n_assets; ++i) {
            b(i, k) = 0.5 * rng.normal();
        }
    }
    return b;
}

// One day of drift: pair up the asset coordinates at random and rotate each
// pair of loading rows by a fixed small angle. Rotating a full sweep of
// disjoint planes (rather than a single plane) turns every direction at
// roughly the nominal daily rate independent of the number of assets.
void rotate_loadings(Eigen::MatrixXd& b, Rng& rotation_rng, double angle) {
    const Eigen::Index n = b.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
    rotation_rng.shuffle(order);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (std::size_t p = 0; p + 1 < order.size(); p += 2) {
        const Eigen::Index i = order[p];
        const Eigen::Index j = order[p + 1];
        const Eigen::RowVectorXd row_i = b.row(i);
        b.row(i) = c * row_i - s * b.row(j);
        b.row(j) = s * row_i + c * b.row(j);
    }
}

// Unit-variance draw with the configured tails: Student-t is rescaled by
// sqrt((dof - 2) / dof) so heavier tails do not inflate the covariance.
double unit_variance_draw(Rng& rng, double dof) {
    if (std::isinf(dof)) return rng.normal();
    return rng.student_t(dof) * std::sqrt((dof - 2.0) / dof);
}

}  // namespace

void validate_model(const MarketModel& model) {
    if (model.n_assets < 2) {
        throw std::invalid_argument("validate_model: n_assets must be at least 2");
    }
    if (model.n_factors < 0 || model.n_factors >= model.n_assets) {
        throw std::invalid_argument(
            "validate_model: n_factors must satisfy 0 <= n_factors < n_assets");
    }
    if (!(model.idio_vol > 0.0) || !(model.factor_vol > 0.0)) {
        throw std::invalid_argument("validate_model: volatilities must be positive");
    }
    if (!(model.loading_drift >= 0.0) || !(model.loading_drift <= 1.0)) {
        throw std::invalid_argument("validate_model: loading_drift must lie in [0, 1]");
    }
    if (!(model.tail_dof > 2.0)) {
        throw std::invalid_argument(
            "validate_model: tail_dof must exceed 2 (finite variance) or be infinite");
    }
}

ReturnsPanel generate_returns(const MarketModel& model, long t_days) {
    validate_model(model);
    if (t_days < 2) {
        throw std::invalid_argument("generate_returns: t_days must be at least 2");
    }

    Eigen::MatrixXd b = initial_loadings(model);
    Rng rotation_rng(derive_seed(model.seed, kRotationStream));
    Rng draw_rng(derive_seed(model.seed, kReturnStream));
    const double angle = model.loading_drift * (kPi / 2.0) / 250.0;

    ReturnsPanel panel;
    panel.values.resize(t_days, model.n_assets);
    panel.dates.resize(static_cast<std::size_t>(t_days));
    panel.assets.resize(static_cast<std::size_t>(model.n_assets));
    for (long j = 0; j < model.n_assets; ++j) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "A%03ld", j);
        panel.assets[static_cast<std::size_t>(j)] = buf;
    }

    Eigen::VectorXd f(model.n_factors);
    for (long t = 0; t < t_days; ++t) {
        if (t >= 1 && model.loading_drift > 0.0) {
            rotate_loadings(b, rotation_rng, angle);
        }
        for (Eigen::Index k = 0; k < model.n_factors; ++k) {
            f(k) = model.factor_vol * unit_variance_draw(draw_rng, model.tail_dof);
        }
        Eigen::VectorXd r = model.n_factors > 0
                                ? Eigen::VectorXd(b * f)
                                : Eigen::VectorXd::Zero(model.n_assets);
        for (Eigen::Index i = 0; i < model.n_assets; ++i) {
            r(i) += model.idio_vol * unit_variance_draw(draw_rng, model.tail_dof);
        }
        panel.values.row(t) = r.transpose();
        panel.dates[static_cast<std::size_t>(t)] = iso_date_for_day(t);
    }
    return panel;
}

CovarianceMatrix population_covariance(const MarketModel& model, long day) {
    validate_model(model);
    if (day < 0) {
        throw std::invalid_argument("population_covariance: day must be nonnegative");
    }

    Eigen::MatrixXd b = initial_loadings(model);
    if (model.loading_drift > 0.0) {
        Rng rotation_rng(derive_seed(model.seed, kRotationStream));
        const double angle = model.loading_drift * (kPi / 2.0) / 250.0;
        for (long t = 1; t <= day; ++t) {
            rotate_loadings(b, rotation_rng, angle);
        }
    }
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(model.n_assets, model.n_assets);
    if (model.n_factors > 0) {
        sigma = (model.factor_vol * model.factor_vol) * (b * b.transpose());
    }
    sigma.diagonal().array() += model.idio_vol * model.idio_vol;
    return make_covariance(sigma);
}

}  // namespace riekit
