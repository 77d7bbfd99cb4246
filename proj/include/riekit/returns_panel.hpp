#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace riekit {

/// A T x n block of daily returns with a date axis and asset identifiers.
/// Missing cells are carried as NaN between ingestion and universe
/// filtering; everything downstream of filter_universe sees finite values
/// only.
struct ReturnsPanel {
    Eigen::MatrixXd values;           // T x n, fractional daily returns
    std::vector<std::string> dates;   // length T, ISO-8601, strictly increasing
    std::vector<std::string> assets;  // length n, unique identifiers

    Eigen::Index n_days() const { return values.rows(); }
    Eigen::Index n_assets() const { return values.cols(); }
    bool has_missing() const { return values.hasNaN(); }
};

/// Checks shape, label, and ordering invariants. With allow_missing =
/// false also rejects NaN/Inf entries (the post-ingestion-cleanup state).
void validate_panel(const ReturnsPanel& panel, bool allow_missing = false);

}  // namespace riekit
