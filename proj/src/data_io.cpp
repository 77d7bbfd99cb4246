#include "riekit/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "riekit/rng.hpp"

namespace riekit {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

std::string trimmed(const std::string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

bool looks_like_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

double parse_return_cell(const std::string& cell, long line_no) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc{} || result.ptr != last) {
        throw std::runtime_error("load_returns_csv: line " + std::to_string(line_no) +
                                 ": cannot parse return value '" + cell + "'");
    }
    return value;
}

// Columns whose missing-or-zero fraction stays at or below the threshold.
// NaN marks missing; exact 0.0 counts as a stale price.
std::vector<Eigen::Index> columns_within_missing_budget(const Eigen::MatrixXd& values,
                                                        double max_missing_frac) {
    std::vector<Eigen::Index> kept;
    const Eigen::Index rows = values.rows();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        long bad = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double v = values(i, j);
            if (std::isnan(v) || v == 0.0) ++bad;
        }
        const double frac = static_cast<double>(bad) / static_cast<double>(rows);
        if (frac <= max_missing_frac) kept.push_back(j);
    }
    return kept;
}

void zero_fill(Eigen::MatrixXd& values) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            if (std::isnan(values(i, j))) values(i, j) = 0.0;
        }
    }
}

// Greedy pairwise dedup in column order: scanning pairs (i, j) with i < j,
// the later column of every over-correlated pair is dropped. corr_block
// selects the rows over which correlations are measured. Returns kept
// column indices, ascending.
std::vector<Eigen::Index> greedy_corr_keep(const Eigen::MatrixXd& corr_block,
                                           double max_corr) {
    const Eigen::Index n = corr_block.cols();
    Eigen::MatrixXd centered = corr_block.rowwise() - corr_block.colwise().mean();
    Eigen::VectorXd norms = centered.colwise().norm();

    std::vector<bool> alive(static_cast<std::size_t>(n), true);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!alive[static_cast<std::size_t>(j)]) continue;
            if (!(norms(i) > 0.0) || !(norms(j) > 0.0)) continue;
            const double corr = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
            if (corr > max_corr) alive[static_cast<std::size_t>(j)] = false;
        }
    }
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (alive[static_cast<std::size_t>(j)]) kept.push_back(j);
    }
    return kept;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& values,
                               const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = values.col(cols[k]);
    }
    return out;
}

}  // namespace

ReturnsPanel load_returns_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("load_returns_csv: cannot open '" + path + "'");
    }

    std::string line;
    long line_no = 0;

    // Header: `date` followed by the asset identifiers.
    if (!std::getline(file, line)) {
        throw std::runtime_error("load_returns_csv: '" + path + "' is empty");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_fields(line);
    for (auto& field : header) field = trimmed(field);
    if (header.empty() || header[0] != "date") {
        throw std::runtime_error("load_returns_csv: line 1: first header field must be 'date'");
    }
    if (header.size() < 2) {
        throw std::runtime_error("load_returns_csv: line 1: no asset columns");
    }
    std::vector<std::string> assets(header.begin() + 1, header.end());
    {
        std::vector<std::string> sorted_assets = assets;
        std::sort(sorted_assets.begin(), sorted_assets.end());
        const auto dup = std::adjacent_find(sorted_assets.begin(), sorted_assets.end());
        if (dup != sorted_assets.end()) {
            throw std::runtime_error("load_returns_csv: duplicate asset column '" + *dup + "'");
        }
    }
    const std::size_t n_fields = header.size();

    std::vector<std::string> dates;
    std::vector<std::vector<double>> rows;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != n_fields) {
            throw std::runtime_error("load_returns_csv: line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(n_fields) +
                                     " fields, got " + std::to_string(fields.size()));
        }
        const std::string date = trimmed(fields[0]);
        if (!looks_like_iso_date(date)) {
            throw std::runtime_error("load_returns_csv: line " + std::to_string(line_no) +
                                     ": malformed date '" + date + "'");
        }
        std::vector<double> row(assets.size());
        for (std::size_t j = 0; j < assets.size(); ++j) {
            const std::string cell = trimmed(fields[j + 1]);
            row[j] = cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : parse_return_cell(cell, line_no);
        }
        dates.push_back(date);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error("load_returns_csv: '" + path + "' has no data rows");
    }

    // Sort by date (ISO-8601 sorts lexicographically) and reject repeats.
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (dates[order[k]] == dates[order[k - 1]]) {
            throw std::runtime_error("load_returns_csv: duplicate date " + dates[order[k]]);
        }
    }

    ReturnsPanel panel;
    panel.assets = std::move(assets);
    panel.dates.resize(order.size());
    panel.values.resize(static_cast<Eigen::Index>(order.size()),
                        static_cast<Eigen::Index>(panel.assets.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        panel.dates[i] = dates[order[i]];
        for (std::size_t j = 0; j < panel.assets.size(); ++j) {
            panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[order[i]][j];
        }
    }
    return panel;
}

ReturnsPanel filter_universe(const ReturnsPanel& panel, double max_missing_frac,
                             double max_corr) {
    if (panel.n_days() < 1 || panel.n_assets() < 1) {
        throw std::invalid_argument("filter_universe: empty panel");
    }
    if (!(max_missing_frac >= 0.0) || !(max_corr > 0.0)) {
        throw std::invalid_argument("filter_universe: thresholds must be positive");
    }

    const std::vector<Eigen::Index> stage1 =
        columns_within_missing_budget(panel.values, max_missing_frac);
    Eigen::MatrixXd survivors = select_columns(panel.values, stage1);
    zero_fill(survivors);
    const std::vector<Eigen::Index> stage2 = greedy_corr_keep(survivors, max_corr);

    if (stage2.size() < 2) {
        throw std::runtime_error("filter_universe: only " + std::to_string(stage2.size()) +
                                 " of " + std::to_string(panel.n_assets()) +
                                 " assets survive filtering (need at least 2)");
    }

    ReturnsPanel out;
    out.dates = panel.dates;
    out.values.resize(panel.n_days(), static_cast<Eigen::Index>(stage2.size()));
    out.assets.resize(stage2.size());
    for (std::size_t k = 0; k < stage2.size(); ++k) {
        const Eigen::Index original = stage1[static_cast<std::size_t>(stage2[k])];
        out.values.col(static_cast<Eigen::Index>(k)) = survivors.col(stage2[k]);
        out.assets[k] = panel.assets[static_cast<std::size_t>(original)];
    }
    return out;
}

WindowPair sample_window_pair(const ReturnsPanel& panel, long delta_in, long delta_out,
                              long n, std::uint64_t rng_seed) {
    if (delta_in < 1 || delta_out < 1) {
        throw std::invalid_argument("sample_window_pair: window lengths must be positive");
    }
    if (n < 2) {
        throw std::invalid_argument("sample_window_pair: need at least 2 assets");
    }
    const long t_days = static_cast<long>(panel.n_days());
    if (t_days < delta_in + delta_out) {
        throw std::runtime_error("sample_window_pair: history too short: need " +
                                 std::to_string(delta_in + delta_out) + " days, panel has " +
                                 std::to_string(t_days));
    }

    Rng rng(rng_seed);
    const long t = delta_in + static_cast<long>(rng.uniform_below(
                                  static_cast<std::uint64_t>(t_days - delta_in - delta_out + 1)));

    // Universe filtering on this draw's window: missing-or-zero budget over
    // the combined delta_in + delta_out rows, correlation dedup over the
    // in-sample rows only.
    Eigen::MatrixXd combined = panel.values.middleRows(t - delta_in, delta_in + delta_out);
    const std::vector<Eigen::Index> stage1 = columns_within_missing_budget(combined, 0.20);
    Eigen::MatrixXd survivors = select_columns(combined, stage1);
    zero_fill(survivors);
    const std::vector<Eigen::Index> stage2 =
        greedy_corr_keep(survivors.topRows(delta_in), 0.95);

    if (static_cast<long>(stage2.size()) < n) {
        throw std::runtime_error("sample_window_pair: universe after filtering has " +
                                 std::to_string(stage2.size()) + " assets, need " +
                                 std::to_string(n));
    }

    std::vector<std::size_t> picks = rng.sample_without_replacement(
        stage2.size(), static_cast<std::size_t>(n));
    std::sort(picks.begin(), picks.end());

    WindowPair pair;
    pair.t_index = t;
    pair.stationarized = false;
    pair.in_sample.values.resize(delta_in, n);
    pair.out_sample.values.resize(delta_out, n);
    pair.asset_subset.resize(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
        const Eigen::Index within = stage2[picks[static_cast<std::size_t>(k)]];
        const Eigen::Index original = stage1[static_cast<std::size_t>(within)];
        pair.in_sample.values.col(k) = survivors.col(within).head(delta_in);
        pair.out_sample.values.col(k) = survivors.col(within).tail(delta_out);
        pair.asset_subset[static_cast<std::size_t>(k)] =
            panel.assets[static_cast<std::size_t>(original)];
    }
    pair.in_sample.assets = pair.asset_subset;
    pair.out_sample.assets = pair.asset_subset;
    pair.in_sample.dates.assign(panel.dates.begin() + (t - delta_in), panel.dates.begin() + t);
    pair.out_sample.dates.assign(panel.dates.begin() + t, panel.dates.begin() + t + delta_out);
    return pair;
}

WindowPair stationarize(const WindowPair& pair, std::uint64_t rng_seed) {
    const Eigen::Index d_in = pair.in_sample.n_days();
    const Eigen::Index d_out = pair.out_sample.n_days();
    if (d_in < 1) {
        throw std::invalid_argument("stationarize: in-sample window is empty");
    }
    if (d_out < 1) {
        throw std::invalid_argument("stationarize: out-of-sample window is empty");
    }
    if (pair.in_sample.assets != pair.out_sample.assets) {
        throw std::invalid_argument("stationarize: windows disagree on the asset list");
    }
    const Eigen::Index n = pair.in_sample.n_assets();
    const Eigen::Index total = d_in + d_out;

    Eigen::MatrixXd pooled(total, n);
    pooled.topRows(d_in) = pair.in_sample.values;
    pooled.bottomRows(d_out) = pair.out_sample.values;
    std::vector<std::string> pooled_dates = pair.in_sample.dates;
    pooled_dates.insert(pooled_dates.end(), pair.out_sample.dates.begin(),
                        pair.out_sample.dates.end());

    std::vector<std::size_t> perm(static_cast<std::size_t>(total));
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(rng_seed);
    rng.shuffle(perm);

    WindowPair shuffled = pair;
    shuffled.stationarized = true;
    shuffled.in_sample.dates.resize(static_cast<std::size_t>(d_in));
    shuffled.out_sample.dates.resize(static_cast<std::size_t>(d_out));
    for (Eigen::Index r = 0; r < total; ++r) {
        const std::size_t src = perm[static_cast<std::size_t>(r)];
        if (r < d_in) {
            shuffled.in_sample.values.row(r) = pooled.row(static_cast<Eigen::Index>(src));
            shuffled.in_sample.dates[static_cast<std::size_t>(r)] = pooled_dates[src];
        } else {
            shuffled.out_sample.values.row(r - d_in) = pooled.row(static_cast<Eigen::Index>(src));
            shuffled.out_sample.dates[static_cast<std::size_t>(r - d_in)] = pooled_dates[src];
        }
    }
    return shuffled;
}

}  // namespace riekit
