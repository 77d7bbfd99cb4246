#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riekit/returns_panel.hpp"

namespace riekit {

/// A calibration window and the test window that follows it, restricted to
/// a common asset subset. t_index is the position of the first
/// out-of-sample day in the source panel: in-sample rows occupy
/// [t_index - delta_in, t_index), out-of-sample rows [t_index,
/// t_index + delta_out). After stationarize() the day rows are shuffled
/// across the split, so in-sample dates no longer precede out-of-sample
/// dates.
struct WindowPair {
    ReturnsPanel in_sample;
    ReturnsPanel out_sample;
    long t_index = 0;
    std::vector<std::string> asset_subset;
    bool stationarized = false;
};

/// Parses a returns CSV: header row `date,ASSET,...`, first column
/// ISO-8601 dates, remaining cells decimal returns or empty for missing.
/// Rows come back sorted by date; duplicate dates are an error naming the
/// offending date, malformed content an error naming the line.
ReturnsPanel load_returns_csv(const std::string& path);

/// Universe cleaning: drops every asset whose missing-or-zero fraction
/// exceeds max_missing_frac, zero-fills the surviving gaps, then greedily
/// drops the later asset of every pair whose correlation exceeds max_corr.
/// Throws when fewer than two assets survive. Idempotent: imputation turns
/// missing cells into zeros, which the first stage counts identically.
ReturnsPanel filter_universe(const ReturnsPanel& panel, double max_missing_frac = 0.20,
                             double max_corr = 0.95);

/// Draws a window pair: the split position t uniformly over the valid
/// range [delta_in, T - delta_out], then an n-asset subset uniformly
/// without replacement from the filtered universe. The missing-or-zero
/// filter is evaluated on the combined delta_in + delta_out rows; the
/// correlation dedup on the in-sample rows only. Deterministic per seed.
WindowPair sample_window_pair(const ReturnsPanel& panel, long delta_in, long delta_out,
                              long n, std::uint64_t rng_seed);

/// Pools the delta_in + delta_out day rows of a pair, permutes whole days
/// uniformly at random, and re-splits into the first delta_in rows
/// (in-sample) and the rest. Cross-sectional structure within a day is
/// untouched, so the pooled covariance is exactly preserved.
WindowPair stationarize(const WindowPair& pair, std::uint64_t rng_seed);

}  // namespace riekit
