#include "riekit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "riekit/covariance.hpp"
#include "riekit/eigen_system.hpp"
#include "riekit/portfolio.hpp"
#include "riekit/rie.hpp"
#include "riekit/rng.hpp"

namespace riekit {

namespace {

constexpr std::uint64_t kWindowSalt = 0xE0;
constexpr std::uint64_t kShuffleSalt = 0xE1;

std::string trimmed(const std::string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

long parse_long(const std::string& value, const std::string& key, long line_no) {
    long out = 0;
    const auto result = std::from_chars(value.data(), value.data() + value.size(), out);
    if (result.ec != std::errc{} || result.ptr != value.data() + value.size()) {
        throw std::runtime_error("load_config_file: line " + std::to_string(line_no) +
                                 ": key '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key, long line_no) {
    std::uint64_t out = 0;
    const auto result = std::from_chars(value.data(), value.data() + value.size(), out);
    if (result.ec != std::errc{} || result.ptr != value.data() + value.size()) {
        throw std::runtime_error("load_config_file: line " + std::to_string(line_no) +
                                 ": key '" + key + "' expects a nonnegative integer, got '" +
                                 value + "'");
    }
    return out;
}

double parse_double(const std::string& value, const std::string& key, long line_no) {
    if (value == "inf" || value == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    double out = 0.0;
    const auto result = std::from_chars(value.data(), value.data() + value.size(), out);
    if (result.ec != std::errc{} || result.ptr != value.data() + value.size()) {
        throw std::runtime_error("load_config_file: line " + std::to_string(line_no) +
                                 ": key '" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key, long line_no) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::runtime_error("load_config_file: line " + std::to_string(line_no) + ": key '" +
                             key + "' expects true/false, got '" + value + "'");
}

std::vector<long> parse_long_list(const std::string& value, const std::string& key,
                                  long line_no) {
    std::vector<long> out;
    std::string current;
    auto flush = [&]() {
        const std::string item = trimmed(current);
        current.clear();
        if (item.empty()) {
            throw std::runtime_error("load_config_file: line " + std::to_string(line_no) +
                                     ": key '" + key + "' has an empty list item");
        }
        out.push_back(parse_long(item, key, line_no));
    };
    for (char ch : value) {
        if (ch == ',') {
            flush();
        } else {
            current.push_back(ch);
        }
    }
    flush();
    return out;
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// A PSD quadratic form can come out a hair negative in floating point;
// forgive only roundoff-scale dips below zero.
double annualize_clamped(double variance) {
    if (variance < 0.0 && variance > -1e-10) variance = 0.0;
    return annualized_volatility(variance);
}

struct MeanStderr {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr out;
    const std::size_t m = xs.size();
    if (m == 0) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m);
    if (m == 1) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));
    out.se = sd / std::sqrt(static_cast<double>(m));
    return out;
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
    if (config.trials < 1) {
        throw std::invalid_argument("validate_config: trials must be at least 1");
    }
    if (config.n < 2) {
        throw std::invalid_argument("validate_config: n must be at least 2");
    }
    if (config.delta_in_list.empty() || config.delta_out_list.empty()) {
        throw std::invalid_argument("validate_config: window-length lists must be nonempty");
    }
    for (long d : config.delta_in_list) {
        if (d < 2) throw std::invalid_argument("validate_config: every delta_in must be >= 2");
    }
    for (long d : config.delta_out_list) {
        if (d < 2) throw std::invalid_argument("validate_config: every delta_out must be >= 2");
    }
    if (config.threads < 0) {
        throw std::invalid_argument("validate_config: threads must be nonnegative");
    }
    if (config.output_path.empty()) {
        throw std::invalid_argument("validate_config: output_path must be set");
    }
    if (config.data_path.empty()) {
        validate_model(config.model);
        if (config.synthetic_days < 2) {
            throw std::invalid_argument("validate_config: synthetic_days must be at least 2");
        }
    }
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("load_config_file: cannot open '" + path + "'");
    }
    ExperimentConfig config;
    std::string line;
    long line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = trimmed(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("load_config_file: line " + std::to_string(line_no) +
                                     ": expected 'key = value'");
        }
        const std::string key = trimmed(stripped.substr(0, eq));
        const std::string value = trimmed(stripped.substr(eq + 1));

        if (key == "data") {
            config.data_path = value;
        } else if (key == "out") {
            config.output_path = value;
        } else if (key == "n") {
            config.n = parse_long(value, key, line_no);
        } else if (key == "trials") {
            config.trials = parse_long(value, key, line_no);
        } else if (key == "seed") {
            config.seed = parse_u64(value, key, line_no);
            config.model.seed = config.seed;  // one knob drives both streams
        } else if (key == "threads") {
            config.threads = parse_long(value, key, line_no);
        } else if (key == "synthetic_days") {
            config.synthetic_days = parse_long(value, key, line_no);
        } else if (key == "delta_in") {
            config.delta_in_list = parse_long_list(value, key, line_no);
        } else if (key == "delta_out") {
            config.delta_out_list = parse_long_list(value, key, line_no);
        } else if (key == "stationarized") {
            config.stationarized = parse_bool(value, key, line_no);
        } else if (key == "n_assets") {
            config.model.n_assets = parse_long(value, key, line_no);
        } else if (key == "n_factors") {
            config.model.n_factors = parse_long(value, key, line_no);
        } else if (key == "loading_drift") {
            config.model.loading_drift = parse_double(value, key, line_no);
        } else if (key == "idio_vol") {
            config.model.idio_vol = parse_double(value, key, line_no);
        } else if (key == "factor_vol") {
            config.model.factor_vol = parse_double(value, key, line_no);
        } else if (key == "tail_dof") {
            config.model.tail_dof = parse_double(value, key, line_no);
        } else {
            throw std::runtime_error("load_config_file: line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
        }
    }
    return config;
}

TrialRecord run_trial(const WindowPair& pair) {
    TrialRecord rec;
    rec.delta_in = static_cast<long>(pair.in_sample.n_days());
    rec.delta_out = static_cast<long>(pair.out_sample.n_days());

    const CovarianceMatrix sigma_in = compute_covariance(pair.in_sample, true);
    const CovarianceMatrix sigma_out = compute_covariance(pair.out_sample, true);
    const EigenSystem eig_in = eigendecompose(sigma_in);

    const CovarianceMatrix sample_precision =
        pseudo_inverse(eig_in.eigenvectors, eig_in.eigenvalues);
    const PortfolioWeights w_sample = gmv_weights(sample_precision, "sample");
    rec.vol_sample = annualize_clamped(realized_variance(w_sample, sigma_out));

    const Eigen::VectorXd lam_oracle = oracle_eigenvalues(eig_in, sigma_out);
    const CovarianceMatrix oracle_precision =
        pseudo_inverse(eig_in.eigenvectors, lam_oracle);
    const PortfolioWeights w_oracle = gmv_weights(oracle_precision, "oracle");
    rec.vol_oracle = annualize_clamped(realized_variance(w_oracle, sigma_out));

    const auto solve_variant = [&](bool ordered, QpStatus& status_out) -> double {
        const QpProblem problem = build_reduced_qp(eig_in, sigma_out, ordered);
        try {
            const QpSolution sol = solve_qp(problem);
            status_out = sol.status;
            if (sol.status == QpStatus::Infeasible) return 0.0;
            PortfolioWeights w;
            w.weights = sol.weights;
            w.method = ordered ? "qp_sorted" : "qp";
            return annualize_clamped(realized_variance(w, sigma_out));
        } catch (const std::runtime_error&) {
            // Degenerate weight normalization: no usable portfolio.
            status_out = QpStatus::Infeasible;
            return 0.0;
        }
    };
    rec.vol_qp = solve_variant(false, rec.qp_status);
    rec.vol_qp_sorted = solve_variant(true, rec.qp_sorted_status);
    return rec;
}

std::vector<TrialRecord> run_sweep(const ExperimentConfig& config) {
    validate_config(config);

    const long max_din =
        *std::max_element(config.delta_in_list.begin(), config.delta_in_list.end());
    const long max_dout =
        *std::max_element(config.delta_out_list.begin(), config.delta_out_list.end());
    const long need = max_din + max_dout;

    // Acquire the panel once; every trial reads it concurrently.
    ReturnsPanel panel;
    if (!config.data_path.empty()) {
        panel = load_returns_csv(config.data_path);
        if (static_cast<long>(panel.n_days()) < need) {
            throw std::runtime_error("run_sweep: data has " + std::to_string(panel.n_days()) +
                                     " days, the window grid needs " + std::to_string(need));
        }
    } else {
        if (config.synthetic_days < need) {
            throw std::runtime_error("run_sweep: synthetic_days = " +
                                     std::to_string(config.synthetic_days) +
                                     " is shorter than the window grid's " +
                                     std::to_string(need));
        }
        panel = generate_returns(config.model, config.synthetic_days);
    }

    struct Job {
        long combo;
        long trial;
        long din;
        long dout;
    };
    std::vector<Job> jobs;
    jobs.reserve(config.delta_in_list.size() * config.delta_out_list.size() *
                 static_cast<std::size_t>(config.trials));
    long combo = 0;
    for (long din : config.delta_in_list) {
        for (long dout : config.delta_out_list) {
            for (long trial = 0; trial < config.trials; ++trial) {
                jobs.push_back({combo, trial, din, dout});
            }
            ++combo;
        }
    }

    std::vector<TrialRecord> records(jobs.size());
    const auto run_job = [&](std::size_t k) {
        const Job& job = jobs[k];
        WindowPair pair = sample_window_pair(
            panel, job.din, job.dout, config.n,
            derive_seed(config.seed, static_cast<std::uint64_t>(job.combo),
                        static_cast<std::uint64_t>(job.trial), kWindowSalt));
        if (config.stationarized) {
            pair = stationarize(pair, derive_seed(config.seed,
                                                  static_cast<std::uint64_t>(job.combo),
                                                  static_cast<std::uint64_t>(job.trial),
                                                  kShuffleSalt));
        }
        TrialRecord rec = run_trial(pair);
        rec.trial_index = job.trial;
        records[k] = rec;
    };

    long n_threads = config.threads > 0
                         ? config.threads
                         : std::max(1L, static_cast<long>(std::thread::hardware_concurrency()));
    n_threads = std::min(n_threads, static_cast<long>(jobs.size()));

    if (n_threads <= 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k) run_job(k);
        return records;
    }

    // Work-stealing by atomic counter; records are index-addressed, so the
    // execution order never shows up in the output.
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    const auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            try {
                run_job(k);
            } catch (...) {
                std::lock_guard<std::mutex> guard(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(jobs.size());
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (long t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

std::vector<SummaryRow> aggregate_and_emit(const std::vector<TrialRecord>& records,
                                           const std::string& output_path) {
    if (records.empty()) {
        throw std::invalid_argument("aggregate_and_emit: no records");
    }

    const std::filesystem::path summary_path(output_path);
    std::filesystem::path raw_path = summary_path;
    raw_path.replace_filename(summary_path.stem().string() + "_raw" +
                              summary_path.extension().string());

    {
        std::ofstream raw(raw_path);
        if (!raw) {
            throw std::runtime_error("aggregate_and_emit: cannot write '" + raw_path.string() +
                                     "'");
        }
        raw << "delta_in,delta_out,trial,vol_sample,vol_oracle,vol_qp,vol_qp_sorted,"
               "qp_status,qp_sorted_status\n";
        for (const TrialRecord& r : records) {
            raw << r.delta_in << ',' << r.delta_out << ',' << r.trial_index << ','
                << format_g(r.vol_sample) << ',' << format_g(r.vol_oracle) << ','
                << format_g(r.vol_qp) << ',' << format_g(r.vol_qp_sorted) << ','
                << to_string(r.qp_status) << ',' << to_string(r.qp_sorted_status) << '\n';
        }
        if (!raw.good()) {
            throw std::runtime_error("aggregate_and_emit: write failed for '" +
                                     raw_path.string() + "'");
        }
    }

    // Group keys in first-appearance order (= sweep enumeration order).
    std::vector<std::pair<long, long>> groups;
    for (const TrialRecord& r : records) {
        const std::pair<long, long> key{r.delta_in, r.delta_out};
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) {
            groups.push_back(key);
        }
    }

    std::vector<SummaryRow> rows;
    for (const auto& [din, dout] : groups) {
        std::vector<double> vol_sample, vol_oracle, vol_qp, vol_qp_sorted;
        long qp_failed = 0;
        long qp_sorted_failed = 0;
        for (const TrialRecord& r : records) {
            if (r.delta_in != din || r.delta_out != dout) continue;
            vol_sample.push_back(r.vol_sample);
            vol_oracle.push_back(r.vol_oracle);
            if (r.qp_status == QpStatus::Converged) {
                vol_qp.push_back(r.vol_qp);
            } else {
                ++qp_failed;
            }
            if (r.qp_sorted_status == QpStatus::Converged) {
                vol_qp_sorted.push_back(r.vol_qp_sorted);
            } else {
                ++qp_sorted_failed;
            }
        }
        const auto emit = [&](const char* method, const std::vector<double>& xs, long failed) {
            const MeanStderr ms = mean_stderr(xs);
            rows.push_back(SummaryRow{din, dout, method, ms.mean, ms.se,
                                      static_cast<long>(xs.size()), failed});
        };
        emit("sample", vol_sample, 0);
        emit("oracle", vol_oracle, 0);
        emit("qp", vol_qp, qp_failed);
        emit("qp_sorted", vol_qp_sorted, qp_sorted_failed);
    }

    std::ofstream summary(summary_path);
    if (!summary) {
        throw std::runtime_error("aggregate_and_emit: cannot write '" + summary_path.string() +
                                 "'");
    }
    summary << "delta_in,delta_out,method,mean_vol,stderr_vol,n_trials,n_failed\n";
    for (const SummaryRow& row : rows) {
        summary << row.delta_in << ',' << row.delta_out << ',' << row.method << ','
                << format_g(row.mean_vol) << ',' << format_g(row.stderr_vol) << ','
                << row.n_trials << ',' << row.n_failed << '\n';
    }
    if (!summary.good()) {
        throw std::runtime_error("aggregate_and_emit: write failed for '" +
                                 summary_path.string() + "'");
    }
    return rows;
}

}  // namespace riekit
