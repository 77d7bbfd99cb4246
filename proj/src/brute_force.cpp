#include "riekit/gmv_qp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace riekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dense_objective(const Eigen::MatrixXd& q, const std::vector<double>& z) {
    const std::size_t m = z.size();
    double f = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        double row = 0.0;
        for (std::size_t s = 0; s < m; ++s) row += q(static_cast<Eigen::Index>(r),
                                                     static_cast<Eigen::Index>(s)) * z[s];
        f += row * z[r];
    }
    return f;
}

// Exact minimization along z + t*(e_i/c_i - e_j/c_j), which preserves the
// equality c'z = 1; t is clamped to keep z nonnegative. Returns true when
// the step strictly improved f.
bool line_search_pair(const Eigen::MatrixXd& q, const std::vector<double>& c, std::size_t i,
                      std::size_t j, std::vector<double>& z, double& f) {
    const std::size_t m = z.size();
    std::vector<double> d(m, 0.0);
    d[i] = 1.0 / c[i];
    d[j] = -1.0 / c[j];

    double t_lo = -kInf;
    double t_hi = kInf;
    auto add_halfplane = [&](double g, double h) {
        // feasibility of g + t*h >= 0
        if (h > 0.0) {
            t_lo = std::max(t_lo, -g / h);
        } else if (h < 0.0) {
            t_hi = std::min(t_hi, -g / h);
        }
    };
    for (std::size_t r = 0; r < m; ++r) add_halfplane(z[r], d[r]);
    if (!(t_lo <= t_hi)) return false;

    std::vector<double> qd(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        double row = 0.0;
        for (std::size_t s = 0; s < m; ++s) row += q(static_cast<Eigen::Index>(r),
                                                     static_cast<Eigen::Index>(s)) * d[s];
        qd[r] = row;
    }
    double d_q_z = 0.0;
    double d_q_d = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        d_q_z += qd[r] * z[r];
        d_q_d += qd[r] * d[r];
    }

    double t = 0.0;
    if (d_q_d > 0.0) {
        t = std::clamp(-d_q_z / d_q_d, t_lo, t_hi);
    } else {
        // Flat (or roundoff-concave) line: compare the finite endpoints.
        const double f_lo =
            std::isfinite(t_lo) ? 2.0 * t_lo * d_q_z + t_lo * t_lo * d_q_d : kInf;
        const double f_hi =
            std::isfinite(t_hi) ? 2.0 * t_hi * d_q_z + t_hi * t_hi * d_q_d : kInf;
        if (f_lo < f_hi) {
            t = t_lo;
        } else if (f_hi < f_lo) {
            t = t_hi;
        }
    }
    const double delta = 2.0 * t * d_q_z + t * t * d_q_d;
    if (!(delta < -1e-18 * std::max(std::abs(f), 1.0))) return false;

    for (std::size_t r = 0; r < m; ++r) z[r] = std::max(0.0, z[r] + t * d[r]);
    f += delta;
    return true;
}

// Global minimum of z' q z over {c'z = 1, z >= 0} with all c_r > 0: a
// lattice sweep over the first m-1 coordinates (the last is pinned by the
// equality), refined by exact pairwise line searches. The pair directions
// e_i/c_i - e_j/c_j generate every edge of the feasible simplex, so the
// refinement cannot stall short of the optimum on a strictly convex
// objective.
double simplex_min(const Eigen::MatrixXd& q, const std::vector<double>& c,
                   int grid_resolution) {
    const std::size_t m = c.size();
    const double slack = 1e-12;
    std::vector<double> steps(m);
    for (std::size_t r = 0; r < m; ++r) {
        steps[r] = 1.0 / (c[r] * static_cast<double>(grid_resolution));
    }

    std::vector<double> z(m, 0.0);
    std::vector<double> best_z;
    double best_f = kInf;

    std::function<void(std::size_t, double)> walk = [&](std::size_t r, double acc) {
        if (r == m - 1) {
            const double tail = (1.0 - acc) / c[m - 1];
            if (tail < -slack) return;
            z[m - 1] = std::max(0.0, tail);
            const double f = dense_objective(q, z);
            if (f < best_f) {
                best_f = f;
                best_z = z;
            }
            return;
        }
        for (int g = 0; g <= grid_resolution; ++g) {
            const double v = static_cast<double>(g) * steps[r];
            const double acc_next = acc + c[r] * v;
            if (acc_next > 1.0 + slack) break;  // v only grows from here
            z[r] = v;
            walk(r + 1, acc_next);
        }
    };
    walk(0, 0.0);

    if (m >= 2) {
        std::vector<double> zr = best_z;
        double f = best_f;
        for (int pass = 0; pass < 200; ++pass) {
            bool improved = false;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = i + 1; j < m; ++j) {
                    improved = line_search_pair(q, c, i, j, zr, f) || improved;
                }
            }
            if (!improved) break;
        }
        best_f = std::min(best_f, f);
    }
    return best_f;
}

}  // namespace

double brute_force_min(const QpProblem& problem, int grid_resolution) {
    const Eigen::Index n = problem.q_matrix.rows();
    if (n < 1 || n > 4) {
        throw std::invalid_argument("brute_force_min: supported for 1 <= n <= 4, got " +
                                    std::to_string(n));
    }
    if (grid_resolution < 2) {
        throw std::invalid_argument("brute_force_min: grid_resolution must be at least 2");
    }

    // Coordinates whose equality coefficient is (numerically) zero never
    // influence the objective or the equality; drop them. Ordering across a
    // dropped coordinate is vacuous, since its value can always be chosen
    // between its neighbours.
    const double bscale = problem.b_vector.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(problem.b_vector(k)) > 1e-13 * bscale) idx.push_back(k);
    }
    if (idx.empty()) {
        throw std::domain_error("brute_force_min: every equality coefficient is zero");
    }
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());

    Eigen::MatrixXd q_sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index s = 0; s < m; ++s)
            q_sub(r, s) = problem.q_matrix(idx[static_cast<std::size_t>(r)],
                                           idx[static_cast<std::size_t>(s)]);
    std::vector<double> a(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r)
        a[static_cast<std::size_t>(r)] = problem.equality_coeffs(idx[static_cast<std::size_t>(r)]);

    if (!problem.ordered) {
        return simplex_min(q_sub, a, grid_resolution);
    }

    // Ordered case: substitute z = cumulative sums of increments u >= 0.
    // The monotone cone maps onto plain nonnegativity, the equality picks up
    // suffix-sum coefficients, and the quadratic form becomes L' q L with L
    // the lower-triangular matrix of ones. Pairwise moves in u are exactly
    // the edge moves of the ordered polytope, so the same machinery applies.
    Eigen::MatrixXd ones_lower = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index s = 0; s <= r; ++s) ones_lower(r, s) = 1.0;
    const Eigen::MatrixXd q_u = ones_lower.transpose() * q_sub * ones_lower;
    std::vector<double> c(static_cast<std::size_t>(m), 0.0);
    double suffix = 0.0;
    for (Eigen::Index r = m - 1; r >= 0; --r) {
        suffix += a[static_cast<std::size_t>(r)];
        c[static_cast<std::size_t>(r)] = suffix;
    }
    return simplex_min(q_u, c, grid_resolution);
}

}  // namespace riekit
