#include "riekit/gmv_qp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace riekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Euclidean projection onto {z : c'z = 1, z >= 0} for c >= 0 with at
// least one positive entry. The KKT form is z_k = max(0, x_k + t c_k);
// phi(t) = c'z(t) - 1 is piecewise linear and nondecreasing, so the root
// is found exactly by walking the sorted breakpoints -x_k / c_k.
Eigen::VectorXd project_equality_nonneg(const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
    const Eigen::Index n = x.size();
    struct Node {
        double t;
        double cx;
        double cc;
    };
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        if (c(k) > 0.0) {
            nodes.push_back({-x(k) / c(k), c(k) * x(k), c(k) * c(k)});
        }
    }
    if (nodes.empty()) {
        throw std::domain_error("project_equality_nonneg: no positive equality coefficient");
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.t < b.t; });

    // Activate entries one breakpoint at a time; on each segment phi(t) =
    // s1 + t*s2 - 1 with s2 > 0 once anything is active.
    double s1 = 0.0;
    double s2 = 0.0;
    double t = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        s1 += nodes[i].cx;
        s2 += nodes[i].cc;
        const double t_candidate = (1.0 - s1) / s2;
        const double seg_hi = (i + 1 < nodes.size()) ? nodes[i + 1].t : kInf;
        if (t_candidate >= nodes[i].t && t_candidate <= seg_hi) {
            t = t_candidate;
            found = true;
            break;
        }
    }
    if (!found) {
        // All entries active (root beyond the last breakpoint).
        t = (1.0 - s1) / s2;
    }
    Eigen::VectorXd z(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        z(k) = (c(k) > 0.0) ? std::max(0.0, x(k) + t * c(k)) : std::max(0.0, x(k));
    }
    return z;
}

struct KktReport {
    double residual = kInf;
    double nu = 0.0;
};

// Residual of the first-order conditions at a feasible point:
// 2Qx = nu*c + mu with mu >= 0 and mu_k x_k = 0. nu is fitted by least
// squares over the inactive coordinates.
KktReport kkt_residual(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                       const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    const Eigen::VectorXd g = 2.0 * (q * x);
    const double xmax = x.maxCoeff();
    const double act_thresh = 1e-9 * std::max(xmax, 1e-300);

    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (x(k) > act_thresh && c(k) > 0.0) {
            num += g(k) * c(k);
            den += c(k) * c(k);
        }
    }
    KktReport rep;
    rep.nu = (den > 0.0) ? num / den : 0.0;

    double res = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mu = g(k) - rep.nu * c(k);
        if (x(k) > act_thresh) {
            res = std::max(res, std::abs(mu));   // stationarity
        } else {
            res = std::max(res, std::max(0.0, -mu));  // bound multiplier sign
            res = std::max(res, std::abs(mu * x(k))); // complementarity
        }
    }
    rep.residual = res;
    return rep;
}

// Primal active-set refinement for min x'Qx over {c'x = 1, x >= 0}, Q PSD.
// From a feasible start: pin the near-zero coordinates at exact zero, then
// alternate an exact equality-constrained solve on the free coordinates
// with an exact line step to the first violated bound, releasing a pinned
// coordinate only when its multiplier is decisively negative. Every iterate
// is feasible and the objective never increases along the walk, so the
// result is never worse than the input; when the walk ends on the optimal
// working set the returned point is the exact subspace minimizer and
// carries no iteration noise.
Eigen::VectorXd polish_active_set(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& start, double tol_abs) {
    const Eigen::Index n = start.size();
    const double qscale = std::max(q.cwiseAbs().maxCoeff(), 1e-300);
    const double eps = std::numeric_limits<double>::epsilon();
    const double tie = 1e-12;

    Eigen::VectorXd best = start;
    double best_f = start.dot(q * start);

    // The walk below needs the working set to sit exactly on its bounds.
    Eigen::VectorXd x = start;
    const double xmax0 = std::max(x.maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (x(k) <= 1e-9 * xmax0) x(k) = 0.0;
    }
    x = project_equality_nonneg(x, c);
    {
        const double f0 = x.dot(q * x);
        if (f0 <= best_f + tie * std::abs(best_f)) {
            best = x;
            best_f = f0;
        }
    }

    std::vector<char> working(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        working[static_cast<std::size_t>(k)] = (x(k) <= 0.0) || !(c(k) > 0.0);
    }
    // A coordinate whose release produced no progress is barred from being
    // released again until a real step happens, so degenerate vertices
    // cannot cycle the walk.
    std::vector<char> barred(static_cast<std::size_t>(n), 0);
    long releases_left = 2 * static_cast<long>(n) + 10;
    const long max_rounds = 6 * static_cast<long>(n) + 60;

    for (long round = 0; round < max_rounds; ++round) {
        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!working[static_cast<std::size_t>(k)]) free_idx.push_back(k);
        }
        const Eigen::Index m = static_cast<Eigen::Index>(free_idx.size());
        if (m == 0) break;

        // Exact minimizer on the current face:
        // [ 2Q_II  -c_I ] [z ]   [0]
        // [ c_I'     0  ] [nu] = [1]
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index s = 0; s < m; ++s) {
                kkt(r, s) = 2.0 * q(free_idx[static_cast<std::size_t>(r)],
                                    free_idx[static_cast<std::size_t>(s)]);
            }
            kkt(r, m) = -c(free_idx[static_cast<std::size_t>(r)]);
            kkt(m, r) = c(free_idx[static_cast<std::size_t>(r)]);
        }
        // Solve for the step from x rather than for the point: on a flat
        // face this picks the minimizer nearest to x, and the equality row
        // re-anchors c'x = 1 exactly on every round.
        const Eigen::VectorXd g_x = 2.0 * (q * x);
        Eigen::VectorXd rhs(m + 1);
        for (Eigen::Index r = 0; r < m; ++r) {
            rhs(r) = -g_x(free_idx[static_cast<std::size_t>(r)]);
        }
        rhs(m) = 1.0 - c.dot(x);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
        Eigen::VectorXd sol = cod.solve(rhs);
        sol += cod.solve(rhs - kkt * sol);  // one step of iterative refinement
        if (!sol.allFinite()) break;

        Eigen::VectorXd target = x;
        for (Eigen::Index r = 0; r < m; ++r) {
            target(free_idx[static_cast<std::size_t>(r)]) += sol(r);
        }
        const double nu = sol(m);

        // Exact step toward the face minimizer, stopping at the first bound
        // (smallest step wins; ties go to the lowest index).
        double alpha = 1.0;
        Eigen::Index blocker = -1;
        for (Eigen::Index r = 0; r < m; ++r) {
            const Eigen::Index k = free_idx[static_cast<std::size_t>(r)];
            if (target(k) >= 0.0) continue;
            const double step = x(k) / (x(k) - target(k));
            if (step < alpha) {
                alpha = step;
                blocker = k;
            }
        }

        if (blocker >= 0) {
            if (alpha > 0.0) {
                x = (1.0 - alpha) * x + alpha * target;
                x = x.cwiseMax(0.0);
                x(blocker) = 0.0;
                working[static_cast<std::size_t>(blocker)] = 1;
                std::fill(barred.begin(), barred.end(), 0);
                const double f = x.dot(q * x);
                if (f <= best_f + tie * std::abs(best_f)) {
                    best = x;
                    best_f = f;
                }
                continue;
            }

            // Blocked without moving (a flat face steered the step through a
            // coordinate already at zero). Fall back to an exact line search
            // along the gradient projected onto the equality, which enters
            // the feasible cone whenever the face is not yet stationary.
            double cg = 0.0;
            double cc = 0.0;
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::Index k = free_idx[static_cast<std::size_t>(r)];
                cg += c(k) * g_x(k);
                cc += c(k) * c(k);
            }
            const double kappa = cc > 0.0 ? cg / cc : 0.0;
            Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::Index k = free_idx[static_cast<std::size_t>(r)];
                d(k) = -(g_x(k) - kappa * c(k));
            }
            const double d_floor = 16.0 * eps * static_cast<double>(n) * qscale *
                                   std::max(1.0, x.maxCoeff());
            double a_blk = kInf;
            Eigen::Index blk = -1;
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::Index k = free_idx[static_cast<std::size_t>(r)];
                if (d(k) >= 0.0) continue;
                const double step = x(k) / (-d(k));
                if (step < a_blk) {
                    a_blk = step;
                    blk = k;
                }
            }
            const double curv = 2.0 * d.dot(q * d);
            const double a_unc = curv > 0.0 ? -g_x.dot(d) / curv : kInf;
            const double a_step = std::min(a_blk, a_unc);
            if (d.cwiseAbs().maxCoeff() <= d_floor || !(a_step > 0.0) ||
                !std::isfinite(a_step)) {
                // The face is stationary to rounding: the release was noise.
                x(blocker) = 0.0;
                working[static_cast<std::size_t>(blocker)] = 1;
                barred[static_cast<std::size_t>(blocker)] = 1;
                continue;
            }
            x += a_step * d;
            x = x.cwiseMax(0.0);
            if (a_blk <= a_unc) {
                x(blk) = 0.0;
                working[static_cast<std::size_t>(blk)] = 1;
            }
            std::fill(barred.begin(), barred.end(), 0);
            const double f = x.dot(q * x);
            if (f <= best_f + tie * std::abs(best_f)) {
                best = x;
                best_f = f;
            }
            continue;
        }

        // Full step: the face minimizer is feasible.
        x = target.cwiseMax(0.0);
        const double f = x.dot(q * x);
        if (f <= best_f + tie * std::abs(best_f)) {
            best = x;
            best_f = f;
        }

        // Bound multipliers on the working set; release the most negative
        // one if it clears both the rounding floor of the gradient and a
        // fraction of the caller's tolerance.
        const Eigen::VectorXd g = 2.0 * (q * x);
        const double noise_floor =
            64.0 * eps * static_cast<double>(n) * qscale * std::max(1.0, x.maxCoeff());
        const double release_thresh = std::max(noise_floor, 0.1 * tol_abs);
        double mu_min = -release_thresh;
        Eigen::Index release = -1;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!working[static_cast<std::size_t>(k)] || !(c(k) > 0.0)) continue;
            if (barred[static_cast<std::size_t>(k)]) continue;
            const double mu = g(k) - nu * c(k);
            if (mu < mu_min) {
                mu_min = mu;
                release = k;
            }
        }
        if (release < 0 || releases_left <= 0) break;
        --releases_left;
        working[static_cast<std::size_t>(release)] = 0;
    }
    return best;
}

struct CoreResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    double kkt = kInf;
    QpStatus status = QpStatus::MaxIterations;
    long iterations = 0;
};

// min x'Qx  s.t.  c'x = 1, x >= 0, for PSD Q and c >= 0. FISTA with exact
// projection and adaptive restart, with periodic active-set polishing.
CoreResult solve_core(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                      const QpSolverOptions& opts) {
    const Eigen::Index n = c.size();
    CoreResult out;

    if (!(c.maxCoeff() > 0.0)) {
        out.x = Eigen::VectorXd::Zero(n);
        out.status = QpStatus::Infeasible;
        return out;
    }

    const double qscale = q.cwiseAbs().maxCoeff();
    const double tol_abs = opts.tolerance * std::max(qscale, 1e-300);
    const long max_iter =
        opts.max_iterations > 0 ? opts.max_iterations : 100 * static_cast<long>(n) * n;

    Eigen::VectorXd x = project_equality_nonneg(c / c.squaredNorm(), c);

    if (qscale == 0.0) {
        out.x = x;
        out.objective = 0.0;
        out.kkt = 0.0;
        out.status = QpStatus::Converged;
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
    const double step = 1.0 / lip;

    double f = x.dot(q * x);
    Eigen::VectorXd best = x;
    double best_f = f;
    Eigen::VectorXd y = x;
    double t_mom = 1.0;

    const long check_every = 40;
    long iter = 0;
    while (iter < max_iter) {
        ++iter;
        Eigen::VectorXd x_next = project_equality_nonneg(y - step * 2.0 * (q * y), c);
        const double f_next = x_next.dot(q * x_next);
        if (f_next > f) {
            // Adaptive restart: drop the momentum when the objective rises.
            y = x;
            t_mom = 1.0;
            x_next = project_equality_nonneg(x - step * 2.0 * (q * x), c);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        y = x_next + ((t_mom - 1.0) / t_next) * (x_next - x);
        x = x_next;
        f = x.dot(q * x);
        t_mom = t_next;
        if (f < best_f) {
            best = x;
            best_f = f;
        }

        if (iter % check_every == 0 || iter == max_iter) {
            // Terminate on the polished point, not the raw iterate: on the
            // identified face it is the exact subspace minimizer, so the
            // returned solution carries no path-dependent iteration noise.
            Eigen::VectorXd polished = polish_active_set(q, c, best, tol_abs);
            const double fp = polished.dot(q * polished);
            if (fp < best_f) {
                best = polished;
                best_f = fp;
            }
            const KktReport rep = kkt_residual(q, c, polished);
            if (rep.residual <= tol_abs) {
                out.x = polished;
                out.objective = fp;
                out.kkt = rep.residual;
                out.status = QpStatus::Converged;
                out.iterations = iter;
                return out;
            }
        }
    }

    Eigen::VectorXd polished = polish_active_set(q, c, best, tol_abs);
    const double fp = polished.dot(q * polished);
    if (fp < best_f) {
        best = polished;
        best_f = fp;
    }
    const KktReport rep_polished = kkt_residual(q, c, polished);
    if (rep_polished.residual <= tol_abs) {
        out.x = polished;
        out.objective = fp;
        out.kkt = rep_polished.residual;
        out.status = QpStatus::Converged;
        out.iterations = iter;
        return out;
    }
    const KktReport rep = kkt_residual(q, c, best);
    out.x = best;
    out.objective = best_f;
    out.kkt = rep.residual;
    out.status = rep.residual <= tol_abs ? QpStatus::Converged : QpStatus::MaxIterations;
    out.iterations = iter;
    return out;
}

// Assign the objective-irrelevant coordinates (b_k = 0) a positive value:
// the mean of the strictly positive solved entries, clamped to whatever
// the ordering permits in the sorted case.
void fill_degenerate_entries(const QpProblem& problem, Eigen::VectorXd& zeta) {
    const Eigen::Index n = zeta.size();
    const double bscale = std::max(problem.b_vector.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<bool> degenerate(static_cast<std::size_t>(n));
    double sum = 0.0;
    long count = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        degenerate[static_cast<std::size_t>(k)] =
            std::abs(problem.b_vector(k)) <= 1e-13 * bscale;
        if (!degenerate[static_cast<std::size_t>(k)] && zeta(k) > 0.0) {
            sum += zeta(k);
            ++count;
        }
    }
    const double mean = count > 0 ? sum / count : 1.0;

    if (!problem.ordered) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (degenerate[static_cast<std::size_t>(k)]) zeta(k) = mean;
        }
        return;
    }
    // Next solved value to the right bounds the assignment from above.
    std::vector<double> next_solved(static_cast<std::size_t>(n), kInf);
    double running = kInf;
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        next_solved[static_cast<std::size_t>(k)] = running;
        if (!degenerate[static_cast<std::size_t>(k)]) running = zeta(k);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!degenerate[static_cast<std::size_t>(k)]) continue;
        const double lo = (k > 0) ? zeta(k - 1) : 0.0;
        const double hi = next_solved[static_cast<std::size_t>(k)];
        zeta(k) = std::clamp(mean, lo, hi);
    }
}

}  // namespace

std::string_view to_string(QpStatus status) {
    switch (status) {
        case QpStatus::Converged: return "converged";
        case QpStatus::MaxIterations: return "max_iterations";
        case QpStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

QpProblem build_reduced_qp(const EigenSystem& eig_in, const CovarianceMatrix& sigma_out,
                           bool ordered) {
    const Eigen::Index n = eig_in.eigenvectors.rows();
    if (eig_in.eigenvectors.cols() != n) {
        throw std::invalid_argument("build_reduced_qp: eigenvector matrix must be square");
    }
    if (sigma_out.values.rows() != n || sigma_out.values.cols() != n) {
        throw std::invalid_argument("build_reduced_qp: dimension mismatch (basis " +
                                    std::to_string(n) + ", sigma_out " +
                                    std::to_string(sigma_out.values.rows()) + ")");
    }
    const double orth_err = (eig_in.eigenvectors.transpose() * eig_in.eigenvectors -
                             Eigen::MatrixXd::Identity(n, n))
                                .cwiseAbs()
                                .maxCoeff();
    if (orth_err > 1e-10) {
        throw std::invalid_argument("build_reduced_qp: basis not orthonormal");
    }

    QpProblem problem;
    problem.b_vector = eig_in.eigenvectors.colwise().sum().transpose();
    problem.equality_coeffs = problem.b_vector.cwiseProduct(problem.b_vector);
    Eigen::MatrixXd m =
        eig_in.eigenvectors.transpose() * sigma_out.values * eig_in.eigenvectors;
    Eigen::MatrixXd q = problem.b_vector.asDiagonal() * m * problem.b_vector.asDiagonal();
    problem.q_matrix = 0.5 * (q + q.transpose());
    problem.basis = eig_in.eigenvectors;
    problem.ordered = ordered;
    const long long nn = static_cast<long long>(n);
    problem.full_dims.variables = nn * (nn + 5) / 2;
    problem.full_dims.constraints = (nn * nn + 5 * nn + 2) / 2;
    return problem;
}

QpSolution solve_qp(const QpProblem& problem, const QpSolverOptions& opts) {
    const Eigen::Index n = problem.q_matrix.rows();
    QpSolution solution;

    CoreResult core;
    if (!problem.ordered) {
        core = solve_core(problem.q_matrix, problem.equality_coeffs, opts);
        solution.zeta = core.x;
    } else {
        // Substitute zeta_k = u_1 + ... + u_k with u >= 0: monotone
        // nonnegative zeta maps one-to-one onto the nonnegative orthant,
        // and the equality becomes (suffix sums of a)' u = 1.
        Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index s = 0; s <= r; ++s) lower(r, s) = 1.0;
        }
        Eigen::MatrixXd q_u = lower.transpose() * problem.q_matrix * lower;
        q_u = 0.5 * (q_u + q_u.transpose());
        Eigen::VectorXd c_u(n);
        double suffix = 0.0;
        for (Eigen::Index k = n - 1; k >= 0; --k) {
            suffix += problem.equality_coeffs(k);
            c_u(k) = suffix;
        }
        core = solve_core(q_u, c_u, opts);
        solution.zeta.resize(n);
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            acc += core.x(k);
            solution.zeta(k) = acc;
        }
    }

    solution.status = core.status;
    solution.kkt_residual = core.kkt;
    solution.iterations = core.iterations;
    if (core.status == QpStatus::Infeasible) {
        solution.zeta = Eigen::VectorXd::Zero(n);
        solution.weights = Eigen::VectorXd::Zero(n);
        solution.objective = 0.0;
        return solution;
    }

    fill_degenerate_entries(problem, solution.zeta);

    Eigen::VectorXd scaled = problem.b_vector.cwiseProduct(solution.zeta);
    Eigen::VectorXd w = problem.basis * scaled;
    const double wsum = w.sum();
    if (std::abs(wsum) <= 1e-14) {
        throw std::runtime_error("solve_qp: weight normalization degenerate");
    }
    solution.weights = w / wsum;
    solution.objective = solution.zeta.dot(problem.q_matrix * solution.zeta);
    return solution;
}

Eigen::VectorXd extract_filtered_eigenvalues(const QpSolution& solution, double target_trace) {
    if (!(target_trace > 0.0)) {
        throw std::invalid_argument("extract_filtered_eigenvalues: target_trace must be positive");
    }
    const Eigen::Index n = solution.zeta.size();
    Eigen::VectorXd raw(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!(solution.zeta(k) > 0.0)) {
            throw std::domain_error(
                "extract_filtered_eigenvalues: zeta[" + std::to_string(k) +
                "] is zero; the corresponding eigenvalue is infinite");
        }
        raw(k) = 1.0 / solution.zeta(k);
    }
    return raw * (target_trace / raw.sum());
}

}  // namespace riekit
