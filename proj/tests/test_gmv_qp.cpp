#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "riekit/covariance.hpp"
#include "riekit/eigen_system.hpp"
#include "riekit/gmv_qp.hpp"
#include "riekit/rie.hpp"
#include "riekit/rng.hpp"

using riekit::CovarianceMatrix;
using riekit::EigenSystem;
using riekit::QpProblem;
using riekit::QpSolution;
using riekit::QpSolverOptions;
using riekit::QpStatus;

namespace {

CovarianceMatrix random_spd(Eigen::Index n, std::uint64_t seed, double floor = 0.05) {
    riekit::Rng rng(seed);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    return riekit::make_covariance(a * a.transpose() / static_cast<double>(n) +
                                   floor * Eigen::MatrixXd::Identity(n, n));
}

Eigen::MatrixXd random_orthonormal(Eigen::Index n, std::uint64_t seed) {
    riekit::Rng rng(seed);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    return q;
}

EigenSystem system_with_basis(const Eigen::MatrixXd& basis) {
    EigenSystem eig;
    eig.eigenvectors = basis;
    eig.eigenvalues = Eigen::VectorXd::LinSpaced(basis.cols(), 2.0, 1.0);  // any descending set
    return eig;
}

// Frozen diagonal fixture: basis I, target variances (1, 2, 4).
QpProblem diagonal_problem(bool ordered) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, 3);
    out.diagonal() << 1.0, 2.0, 4.0;
    return riekit::build_reduced_qp(system_with_basis(Eigen::MatrixXd::Identity(3, 3)),
                                    riekit::make_covariance(out), ordered);
}

}  // namespace

TEST_CASE("status labels print their wire names") {
    CHECK(riekit::to_string(QpStatus::Converged) == "converged");
    CHECK(riekit::to_string(QpStatus::MaxIterations) == "max_iterations");
    CHECK(riekit::to_string(QpStatus::Infeasible) == "infeasible");
}

TEST_CASE("full problem dimensions follow the closed-form counts") {
    const CovarianceMatrix out = random_spd(50, 3);
    const QpProblem problem =
        riekit::build_reduced_qp(system_with_basis(random_orthonormal(50, 4)), out, false);
    CHECK(problem.full_dims.variables == 1375);
    CHECK(problem.full_dims.constraints == 1376);

    const QpProblem small = diagonal_problem(false);
    CHECK(small.full_dims.variables == 12);   // n(n+5)/2 at n = 3
    CHECK(small.full_dims.constraints == 13); // (n^2+5n+2)/2 at n = 3
}

TEST_CASE("build_reduced_qp with identity basis reduces to the diagonal") {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, 3);
    out.diagonal() << 1.0, 2.0, 4.0;
    const QpProblem problem = riekit::build_reduced_qp(
        system_with_basis(Eigen::MatrixXd::Identity(3, 3)), riekit::make_covariance(out), false);
    CHECK((problem.b_vector - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((problem.equality_coeffs - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((problem.q_matrix - out).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_FALSE(problem.ordered);
}

TEST_CASE("a basis direction orthogonal to ones produces a dead coordinate") {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd basis(2, 2);
    basis << s, s, s, -s;
    const QpProblem problem = riekit::build_reduced_qp(
        system_with_basis(basis), random_spd(2, 9), false);
    CHECK(problem.b_vector(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(problem.b_vector(1) == doctest::Approx(0.0));
    CHECK(problem.q_matrix(0, 1) == doctest::Approx(0.0));
    CHECK(problem.q_matrix(1, 0) == doctest::Approx(0.0));
    CHECK(problem.q_matrix(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("build_reduced_qp validates shapes and orthonormality") {
    const EigenSystem eig = system_with_basis(random_orthonormal(4, 11));
    CHECK_THROWS_AS(riekit::build_reduced_qp(eig, random_spd(5, 12), false),
                    std::invalid_argument);

    EigenSystem skewed = eig;
    skewed.eigenvectors.col(0) *= 1.5;
    CHECK_THROWS_AS(riekit::build_reduced_qp(skewed, random_spd(4, 13), false),
                    std::invalid_argument);
}

TEST_CASE("diagonal fixture solves to the inverse-variance split") {
    const QpSolution sol = riekit::solve_qp(diagonal_problem(false));
    CHECK(sol.status == QpStatus::Converged);
    CHECK(sol.zeta(0) == doctest::Approx(4.0 / 7.0).epsilon(1e-9));
    CHECK(sol.zeta(1) == doctest::Approx(2.0 / 7.0).epsilon(1e-9));
    CHECK(sol.zeta(2) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
    CHECK(sol.objective == doctest::Approx(4.0 / 7.0).epsilon(1e-9));
    CHECK(sol.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ordered variant of the diagonal fixture pools every coordinate") {
    // With variances increasing in k, unconstrained zeta would decrease, so
    // the nondecreasing cone forces all entries equal: zeta = 1/3 each.
    const QpSolution sol = riekit::solve_qp(diagonal_problem(true));
    CHECK(sol.status == QpStatus::Converged);
    for (int k = 0; k < 3; ++k) CHECK(sol.zeta(k) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(sol.objective == doctest::Approx(7.0 / 9.0).epsilon(1e-8));
}

TEST_CASE("identity target splits weight evenly") {
    for (bool ordered : {false, true}) {
        CAPTURE(ordered);
        const Eigen::Index n = 6;
        const QpProblem problem = riekit::build_reduced_qp(
            system_with_basis(Eigen::MatrixXd::Identity(n, n)),
            riekit::make_covariance(Eigen::MatrixXd::Identity(n, n)), ordered);
        const QpSolution sol = riekit::solve_qp(problem);
        CHECK(sol.status == QpStatus::Converged);
        for (Eigen::Index k = 0; k < n; ++k) {
            CHECK(sol.zeta(k) == doctest::Approx(1.0 / n).epsilon(1e-8));
            CHECK(sol.weights(k) == doctest::Approx(1.0 / n).epsilon(1e-8));
        }
        CHECK(sol.objective == doctest::Approx(1.0 / n).epsilon(1e-9));
    }
}

TEST_CASE("brute force agrees on the frozen fixtures") {
    CHECK(riekit::brute_force_min(diagonal_problem(false), 200) ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-4));
    CHECK(riekit::brute_force_min(diagonal_problem(true), 200) ==
          doctest::Approx(7.0 / 9.0).epsilon(1e-4));

    const Eigen::Index n = 3;
    const QpProblem identity = riekit::build_reduced_qp(
        system_with_basis(Eigen::MatrixXd::Identity(n, n)),
        riekit::make_covariance(Eigen::MatrixXd::Identity(n, n)), false);
    CHECK(riekit::brute_force_min(identity, 200) == doctest::Approx(1.0 / n).epsilon(1e-6));
}

TEST_CASE("brute force validates dimensions and resolution") {
    const QpProblem big = riekit::build_reduced_qp(system_with_basis(random_orthonormal(5, 21)),
                                                   random_spd(5, 22), false);
    CHECK_THROWS_AS(riekit::brute_force_min(big, 100), std::invalid_argument);
    CHECK_THROWS_AS(riekit::brute_force_min(diagonal_problem(false), 1), std::invalid_argument);
}

TEST_CASE("solver matches brute force on random small instances") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        for (bool ordered : {false, true}) {
            CAPTURE(seed);
            CAPTURE(ordered);
            const QpProblem problem = riekit::build_reduced_qp(
                system_with_basis(random_orthonormal(3, 1000 + seed)),
                random_spd(3, 2000 + seed), ordered);
            const QpSolution sol = riekit::solve_qp(problem);
            REQUIRE(sol.status == QpStatus::Converged);
            const double brute = riekit::brute_force_min(problem, 300);
            // Brute force upper-bounds the optimum; the solver may be lower.
            REQUIRE(sol.objective <= brute + 1e-8);
            REQUIRE(brute <= sol.objective + 2e-4 * std::max(std::abs(sol.objective), 1e-12));
        }
    }
}

TEST_CASE("ordered optimum never beats the unordered one") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed % 6);
        const EigenSystem eig = system_with_basis(random_orthonormal(n, 3000 + seed));
        const CovarianceMatrix out = random_spd(n, 4000 + seed);
        const double plain =
            riekit::solve_qp(riekit::build_reduced_qp(eig, out, false)).objective;
        const double sorted =
            riekit::solve_qp(riekit::build_reduced_qp(eig, out, true)).objective;
        REQUIRE(sorted >= plain - 1e-9);
    }
}

TEST_CASE("no random feasible point improves on the solver") {
    riekit::Rng rng(5150);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const Eigen::Index n = 4;
        const QpProblem problem = riekit::build_reduced_qp(
            system_with_basis(random_orthonormal(n, 5000 + seed)), random_spd(n, 6000 + seed),
            false);
        const QpSolution sol = riekit::solve_qp(problem);
        REQUIRE(sol.status == QpStatus::Converged);
        for (int trial = 0; trial < 60; ++trial) {
            Eigen::VectorXd zeta(n);
            for (Eigen::Index k = 0; k < n; ++k) zeta(k) = rng.uniform(0.0, 1.0);
            const double budget = problem.equality_coeffs.dot(zeta);
            if (budget <= 1e-9) continue;
            zeta /= budget;
            const double value = zeta.dot(problem.q_matrix * zeta);
            REQUIRE(value >= sol.objective - 1e-8);
        }
    }
}

TEST_CASE("inverse oracle eigenvalues are feasible and bound the optimum") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::Index n = 5;
        const CovarianceMatrix in = random_spd(n, 7000 + seed);
        const CovarianceMatrix out = random_spd(n, 8000 + seed);
        const EigenSystem eig = riekit::eigendecompose(in);
        const Eigen::VectorXd oracle = riekit::oracle_eigenvalues(eig, out);
        REQUIRE(oracle.minCoeff() > 0.0);

        const QpProblem problem = riekit::build_reduced_qp(eig, out, false);
        double denom = 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
            denom += problem.equality_coeffs(k) / oracle(k);
        Eigen::VectorXd zeta(n);
        for (Eigen::Index k = 0; k < n; ++k) zeta(k) = (1.0 / oracle(k)) / denom;

        CHECK(problem.equality_coeffs.dot(zeta) == doctest::Approx(1.0).epsilon(1e-12));
        const double oracle_value = zeta.dot(problem.q_matrix * zeta);
        const QpSolution sol = riekit::solve_qp(problem);
        REQUIRE(sol.status == QpStatus::Converged);
        REQUIRE(sol.objective <= oracle_value + 1e-8);
    }
}

TEST_CASE("objective scales linearly with the target and weights do not move") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 5;
        const EigenSystem eig = system_with_basis(random_orthonormal(n, 9000 + seed));
        const CovarianceMatrix out = random_spd(n, 9100 + seed);
        CovarianceMatrix scaled = out;
        scaled.values *= 100.0;
        const QpSolution base = riekit::solve_qp(riekit::build_reduced_qp(eig, out, false));
        const QpSolution big = riekit::solve_qp(riekit::build_reduced_qp(eig, scaled, false));
        REQUIRE(base.status == QpStatus::Converged);
        REQUIRE(big.status == QpStatus::Converged);
        CHECK(big.objective == doctest::Approx(100.0 * base.objective).epsilon(1e-7));
        CHECK((big.weights - base.weights).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("converged solutions carry a small KKT certificate") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::Index n = 6;
        const QpProblem problem = riekit::build_reduced_qp(
            system_with_basis(random_orthonormal(n, 9500 + seed)), random_spd(n, 9600 + seed),
            false);
        const QpSolution sol = riekit::solve_qp(problem);
        REQUIRE(sol.status == QpStatus::Converged);
        const double qscale = problem.q_matrix.cwiseAbs().maxCoeff();
        CHECK(sol.kkt_residual <= 1e-8 * qscale);

        // Independent certificate: with nu from an interior coordinate,
        // every coordinate must satisfy complementary slackness.
        const Eigen::VectorXd g = 2.0 * (problem.q_matrix * sol.zeta);
        const Eigen::VectorXd& a = problem.equality_coeffs;
        double nu = 0.0;
        double best = -1.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (sol.zeta(k) > best && a(k) > 0.0) {
                best = sol.zeta(k);
                nu = g(k) / a(k);
            }
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            const double mu = g(k) - nu * a(k);
            CHECK(mu >= -1e-6 * qscale);                      // dual feasibility
            CHECK(std::abs(mu * sol.zeta(k)) <= 1e-6 * qscale);  // slackness
        }
        CHECK(a.dot(sol.zeta) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(sol.zeta.minCoeff() >= -1e-12);
    }
}

TEST_CASE("dead coordinates do not influence weights or objective") {
    // Basis column 1 sums to zero, so zeta(1) is absent from the program;
    // any nonnegative value there must leave weights and objective alone.
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd basis(2, 2);
    basis << s, s, s, -s;
    const CovarianceMatrix out = random_spd(2, 31);
    const QpProblem problem = riekit::build_reduced_qp(system_with_basis(basis), out, false);
    const QpSolution sol = riekit::solve_qp(problem);
    REQUIRE(sol.status == QpStatus::Converged);
    CHECK(sol.zeta(1) > 0.0);  // filled with a harmless positive value

    Eigen::VectorXd bumped = sol.zeta;
    bumped(1) *= 3.0;
    const double same = bumped.dot(problem.q_matrix * bumped);
    CHECK(same == doctest::Approx(sol.objective).epsilon(1e-12));
    Eigen::VectorXd w = problem.basis * problem.b_vector.cwiseProduct(bumped);
    w /= w.sum();
    CHECK((w - sol.weights).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ordered dead coordinates respect monotonicity") {
    // Put the dead direction in the middle of a 3-column basis.
    Eigen::MatrixXd basis(3, 3);
    const double s = 1.0 / std::sqrt(2.0);
    basis.col(0) = Eigen::Vector3d(s, s, 0.0);
    basis.col(1) = Eigen::Vector3d(s, -s, 0.0);
    basis.col(2) = Eigen::Vector3d(0.0, 0.0, 1.0);
    const QpProblem problem =
        riekit::build_reduced_qp(system_with_basis(basis), random_spd(3, 77), true);
    CHECK(problem.b_vector(1) == doctest::Approx(0.0));
    const QpSolution sol = riekit::solve_qp(problem);
    REQUIRE(sol.status == QpStatus::Converged);
    CHECK(sol.zeta(1) >= sol.zeta(0) - 1e-10);
    CHECK(sol.zeta(2) >= sol.zeta(1) - 1e-10);
}

TEST_CASE("an all-zero equality row is reported infeasible") {
    QpProblem problem;
    problem.q_matrix = Eigen::MatrixXd::Identity(3, 3);
    problem.equality_coeffs = Eigen::VectorXd::Zero(3);
    problem.b_vector = Eigen::VectorXd::Zero(3);
    problem.basis = Eigen::MatrixXd::Identity(3, 3);
    problem.ordered = false;
    const QpSolution sol = riekit::solve_qp(problem);
    CHECK(sol.status == QpStatus::Infeasible);
    CHECK(sol.objective == 0.0);
}

TEST_CASE("an exhausted iteration budget is reported, not hidden") {
    QpSolverOptions opts;
    opts.tolerance = 1e-300;  // below what floating point can attain on a dense instance
    opts.max_iterations = 3;
    const QpProblem problem = riekit::build_reduced_qp(
        system_with_basis(random_orthonormal(6, 4242)), random_spd(6, 4243), false);
    const QpSolution sol = riekit::solve_qp(problem, opts);
    CHECK(sol.status == QpStatus::MaxIterations);
    // The iterate returned is still feasible.
    CHECK(sol.zeta.minCoeff() >= -1e-12);
    CHECK(sol.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extract_filtered_eigenvalues inverts and rescales") {
    QpSolution sol;
    sol.zeta = Eigen::Vector3d(4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0);
    sol.weights = Eigen::Vector3d::Ones() / 3.0;
    sol.status = QpStatus::Converged;
    const Eigen::VectorXd lambdas = riekit::extract_filtered_eigenvalues(sol, 7.0);
    CHECK(lambdas(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lambdas(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(lambdas(2) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(lambdas.sum() == doctest::Approx(7.0).epsilon(1e-12));

    QpSolution degenerate = sol;
    degenerate.zeta(1) = 0.0;
    CHECK_THROWS_AS(riekit::extract_filtered_eigenvalues(degenerate, 7.0), std::domain_error);
    CHECK_THROWS_AS(riekit::extract_filtered_eigenvalues(sol, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(riekit::extract_filtered_eigenvalues(sol, -1.0), std::invalid_argument);
}

TEST_CASE("weights reconstructed from extracted eigenvalues match the solver") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 4;
        const CovarianceMatrix in = random_spd(n, 11000 + seed);
        const CovarianceMatrix out = random_spd(n, 12000 + seed);
        const EigenSystem eig = riekit::eigendecompose(in);
        const QpProblem problem = riekit::build_reduced_qp(eig, out, false);
        const QpSolution sol = riekit::solve_qp(problem);
        REQUIRE(sol.status == QpStatus::Converged);
        if (sol.zeta.minCoeff() <= 0.0) continue;  // interiority needed for 1/zeta

        const Eigen::VectorXd lambdas =
            riekit::extract_filtered_eigenvalues(sol, eig.eigenvalues.sum());
        const CovarianceMatrix precision = riekit::inverse_rie(eig.eigenvectors, lambdas);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd w = precision.values * ones;
        w /= w.sum();
        CHECK((w - sol.weights).cwiseAbs().maxCoeff() < 1e-9);
    }
}
