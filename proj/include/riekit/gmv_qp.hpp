#pragma once

#include <string_view>

#include "riekit/eigen_system.hpp"

namespace riekit {

/// Variable and constraint counts of the unreduced slack formulation:
/// n weights + n(n+1)/2 entries of the symmetric inverse estimator + n
/// inverse eigenvalues, against n weight definitions, one budget equality,
/// n(n+1)/2 inverse-estimator definitions and n sign constraints.
struct QpDims {
    long long variables = 0;    // n(n+5)/2
    long long constraints = 0;  // (n^2+5n+2)/2
};

/// The reduced n-variable program over zeta = 1/lambda*:
///   minimize    zeta' Q zeta
///   subject to  a' zeta = 1,  zeta >= 0  (and zeta nondecreasing if ordered)
/// with Q_kl = b_k b_l v_k' Sigma_out v_l, b_k = sum_i v_ik, a_k = b_k^2.
/// Eliminating the weight and inverse-matrix slack variables preserves the
/// optimal weights and objective of the full formulation; full_dims records
/// the unreduced problem's size.
struct QpProblem {
    Eigen::MatrixXd q_matrix;        // n x n symmetric PSD
    Eigen::VectorXd equality_coeffs; // a, with a' zeta = 1
    Eigen::VectorXd b_vector;        // b_k = sum_i v_ik
    Eigen::MatrixXd basis;           // in-sample eigenvectors, for weight recovery
    bool ordered = false;
    QpDims full_dims;
};

enum class QpStatus { Converged, MaxIterations, Infeasible };

std::string_view to_string(QpStatus status);

struct QpSolution {
    Eigen::VectorXd zeta;     // inverse filtered eigenvalues, >= 0
    Eigen::VectorXd weights;  // GMV weights, sum exactly 1
    double objective = 0.0;   // zeta' Q zeta = w' Sigma_out w
    double kkt_residual = 0.0;
    QpStatus status = QpStatus::Infeasible;
    long iterations = 0;
};

struct QpSolverOptions {
    double tolerance = 1e-8;  // KKT threshold, relative to max |Q| entry
    long max_iterations = 0;  // 0 selects the default cap of 100 n^2
};

QpProblem build_reduced_qp(const EigenSystem& eig_in, const CovarianceMatrix& sigma_out,
                           bool ordered);

/// Accelerated projected-gradient solve with exact projection onto the
/// feasible set, refined by reduced-space KKT solves on the identified
/// active set. The ordered variant is handled by the nonnegative-increment
/// substitution zeta = cumulative_sum(u), u >= 0, which maps the
/// monotonicity cone onto the same single-equality nonnegative form.
QpSolution solve_qp(const QpProblem& problem, const QpSolverOptions& opts = {});

/// Dense-grid minimum of the same program for n <= 4, refined by pairwise
/// coordinate descent along equality-preserving directions. Independent of
/// the solve_qp implementation; upper-bounds the true optimum and converges
/// to it as the resolution grows.
double brute_force_min(const QpProblem& problem, int grid_resolution);

/// lambda*_k = 1/zeta_k, rescaled by one positive constant so the sum
/// equals target_trace. GMV weights are invariant to that rescaling.
Eigen::VectorXd extract_filtered_eigenvalues(const QpSolution& solution, double target_trace);

}  // namespace riekit
