#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "drift/expr.hpp"
#include "drift/spectral.hpp"

namespace drift {

/// Reference eigenproblem on the unit circle: uniform periodic grid
/// theta_j = 2*pi*j/n, fields given as expressions in the single variable u.
/// This module deliberately shares no assembly or eigensolver code with the
/// sparse pipeline; it exists to cross-check it.
struct CircleProblem {
    int n = 0;
    Expr f;
    Expr c;
    double s = 0.0;
};

/// Dense pencil (A + C, M) of the 1-D weighted P1 form: tridiagonal stiffness
/// with periodic corner wrap, edge-midpoint log-interpolated weights, lumped
/// diagonal mass. Same stabilization rules as the sparse path (weights
/// exp(s*(f - max f)), exponent clamped at -700) assembled by independent code.
struct CirclePencil {
    Eigen::MatrixXd stiffness; // A, dense n x n
    Eigen::VectorXd reaction;  // diagonal of C
    Eigen::VectorXd mass;      // diagonal of M
    Eigen::VectorXd f_values;
    Eigen::VectorXd c_values;
    double s = 0.0;
    double f_max = 0.0;

    int n() const { return static_cast<int>(mass.size()); }
};

CirclePencil circle_assemble(const CircleProblem& p);

/// Full spectrum of a dense symmetric matrix by cyclic Jacobi rotations
/// (one-sided Hestenes form on a Cholesky factor, which orders all memory
/// access by columns; the rotation sequence is the classic cyclic sweep).
/// Also returns the eigenvector of the smallest eigenvalue.
/// Throws SolverError if 100 sweeps do not converge.
struct DenseSpectrum {
    Eigen::VectorXd eigenvalues; // ascending
    Eigen::VectorXd min_vector;  // unit l2 norm
    int sweeps = 0;
};
DenseSpectrum jacobi_eigensolve(const Eigen::MatrixXd& symmetric, int max_sweeps = 100);

/// Smallest eigenpair of (A+C) v = lambda M v via the dense Jacobi route on
/// M^-1/2 (A+C) M^-1/2. Residual reported with the same scaled formula as
/// the sparse solver; method tag dense_jacobi; iterations = Jacobi sweeps.
EigenResult circle_solve_pencil(const CirclePencil& pencil);
EigenResult circle_solve(const CircleProblem& p);

/// Least-squares fit lambda(s) ~ L + a * s^(-1/2). Needs at least three
/// strictly increasing s samples. `residual` is the RMS misfit.
struct ExtrapolationFit {
    double limit = 0.0;
    double coefficient = 0.0;
    double residual = 0.0;
};
ExtrapolationFit richardson_extrapolate(const std::vector<std::pair<double, double>>& lambdas);

/// 1-D analog of the surface Morse rule: local maxima on the periodic grid,
/// ties broken by index, plus the predicted limit min over maxima of c.
struct CircleMorse {
    std::vector<int> maxima;
    double predicted_limit = 0.0;
    bool degenerate = false;
};
CircleMorse circle_local_maxima(const Eigen::VectorXd& f_values, const Eigen::VectorXd& c_values);

/// CSV rows "s,lambda,residual".
void write_circle_csv(std::ostream& out,
                      const std::vector<std::tuple<double, double, double>>& rows);

} // namespace drift
