#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "drift/mesh.hpp"

namespace drift {

class SolverError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SolveMethod { Lobpcg, InversePower, DenseJacobi };

const char* method_name(SolveMethod m);

/// Sparse symmetric matrices of the weighted variational form at drift
/// strength s:
///   stiffness  A_ij = sum_T w_T  integral_T grad(phi_i) . grad(phi_j)
///   mass       M_ii = lumped_area_i * w_i        (diagonal)
///   reaction   C_ii = c_i * M_ii                 (diagonal)
/// with w evaluated in the log domain as exp(s * (f - max f)), exponent
/// clamped at -700 so M stays nonsingular where the true weight underflows.
/// The max-f shift does not change the generalized eigenvalues.
struct WeightedOperator {
    double s = 0.0;
    double f_offset = 0.0; // the max of f subtracted inside the exponents
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd reaction; // diagonal entries of C
    Eigen::VectorXd mass;     // diagonal entries of M
    double c_min = 0.0;       // c_* of the sampled reaction field
    double c_max = 0.0;       // c^*

    int n() const { return static_cast<int>(mass.size()); }
};

struct EigenResult {
    double lambda = 0.0;
    Eigen::VectorXd vector; // M-normalized, sign-fixed (M-weighted mean > 0)
    double residual = 0.0;  // scaled: ||(A+C)v - lambda Mv|| / ((scale+|lambda|)||Mv||)
    int iterations = 0;
    SolveMethod method = SolveMethod::Lobpcg;
    bool converged = false;

    std::string to_json() const;
};

struct SolveOptions {
    double tol = 1e-8;     // on the scaled residual; must lie in (0, 1e-2]
    int max_iter = 5000;
    SolveMethod method = SolveMethod::Lobpcg;
    unsigned seed = 42;    // perturbation of the constant initial guess
    std::optional<Eigen::VectorXd> warm_start; // initial vector in v-space
};

struct PositivityReport {
    bool all_same_sign = false;
    double worst_violation = 0.0; // max(0, -min_i v_i) / max|v|, after sign fix
};

WeightedOperator assemble(const TriMesh& mesh, const ScalarField& f, const ScalarField& c,
                          double s);

/// u^T (A+C) u / u^T M u. Throws on the zero vector.
double rayleigh_quotient(const WeightedOperator& op, const Eigen::VectorXd& u);

/// Smallest eigenpair of (A+C) v = lambda M v.
///
/// Lobpcg: block-size-1 LOBPCG on the M-symmetrized standard form with a
/// Jacobi preconditioner built from diag(A+C). InversePower: shifted inverse
/// iteration (shift just below c_*) with Jacobi-preconditioned CG inner
/// solves at inner tolerance 0.1 x the current outer residual. Non-converged
/// runs return the best iterate with converged=false.
EigenResult smallest_eigenpair(const WeightedOperator& op, const SolveOptions& opts = {});

/// Discrete Perron check on a converged eigenvector: with the sign fixed so
/// the M-weighted mean is positive, flags any component below
/// -1e-10 * max|v|. On meshes with obtuse triangles a violation is only a
/// warning (the M-matrix structure of A is lost); the caller decides.
PositivityReport positivity_check(const EigenResult& res);

/// Matrix Market coordinate format, symmetric lower triangle.
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& m);
/// Diagonal matrix in the same coordinate format.
void write_matrix_market_diagonal(std::ostream& out, const Eigen::VectorXd& diag);

void write_eigenvector_csv(std::ostream& out, const Eigen::VectorXd& v);

} // namespace drift
