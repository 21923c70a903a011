#include "drift/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace drift {

const char* method_name(SolveMethod m) {
    switch (m) {
    case SolveMethod::Lobpcg: return "lobpcg";
    case SolveMethod::InversePower: return "inverse_power";
    case SolveMethod::DenseJacobi: return "dense_jacobi";
    }
    return "?";
}

namespace {

constexpr double kExponentClamp = -700.0;

double clamped_exp(double e) { return std::exp(std::max(e, kExponentClamp)); }

} // namespace

WeightedOperator assemble(const TriMesh& mesh, const ScalarField& f, const ScalarField& c,
                          double s) {
    const int n = mesh.vertex_count();
    if (f.size() != n || c.size() != n)
        throw std::invalid_argument("assemble: field size does not match mesh");
    if (!(s >= 0.0)) throw std::invalid_argument("assemble: drift strength s must be >= 0");

    WeightedOperator op;
    op.s = s;
    op.f_offset = f.max();
    op.c_min = c.min();
    op.c_max = c.max();

    // Shift before any arithmetic so that adding an exactly representable
    // constant to f reproduces the matrices bit for bit.
    std::vector<double> shifted(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) shifted[static_cast<std::size_t>(i)] = f[i] - op.f_offset;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        const double mean_shifted = (shifted[static_cast<std::size_t>(tri[0])] +
                                     shifted[static_cast<std::size_t>(tri[1])] +
                                     shifted[static_cast<std::size_t>(tri[2])]) / 3.0;
        double w = clamped_exp(s * mean_shifted);
#ifdef DRIFT_FAULT_INJECT_STIFFNESS_SIGN
        if (t == 0) w = -w;
#endif
        const double area = mesh.triangle_area(t);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double val = w * area *
                                   mesh.basis_gradient(t, a).dot(mesh.basis_gradient(t, b));
                triplets.emplace_back(tri[static_cast<std::size_t>(a)],
                                      tri[static_cast<std::size_t>(b)], val);
            }
        }
    }
    op.stiffness.resize(n, n);
    op.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    op.stiffness.makeCompressed();

    op.mass.resize(n);
    op.reaction.resize(n);
    for (int i = 0; i < n; ++i) {
        op.mass(i) = mesh.lumped_area(i) * clamped_exp(s * shifted[static_cast<std::size_t>(i)]);
        op.reaction(i) = c[i] * op.mass(i);
    }
    return op;
}

double rayleigh_quotient(const WeightedOperator& op, const Eigen::VectorXd& u) {
    if (u.size() != op.mass.size())
        throw std::invalid_argument("rayleigh_quotient: vector size mismatch");
    const double uu = u.squaredNorm();
    if (uu == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
    const double num = u.dot(op.stiffness * u) + u.dot(op.reaction.cwiseProduct(u));
    const double den = u.dot(op.mass.cwiseProduct(u));
    if (den <= 0.0) throw SolverError("rayleigh_quotient: vector has non-positive M-norm");
    return num / den;
}

namespace {

struct PencilContext {
    const WeightedOperator& op;
    Eigen::VectorXd sqrt_m;
    Eigen::VectorXd inv_sqrt_m;
    Eigen::VectorXd diag_b; // diag of M^-1/2 (A+C) M^-1/2
    double scale;           // residual denominator scale

    explicit PencilContext(const WeightedOperator& o) : op(o) {
        if (o.mass.minCoeff() <= 0.0)
            throw SolverError("solver: mass matrix has non-positive entries");
        sqrt_m = o.mass.cwiseSqrt();
        inv_sqrt_m = sqrt_m.cwiseInverse();
        Eigen::VectorXd ac_diag = Eigen::VectorXd(o.stiffness.diagonal()) + o.reaction;
        diag_b = ac_diag.cwiseQuotient(o.mass);
        scale = std::max(diag_b.cwiseAbs().maxCoeff(), 1e-300);
    }

    // y -> M^-1/2 (A+C) M^-1/2 y
    Eigen::VectorXd apply_b(const Eigen::VectorXd& y) const {
        Eigen::VectorXd v = inv_sqrt_m.cwiseProduct(y);
        Eigen::VectorXd av = op.stiffness * v + op.reaction.cwiseProduct(v);
        return inv_sqrt_m.cwiseProduct(av);
    }

    // contract residual for iterate x in y-space with Rayleigh value theta
    double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& bx, double theta) const {
        const double num = sqrt_m.cwiseProduct(bx - theta * x).norm();
        const double den = (scale + std::abs(theta)) * sqrt_m.cwiseProduct(x).norm();
        return num / den;
    }
};

Eigen::VectorXd initial_vector(const WeightedOperator& op, const SolveOptions& opts) {
    const int n = op.n();
    if (opts.warm_start) {
        if (opts.warm_start->size() != n)
            throw std::invalid_argument("solver: warm start vector size mismatch");
        if (opts.warm_start->norm() == 0.0)
            throw std::invalid_argument("solver: warm start vector is zero");
        return *opts.warm_start;
    }
    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0(i) = 1.0 + 1e-3 * dist(rng);
    return v0;
}

EigenResult finalize(const PencilContext& ctx, Eigen::VectorXd x, int iterations,
                     SolveMethod method, double tol) {
    // back to v-space; x normalized in l2 means v is M-normalized
    x.normalize();
    Eigen::VectorXd v = ctx.inv_sqrt_m.cwiseProduct(x);
    if (ctx.op.mass.cwiseProduct(v).sum() < 0.0) v = -v;

    EigenResult res;
    res.lambda = rayleigh_quotient(ctx.op, v);
    res.vector = std::move(v);
    Eigen::VectorXd av = ctx.op.stiffness * res.vector +
                         ctx.op.reaction.cwiseProduct(res.vector);
    Eigen::VectorXd mv = ctx.op.mass.cwiseProduct(res.vector);
    res.residual = (av - res.lambda * mv).norm() / ((ctx.scale + std::abs(res.lambda)) * mv.norm());
    res.iterations = iterations;
    res.method = method;
    res.converged = res.residual <= tol;
    return res;
}

// twice-is-enough Gram-Schmidt against an orthonormal set
void orthogonalize(Eigen::VectorXd& v, Eigen::VectorXd& bv,
                   const std::vector<const Eigen::VectorXd*>& basis,
                   const std::vector<const Eigen::VectorXd*>& b_basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const double coef = basis[k]->dot(v);
            v -= coef * (*basis[k]);
            bv -= coef * (*b_basis[k]);
        }
    }
}

EigenResult solve_lobpcg(const WeightedOperator& op, const SolveOptions& opts) {
    const PencilContext ctx(op);
    const int n = op.n();

    const double prec_floor = 1e-12 * std::max(1.0, ctx.diag_b.cwiseAbs().maxCoeff());
    const Eigen::VectorXd precond = ctx.diag_b.cwiseMax(prec_floor);

    Eigen::VectorXd x = ctx.sqrt_m.cwiseProduct(initial_vector(op, opts));
    x.normalize();
    Eigen::VectorXd bx = ctx.apply_b(x);
    double theta = x.dot(bx);

    Eigen::VectorXd p, bp;
    bool have_p = false;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        if (ctx.residual(x, bx, theta) <= opts.tol) break;

        Eigen::VectorXd r = bx - theta * x;
        Eigen::VectorXd w = r.cwiseQuotient(precond);
        Eigen::VectorXd bw; // filled after orthonormalization

        // orthonormalize w against x (and later p against x, w)
        for (int pass = 0; pass < 2; ++pass) w -= x.dot(w) * x;
        const double wn = w.norm();
        if (!(wn > n * 1e-300)) break; // preconditioned residual vanished
        w /= wn;
        bw = ctx.apply_b(w);

        if (have_p) {
            std::vector<const Eigen::VectorXd*> basis{&x, &w};
            std::vector<const Eigen::VectorXd*> b_basis{&bx, &bw};
            orthogonalize(p, bp, basis, b_basis);
            const double pn = p.norm();
            if (pn > 1e-8) {
                p /= pn;
                bp /= pn;
            } else {
                have_p = false;
            }
        }

        const int dim = have_p ? 3 : 2;
        Eigen::MatrixXd basis(n, dim), b_mat(n, dim);
        basis.col(0) = x; b_mat.col(0) = bx;
        basis.col(1) = w; b_mat.col(1) = bw;
        if (have_p) { basis.col(2) = p; b_mat.col(2) = bp; }

        Eigen::MatrixXd gram = basis.transpose() * b_mat;
        gram = 0.5 * (gram + gram.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success)
            throw SolverError("lobpcg: Rayleigh-Ritz eigen decomposition failed");
        const Eigen::VectorXd y = es.eigenvectors().col(0);

        Eigen::VectorXd x_new = basis * y;
        Eigen::VectorXd bx_new = b_mat * y;
        Eigen::VectorXd p_new = y(1) * w;
        Eigen::VectorXd bp_new = y(1) * bw;
        if (have_p) {
            p_new += y(2) * p;
            bp_new += y(2) * bp;
        }
        const double pn = p_new.norm();
        if (pn > 1e-300) {
            p = p_new / pn;
            bp = bp_new / pn;
            have_p = true;
        } else {
            have_p = false;
        }
        const double xn = x_new.norm();
        x = x_new / xn;
        bx = bx_new / xn;
        theta = x.dot(bx);
    }
    return finalize(ctx, x, iter, SolveMethod::Lobpcg, opts.tol);
}

// Jacobi-preconditioned CG on K z = b; returns iterations used, -1 on failure
// to reach rtol within maxit (the best iterate is still returned in z).
int pcg(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& diag_k,
        const Eigen::VectorXd& b, Eigen::VectorXd& z, double rtol, int maxit) {
    const double bnorm = b.norm();
    if (bnorm == 0.0) { z.setZero(); return 0; }
    Eigen::VectorXd r = b - K * z;
    Eigen::VectorXd d = r.cwiseQuotient(diag_k);
    double rho = r.dot(d);
    Eigen::VectorXd q(z.size());
    for (int it = 0; it < maxit; ++it) {
        if (r.norm() <= rtol * bnorm) return it;
        q.noalias() = K * d;
        const double dq = d.dot(q);
        if (!(dq > 0.0))
            throw SolverError("inverse_power: CG breakdown (non-positive curvature) at iteration " +
                              std::to_string(it));
        const double alpha = rho / dq;
        z += alpha * d;
        r -= alpha * q;
        Eigen::VectorXd s = r.cwiseQuotient(diag_k);
        const double rho_new = r.dot(s);
        d = s + (rho_new / rho) * d;
        rho = rho_new;
    }
    return (r.norm() <= rtol * bnorm) ? maxit : -1;
}

EigenResult solve_inverse_power(const WeightedOperator& op, const SolveOptions& opts) {
    const PencilContext ctx(op);
    const int n = op.n();

    const double range = op.c_max - op.c_min;
    double sigma = op.c_min - 0.1 * range;
    if (range <= 1e-12 * std::max(1.0, std::abs(op.c_min)))
        sigma = op.c_min - 0.01 * std::max(1.0, std::abs(op.c_min));

    Eigen::SparseMatrix<double> K = op.stiffness;
    Eigen::VectorXd shift_diag = op.reaction - sigma * op.mass;
    for (int i = 0; i < n; ++i) K.coeffRef(i, i) += shift_diag(i);
    K.makeCompressed();
    Eigen::VectorXd diag_k = Eigen::VectorXd(K.diagonal());
    const double dk_floor = 1e-12 * std::max(1.0, diag_k.cwiseAbs().maxCoeff());
    diag_k = diag_k.cwiseMax(dk_floor);

    Eigen::VectorXd v = initial_vector(op, opts);
    v /= std::sqrt(v.dot(op.mass.cwiseProduct(v)));

    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        Eigen::VectorXd av = op.stiffness * v + op.reaction.cwiseProduct(v);
        Eigen::VectorXd mv = op.mass.cwiseProduct(v);
        const double lambda = v.dot(av); // v is M-normalized
        const double res = (av - lambda * mv).norm() /
                           ((ctx.scale + std::abs(lambda)) * mv.norm());
        if (res <= opts.tol) break;

        const double inner_rtol = std::clamp(0.1 * res, 1e-14, 0.1);
        Eigen::VectorXd z = v; // good starting guess: z ~ v/(lambda - sigma)
        pcg(K, diag_k, mv, z, inner_rtol, std::max(200, 10 * n));
        const double zm = std::sqrt(z.dot(op.mass.cwiseProduct(z)));
        if (!(zm > 0.0)) throw SolverError("inverse_power: iterate collapsed to zero");
        v = z / zm;
    }
    return finalize(ctx, ctx.sqrt_m.cwiseProduct(v), iter, SolveMethod::InversePower, opts.tol);
}

} // namespace

EigenResult smallest_eigenpair(const WeightedOperator& op, const SolveOptions& opts) {
    if (!(opts.tol > 0.0) || opts.tol > 1e-2)
        throw std::invalid_argument("smallest_eigenpair: tol must lie in (0, 1e-2]");
    if (opts.max_iter <= 0)
        throw std::invalid_argument("smallest_eigenpair: max_iter must be positive");
    switch (opts.method) {
    case SolveMethod::Lobpcg: return solve_lobpcg(op, opts);
    case SolveMethod::InversePower: return solve_inverse_power(op, opts);
    case SolveMethod::DenseJacobi:
        throw std::invalid_argument(
            "smallest_eigenpair: dense_jacobi is the reference-path tag; use the circle oracle");
    }
    throw std::invalid_argument("smallest_eigenpair: unknown method");
}

PositivityReport positivity_check(const EigenResult& res) {
    PositivityReport rep;
    const double vmax = res.vector.cwiseAbs().maxCoeff();
    if (vmax == 0.0) return rep;
    const double vmin = res.vector.minCoeff();
    rep.worst_violation = std::max(0.0, -vmin) / vmax;
    rep.all_same_sign = vmin > -1e-10 * vmax;
    return rep;
}

void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& m) {
    std::vector<std::string> lines;
    long count = 0;
    char buf[96];
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    std::string body;
    for (int k = 0; k < m.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
            if (it.row() < it.col()) continue; // lower triangle only
            std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()) + 1,
                          static_cast<long>(it.col()) + 1, it.value());
            body += buf;
            ++count;
        }
    }
    out << m.rows() << ' ' << m.cols() << ' ' << count << '\n' << body;
}

void write_matrix_market_diagonal(std::ostream& out, const Eigen::VectorXd& diag) {
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << diag.size() << ' ' << diag.size() << ' ' << diag.size() << '\n';
    char buf[64];
    for (int i = 0; i < diag.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, i + 1, diag(i));
        out << buf;
    }
}

void write_eigenvector_csv(std::ostream& out, const Eigen::VectorXd& v) {
    out << "vertex_index,value\n";
    char buf[48];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", i, v(i));
        out << buf;
    }
}

std::string EigenResult::to_json() const {
    nlohmann::json j;
    j["lambda"] = lambda;
    j["residual"] = residual;
    j["iterations"] = iterations;
    j["method"] = method_name(method);
    return j.dump(2);
}

} // namespace drift
