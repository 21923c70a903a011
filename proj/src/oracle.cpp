#include "drift/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <Eigen/Dense>

namespace drift {

namespace {

constexpr double kExponentClamp = -700.0;

double clamped_exp(double e) { return std::exp(std::max(e, kExponentClamp)); }

// Cholesky B = R^T R with R upper triangular, built column by column so the
// factor lives in the columns of the output (column-major). Returns false
// when a pivot is not positive.
bool cholesky_upper(Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    for (int j = 0; j < n; ++j) {
        double* cj = a.col(j).data();
        for (int k = 0; k < j; ++k) {
            const double* ck = a.col(k).data();
            double s = cj[k];
#pragma omp simd reduction(- : s)
            for (int i = 0; i < k; ++i) s -= ck[i] * cj[i];
            cj[k] = s / ck[k];
        }
        double s = cj[j];
#pragma omp simd reduction(- : s)
        for (int i = 0; i < j; ++i) s -= cj[i] * cj[i];
        if (!(s > 0.0)) return false;
        cj[j] = std::sqrt(s);
        for (int i = j + 1; i < n; ++i) cj[i] = 0.0;
    }
    return true;
}

} // namespace

CirclePencil circle_assemble(const CircleProblem& p) {
    if (p.n < 8) throw std::invalid_argument("circle_assemble: need n >= 8");
    if (p.n > 4096) throw std::invalid_argument("circle_assemble: n > 4096 refused (dense path)");
    if (!(p.s >= 0.0)) throw std::invalid_argument("circle_assemble: s must be >= 0");

    const int n = p.n;
    const double h = 2.0 * M_PI / n;
    CirclePencil out;
    out.s = p.s;
    out.f_values.resize(n);
    out.c_values.resize(n);
    EvalContext ctx{{"u", 0.0}};
    for (int j = 0; j < n; ++j) {
        ctx.bind("u", h * j);
        out.f_values(j) = p.f.eval(ctx);
        out.c_values(j) = p.c.eval(ctx);
    }
    out.f_max = out.f_values.maxCoeff();

    Eigen::VectorXd shifted = out.f_values.array() - out.f_max;
    out.stiffness = Eigen::MatrixXd::Zero(n, n);
    out.mass.resize(n);
    out.reaction.resize(n);
    for (int j = 0; j < n; ++j)
        out.mass(j) = h * clamped_exp(p.s * shifted(j));
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        // midpoint weight interpolated in the log domain: exact for linear s*f
        const double w = clamped_exp(p.s * 0.5 * (shifted(j) + shifted(jn)));
        out.stiffness(j, jn) += -w / h;
        out.stiffness(jn, j) += -w / h;
        out.stiffness(j, j) += w / h;
        out.stiffness(jn, jn) += w / h;
    }
    for (int j = 0; j < n; ++j) out.reaction(j) = out.c_values(j) * out.mass(j);
    return out;
}

DenseSpectrum jacobi_eigensolve(const Eigen::MatrixXd& symmetric, int max_sweeps) {
    const int n = static_cast<int>(symmetric.rows());
    if (n < 1 || symmetric.cols() != n)
        throw std::invalid_argument("jacobi_eigensolve: matrix must be square");

    // Shift to safely positive definite; undone exactly at the end.
    double gersh_min = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += std::abs(symmetric(i, j));
        gersh_min = std::min(gersh_min, symmetric(i, i) - off);
        scale = std::max(scale, std::abs(symmetric(i, i)) + off);
    }
    if (scale == 0.0) scale = 1.0;
    const double tau = std::max(0.0, -gersh_min) + 1e-3 * scale;

    Eigen::MatrixXd w = symmetric;
    w.diagonal().array() += tau;
    if (!cholesky_upper(w))
        throw SolverError("jacobi_eigensolve: shifted matrix not positive definite");
    const Eigen::MatrixXd r_factor = w; // kept for eigenvector recovery

    Eigen::VectorXd nsq(n);
    auto refresh_norm = [&](int j) {
        const double* cj = w.col(j).data();
        double s = 0.0;
#pragma omp simd reduction(+ : s)
        for (int i = 0; i < n; ++i) s += cj[i] * cj[i];
        nsq(j) = s;
    };
    for (int j = 0; j < n; ++j) refresh_norm(j);

    const double tol2 = 1e-13 * 1e-13;
    const int nb = 64; // block-cyclic pair order keeps both columns in cache
    int sweeps = 0;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        sweeps = sweep;
        long rotations = 0;
        for (int pb = 0; pb < n; pb += nb) {
            for (int qb = pb; qb < n; qb += nb) {
                const int pe = std::min(pb + nb, n), qe = std::min(qb + nb, n);
                for (int p = pb; p < pe; ++p) {
                    double* cp = w.col(p).data();
                    bool have_g = false;
                    double g_carry = 0.0;
                    for (int q = (qb == pb) ? p + 1 : qb; q < qe; ++q) {
                        double* cq = w.col(q).data();
                        double g;
                        if (have_g) {
                            g = g_carry;
                            have_g = false;
                        } else {
                            g = 0.0;
#pragma omp simd reduction(+ : g)
                            for (int i = 0; i < n; ++i) g += cp[i] * cq[i];
                        }
                        if (g * g <= tol2 * nsq(p) * nsq(q)) continue;
                        ++rotations;
                        const double theta = 0.5 * (nsq(q) - nsq(p)) / g;
                        const double t = ((theta >= 0.0) ? 1.0 : -1.0) /
                                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                        const double c = 1.0 / std::sqrt(1.0 + t * t);
                        const double s = t * c;
                        if (q + 1 < qe) {
                            // fold the next pair's dot product into this
                            // rotation's pass over the columns
                            const double* cq1 = w.col(q + 1).data();
                            double gn = 0.0;
#pragma omp simd reduction(+ : gn)
                            for (int i = 0; i < n; ++i) {
                                const double x = cp[i], y = cq[i];
                                const double xp = c * x - s * y;
                                cp[i] = xp;
                                cq[i] = s * x + c * y;
                                gn += xp * cq1[i];
                            }
                            g_carry = gn;
                            have_g = true;
                        } else {
#pragma omp simd
                            for (int i = 0; i < n; ++i) {
                                const double x = cp[i], y = cq[i];
                                cp[i] = c * x - s * y;
                                cq[i] = s * x + c * y;
                            }
                        }
                        nsq(p) -= t * g;
                        nsq(q) += t * g;
                    }
                }
            }
        }
        if (rotations == 0) break;
        if (sweep == max_sweeps)
            throw SolverError("jacobi_eigensolve: no convergence after " +
                              std::to_string(max_sweeps) + " sweeps");
        for (int j = 0; j < n; ++j) refresh_norm(j);
    }

    DenseSpectrum out;
    out.sweeps = sweeps;
    int jmin = 0;
    for (int j = 1; j < n; ++j)
        if (nsq(j) < nsq(jmin)) jmin = j;

    // column jmin of W equals R * v_min; one triangular solve recovers v_min
    Eigen::VectorXd v = r_factor.template triangularView<Eigen::Upper>().solve(
        Eigen::VectorXd(w.col(jmin)));
    v.normalize();
    out.min_vector = v;

    out.eigenvalues = nsq.array() - tau;
    std::sort(out.eigenvalues.data(), out.eigenvalues.data() + n);
    return out;
}

EigenResult circle_solve_pencil(const CirclePencil& pencil) {
    const int n = pencil.n();
    if (pencil.mass.minCoeff() <= 0.0)
        throw SolverError("circle_solve: mass matrix has non-positive entries");
    const Eigen::VectorXd sqrt_m = pencil.mass.cwiseSqrt();
    const Eigen::VectorXd inv_sqrt_m = sqrt_m.cwiseInverse();

    // B = M^-1/2 (A + C) M^-1/2, scaling one factor at a time so tiny masses
    // cannot underflow in intermediate products
    Eigen::MatrixXd b = pencil.stiffness;
    b.diagonal() += pencil.reaction;
    for (int j = 0; j < n; ++j) b.col(j) *= inv_sqrt_m(j);
    for (int i = 0; i < n; ++i) b.row(i) *= inv_sqrt_m(i);
    b = 0.5 * (b + b.transpose()).eval();

    const DenseSpectrum spec = jacobi_eigensolve(b);

    EigenResult res;
    res.method = SolveMethod::DenseJacobi;
    res.iterations = spec.sweeps;
    Eigen::VectorXd v = inv_sqrt_m.cwiseProduct(spec.min_vector);
    v /= std::sqrt(v.dot(pencil.mass.cwiseProduct(v)));
    if (pencil.mass.cwiseProduct(v).sum() < 0.0) v = -v;
    res.vector = v;

    Eigen::VectorXd av = pencil.stiffness * v + pencil.reaction.cwiseProduct(v);
    Eigen::VectorXd mv = pencil.mass.cwiseProduct(v);
    res.lambda = v.dot(av) / v.dot(mv);
    const double scale =
        ((Eigen::VectorXd(pencil.stiffness.diagonal()) + pencil.reaction).cwiseQuotient(
             pencil.mass))
            .cwiseAbs()
            .maxCoeff();
    res.residual = (av - res.lambda * mv).norm() / ((scale + std::abs(res.lambda)) * mv.norm());
    res.converged = true;
    return res;
}

EigenResult circle_solve(const CircleProblem& p) {
    return circle_solve_pencil(circle_assemble(p));
}

ExtrapolationFit richardson_extrapolate(const std::vector<std::pair<double, double>>& lambdas) {
    const int m = static_cast<int>(lambdas.size());
    if (m < 3) throw std::invalid_argument("richardson_extrapolate: need at least 3 samples");
    for (int i = 1; i < m; ++i)
        if (!(lambdas[static_cast<std::size_t>(i)].first >
              lambdas[static_cast<std::size_t>(i - 1)].first))
            throw std::invalid_argument("richardson_extrapolate: s values must be increasing");
    Eigen::MatrixXd design(m, 2);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        const double s = lambdas[static_cast<std::size_t>(i)].first;
        if (!(s > 0.0))
            throw std::invalid_argument("richardson_extrapolate: s values must be positive");
        design(i, 0) = 1.0;
        design(i, 1) = 1.0 / std::sqrt(s);
        rhs(i) = lambdas[static_cast<std::size_t>(i)].second;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 2) throw SolverError("richardson_extrapolate: rank-deficient fit");
    const Eigen::Vector2d coef = qr.solve(rhs);
    ExtrapolationFit fit;
    fit.limit = coef(0);
    fit.coefficient = coef(1);
    fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / m);
    return fit;
}

CircleMorse circle_local_maxima(const Eigen::VectorXd& f_values,
                                const Eigen::VectorXd& c_values) {
    const int n = static_cast<int>(f_values.size());
    if (c_values.size() != n)
        throw std::invalid_argument("circle_local_maxima: field size mismatch");
    CircleMorse out;
    auto higher = [&](int j, int i) {
        if (f_values(j) != f_values(i)) return f_values(j) > f_values(i);
        out.degenerate = true;
        return j > i;
    };
    double limit = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const int prev = (i + n - 1) % n, next = (i + 1) % n;
        if (!higher(prev, i) && !higher(next, i)) {
            out.maxima.push_back(i);
            limit = std::min(limit, c_values(i));
        }
    }
    out.predicted_limit = limit;
    return out;
}

void write_circle_csv(std::ostream& out,
                      const std::vector<std::tuple<double, double, double>>& rows) {
    out << "s,lambda,residual\n";
    char buf[96];
    for (const auto& [s, lambda, residual] : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s, lambda, residual);
        out << buf;
    }
}

} // namespace drift
