#pragma once

#include <string>
#include <vector>

#include "drift/mesh.hpp"
#include "drift/morse.hpp"
#include "drift/oracle.hpp"
#include "drift/spectral.hpp"

namespace drift {

/// Discrete probability masses rho_i = M_ii v_i^2 / sum_j M_jj v_j^2 of the
/// concentration measure, partitioned by distance to the critical set.
struct ConcentrationReport {
    Eigen::VectorXd rho;
    std::vector<double> radii;
    std::vector<double> mass_on_maxima; // one entry per radius
    double mass_on_m1 = 0.0; // regular vertices outside every critical ball
    double mass_on_m2 = 0.0; // within the smallest radius of a non-max critical
    bool radii_saturated = false; // some radius reached the whole mesh
};

struct SweepRow {
    double s = 0.0;
    double lambda = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool bounds_ok = false;
    bool energy_ok = false;
    double mass_max_r1 = 0.0;
    double mass_max_r2 = 0.0;
    double mass_m1 = 0.0;
    double mass_m2 = 0.0;
};

struct SweepReport {
    std::string mesh_desc;
    std::string f_expr;
    std::string c_expr;
    MorseReport morse;
    std::vector<SweepRow> rows;
    bool fit_valid = false;
    ExtrapolationFit fit;
    double verdict_threshold = 0.0;
    std::string verdict; // "pass" | "inconclusive" | "inconclusive (degenerate f)"
    bool pass = false;

    std::string to_json() const;
    void write_csv(std::ostream& out) const;
    void write_svg(std::ostream& out) const;
};

/// Structural parse of an emitted report (round-trip checks, tooling).
SweepReport sweep_report_from_json(const std::string& text);

struct SweepConfig {
    std::vector<double> s_list;
    SolveOptions solver;
    std::vector<double> concentration_radii{0.2, 0.4};
    double verdict_rel_threshold = 0.1; // fraction of c^* - c_*
    bool warm_start = true;
};

/// One converged solve per s (warm-started along the sweep), with the bound,
/// energy, and concentration diagnostics per row, the s^(-1/2) extrapolation,
/// and a verdict comparing lambda(s_max) and the extrapolated limit against
/// the Morse prediction L*.
SweepReport sweep(const TriMesh& mesh, const Expr& f_expr, const Expr& c_expr,
                  const SweepConfig& config, const std::string& mesh_desc = "");

ConcentrationReport concentration(const WeightedOperator& op, const EigenResult& res,
                                  const MorseReport& morse, const TriMesh& mesh,
                                  const std::vector<double>& radii);

/// Rayleigh quotient of the discrete ramp u_R (1 on ball(2R), linear taper
/// (3R-d)/R on ball(3R) \ ball(2R), 0 outside), split into its gradient part
/// I and reaction part J. Requires at least 10 vertices in ball(3R).
struct TestFunctionBound {
    int center = -1;
    double radius = 0.0;     // R
    Eigen::VectorXd ramp;    // u_R per vertex
    double value = 0.0;      // I + J
    double i_term = 0.0;
    double j_term = 0.0;
};
TestFunctionBound test_function_bound(const TriMesh& mesh, const ScalarField& f,
                                      const ScalarField& c, double s, int center, double R);

/// Writes sweep.csv / sweep.json / sweep.svg (per `formats`) into `dir`,
/// creating it if needed. Returns the paths written.
std::vector<std::string> emit_report(const SweepReport& report, const std::string& dir,
                                     const std::vector<std::string>& formats);

} // namespace drift
