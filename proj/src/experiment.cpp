#include "drift/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace drift {

namespace {

std::vector<int> critical_vertices(const MorseReport& morse, bool maxima_only,
                                   bool non_maxima_only) {
    std::vector<int> out;
    for (const auto& cp : morse.criticals) {
        const bool is_max = cp.kind == CriticalKind::Maximum;
        if (maxima_only && !is_max) continue;
        if (non_maxima_only && is_max) continue;
        out.push_back(cp.vertex);
    }
    return out;
}

double mass_within(const Eigen::VectorXd& rho, const std::vector<double>& dist, double radius) {
    double total = 0.0;
    for (int i = 0; i < rho.size(); ++i)
        if (dist[static_cast<std::size_t>(i)] <= radius) total += rho(i);
    return total;
}

} // namespace

ConcentrationReport concentration(const WeightedOperator& op, const EigenResult& res,
                                  const MorseReport& morse, const TriMesh& mesh,
                                  const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("concentration: need at least one radius");
    if (res.vector.size() != op.mass.size())
        throw std::invalid_argument("concentration: eigenvector size mismatch");

    ConcentrationReport rep;
    rep.radii = radii;
    rep.rho = op.mass.cwiseProduct(res.vector.cwiseAbs2());
    const double total = rep.rho.sum();
    if (!(total > 0.0)) throw SolverError("concentration: zero probability mass");
    rep.rho /= total;

    const double r_max = *std::max_element(radii.begin(), radii.end());
    const double r_min = *std::min_element(radii.begin(), radii.end());

    const auto maxima = critical_vertices(morse, true, false);
    const auto non_max = critical_vertices(morse, false, true);
    const auto all_crit = critical_vertices(morse, false, false);

    const auto dist_maxima = geodesic_distances(mesh, maxima, r_max * 1.0000001);
    for (double r : radii) {
        const double m = mass_within(rep.rho, dist_maxima, r);
        rep.mass_on_maxima.push_back(m);
        // whole mesh inside the ball means the radius tells us nothing
        int inside = 0;
        for (double d : dist_maxima)
            if (d <= r) ++inside;
        if (inside == mesh.vertex_count()) rep.radii_saturated = true;
    }

    const auto dist_all = geodesic_distances(mesh, all_crit, r_min * 1.0000001);
    double m1 = 0.0;
    for (int i = 0; i < rep.rho.size(); ++i)
        if (!(dist_all[static_cast<std::size_t>(i)] <= r_min)) m1 += rep.rho(i);
    rep.mass_on_m1 = m1;

    if (non_max.empty()) {
        rep.mass_on_m2 = 0.0;
    } else {
        const auto dist_non_max = geodesic_distances(mesh, non_max, r_min * 1.0000001);
        rep.mass_on_m2 = mass_within(rep.rho, dist_non_max, r_min);
    }
    return rep;
}

TestFunctionBound test_function_bound(const TriMesh& mesh, const ScalarField& f,
                                      const ScalarField& c, double s, int center, double R) {
    if (center < 0 || center >= mesh.vertex_count())
        throw std::invalid_argument("test_function_bound: center vertex out of range");
    if (!(R > 0.0)) throw std::invalid_argument("test_function_bound: R must be positive");

    const auto dist = geodesic_distances(mesh, center, 3.0 * R * 1.0000001);
    int in_ball = 0;
    for (double d : dist)
        if (d <= 3.0 * R) ++in_ball;
    if (in_ball < 10)
        throw std::invalid_argument("test_function_bound: ball(3R) under-resolved (" +
                                    std::to_string(in_ball) + " vertices, need 10)");

    TestFunctionBound out;
    out.center = center;
    out.radius = R;
    out.ramp.resize(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const double d = dist[static_cast<std::size_t>(i)];
        double u = 0.0;
        if (d <= 2.0 * R) u = 1.0;
        else if (d <= 3.0 * R) u = (3.0 * R - d) / R;
        out.ramp(i) = u;
    }

    const WeightedOperator op = assemble(mesh, f, c, s);
    const double umu = out.ramp.dot(op.mass.cwiseProduct(out.ramp));
    if (!(umu > 0.0)) throw SolverError("test_function_bound: ramp has zero weighted mass");
    out.i_term = out.ramp.dot(op.stiffness * out.ramp) / umu;
    out.j_term = out.ramp.dot(op.reaction.cwiseProduct(out.ramp)) / umu;
    out.value = out.i_term + out.j_term;
    return out;
}

SweepReport sweep(const TriMesh& mesh, const Expr& f_expr, const Expr& c_expr,
                  const SweepConfig& config, const std::string& mesh_desc) {
    if (config.s_list.empty()) throw std::invalid_argument("sweep: empty s list");
    for (std::size_t i = 1; i < config.s_list.size(); ++i)
        if (!(config.s_list[i] > config.s_list[i - 1]))
            throw std::invalid_argument("sweep: s values must be strictly increasing");
    if (config.concentration_radii.size() < 2)
        throw std::invalid_argument("sweep: need two concentration radii");

    SweepReport rep;
    rep.mesh_desc = mesh_desc;
    rep.f_expr = f_expr.str();
    rep.c_expr = c_expr.str();

    const ScalarField f = sample(f_expr, mesh);
    const ScalarField c = sample(c_expr, mesh);
    rep.morse = predicted_limit(f, c, mesh);

    SolveOptions opts = config.solver;
    bool all_converged = true;
    for (double s : config.s_list) {
        const WeightedOperator op = assemble(mesh, f, c, s);
        const EigenResult res = smallest_eigenpair(op, opts);
        SweepRow row;
        row.s = s;
        row.lambda = res.lambda;
        row.residual = res.residual;
        row.iterations = res.iterations;
        row.converged = res.converged;
        all_converged &= res.converged;
        row.bounds_ok = (res.lambda >= op.c_min - opts.tol) && (res.lambda <= op.c_max + opts.tol);
        const double energy = res.vector.dot(op.stiffness * res.vector);
        row.energy_ok = energy <= (op.c_max - op.c_min) + opts.tol;
        const ConcentrationReport conc =
            concentration(op, res, rep.morse, mesh, config.concentration_radii);
        row.mass_max_r1 = conc.mass_on_maxima[0];
        row.mass_max_r2 = conc.mass_on_maxima[1];
        row.mass_m1 = conc.mass_on_m1;
        row.mass_m2 = conc.mass_on_m2;
        rep.rows.push_back(row);

        if (config.warm_start && res.converged) opts.warm_start = res.vector;
    }

    std::vector<std::pair<double, double>> samples;
    for (const auto& row : rep.rows)
        if (row.converged && row.s > 0.0) samples.emplace_back(row.s, row.lambda);
    if (samples.size() >= 3) {
        try {
            rep.fit = richardson_extrapolate(samples);
            rep.fit_valid = true;
        } catch (const std::exception&) {
            rep.fit_valid = false;
        }
    }

    rep.verdict_threshold = std::max(config.verdict_rel_threshold *
                                         (rep.morse.c_upper - rep.morse.c_star),
                                     100.0 * config.solver.tol);
    const double target = rep.morse.predicted_limit;
    const SweepRow& last = rep.rows.back();
    bool numeric_pass = last.converged &&
                        std::abs(last.lambda - target) <= rep.verdict_threshold;
    if (rep.fit_valid) numeric_pass &= std::abs(rep.fit.limit - target) <= rep.verdict_threshold;

    if (rep.morse.degenerate) {
        rep.verdict = "inconclusive (degenerate f)";
        rep.pass = false;
    } else if (!all_converged) {
        rep.verdict = "inconclusive (solver failure)";
        rep.pass = false;
    } else if (numeric_pass) {
        rep.verdict = "pass";
        rep.pass = true;
    } else {
        rep.verdict = "inconclusive";
        rep.pass = false;
    }
    return rep;
}

void SweepReport::write_csv(std::ostream& out) const {
    if (rows.empty()) throw std::invalid_argument("sweep report has no rows");
    out << "s,lambda,residual,iterations,bounds_ok,energy_ok,"
           "mass_max_r1,mass_max_r2,mass_M1,mass_M2\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                      r.s, r.lambda, r.residual, r.iterations, r.bounds_ok ? 1 : 0,
                      r.energy_ok ? 1 : 0, r.mass_max_r1, r.mass_max_r2, r.mass_m1, r.mass_m2);
        out << buf;
    }
}

std::string SweepReport::to_json() const {
    nlohmann::json j;
    j["problem"] = {{"mesh", mesh_desc}, {"f", f_expr}, {"c", c_expr}};
    j["morse"] = nlohmann::json::parse(morse.to_json());
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["rows"].push_back({{"s", r.s},
                             {"lambda", r.lambda},
                             {"residual", r.residual},
                             {"iterations", r.iterations},
                             {"converged", r.converged},
                             {"bounds_ok", r.bounds_ok},
                             {"energy_ok", r.energy_ok},
                             {"mass_max_r1", r.mass_max_r1},
                             {"mass_max_r2", r.mass_max_r2},
                             {"mass_M1", r.mass_m1},
                             {"mass_M2", r.mass_m2}});
    }
    j["extrapolation"] = {{"valid", fit_valid},
                          {"limit", fit.limit},
                          {"coefficient", fit.coefficient},
                          {"residual", fit.residual}};
    j["predicted_limit"] = morse.predicted_limit;
    j["verdict_threshold"] = verdict_threshold;
    j["verdict"] = verdict;
    j["pass"] = pass;
    return j.dump(2);
}

SweepReport sweep_report_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SweepReport rep;
    rep.mesh_desc = j.at("problem").at("mesh").get<std::string>();
    rep.f_expr = j.at("problem").at("f").get<std::string>();
    rep.c_expr = j.at("problem").at("c").get<std::string>();
    const auto& jm = j.at("morse");
    for (const auto& jc : jm.at("criticals")) {
        CriticalPoint cp;
        cp.vertex = jc.at("vertex").get<int>();
        const std::string kind = jc.at("kind").get<std::string>();
        cp.kind = kind == "maximum"  ? CriticalKind::Maximum
                  : kind == "minimum" ? CriticalKind::Minimum
                                      : CriticalKind::Saddle;
        cp.multiplicity = jc.at("multiplicity").get<int>();
        cp.f_value = jc.at("f").get<double>();
        cp.c_value = jc.at("c").get<double>();
        rep.morse.criticals.push_back(cp);
    }
    rep.morse.maximum_set = jm.at("maximum_set").get<std::vector<int>>();
    rep.morse.c_star = jm.at("c_star").get<double>();
    rep.morse.c_upper = jm.at("c_upper").get<double>();
    rep.morse.predicted_limit = jm.at("predicted_limit").get<double>();
    rep.morse.predicted_limit_global_max = jm.at("predicted_limit_global_max").get<double>();
    rep.morse.euler_lhs = jm.at("euler_lhs").get<int>();
    rep.morse.euler_chi = jm.at("euler_chi").get<int>();
    rep.morse.degenerate = jm.at("degenerate").get<bool>();
    for (const auto& jr : j.at("rows")) {
        SweepRow r;
        r.s = jr.at("s").get<double>();
        r.lambda = jr.at("lambda").get<double>();
        r.residual = jr.at("residual").get<double>();
        r.iterations = jr.at("iterations").get<int>();
        r.converged = jr.at("converged").get<bool>();
        r.bounds_ok = jr.at("bounds_ok").get<bool>();
        r.energy_ok = jr.at("energy_ok").get<bool>();
        r.mass_max_r1 = jr.at("mass_max_r1").get<double>();
        r.mass_max_r2 = jr.at("mass_max_r2").get<double>();
        r.mass_m1 = jr.at("mass_M1").get<double>();
        r.mass_m2 = jr.at("mass_M2").get<double>();
        rep.rows.push_back(r);
    }
    rep.fit_valid = j.at("extrapolation").at("valid").get<bool>();
    rep.fit.limit = j.at("extrapolation").at("limit").get<double>();
    rep.fit.coefficient = j.at("extrapolation").at("coefficient").get<double>();
    rep.fit.residual = j.at("extrapolation").at("residual").get<double>();
    rep.verdict_threshold = j.at("verdict_threshold").get<double>();
    rep.verdict = j.at("verdict").get<std::string>();
    rep.pass = j.at("pass").get<bool>();
    return rep;
}

void SweepReport::write_svg(std::ostream& out) const {
    if (rows.empty()) throw std::invalid_argument("sweep report has no rows");
    const int width = 800, height = 500;
    const int ml = 70, mr = 30, mt = 40, mb = 50;
    double s_min = rows.front().s, s_max = rows.back().s;
    if (s_max == s_min) s_max = s_min + 1.0;
    double y_min = morse.predicted_limit, y_max = morse.predicted_limit;
    for (const auto& r : rows) {
        y_min = std::min(y_min, r.lambda);
        y_max = std::max(y_max, r.lambda);
    }
    const double pad = std::max(0.05 * (y_max - y_min), 1e-6);
    y_min -= pad;
    y_max += pad;

    auto sx = [&](double s) { return ml + (s - s_min) / (s_max - s_min) * (width - ml - mr); };
    auto sy = [&](double y) {
        return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
    };
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml,
                  height - mb, width - mr, height - mb);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml, mt,
                  ml, height - mb);
    out << buf;
    // horizontal line at the predicted limit
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"crimson\" "
                  "stroke-dasharray=\"6 4\"/>\n",
                  ml, sy(morse.predicted_limit), width - mr, sy(morse.predicted_limit));
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"12\" fill=\"crimson\">L* = %.6g</text>\n",
                  width - mr - 120, sy(morse.predicted_limit) - 6, morse.predicted_limit);
    out << buf;
    // data polyline + markers
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.1f,%.1f ", sx(r.s), sy(r.lambda));
        out << buf;
    }
    out << "\"/>\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"steelblue\"/>\n", sx(r.s),
                      sy(r.lambda));
        out << buf;
    }
    // tick labels
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\">s = %.6g</text>\n", ml,
                  height - mb + 20, s_min);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"end\">s = %.6g</text>\n",
                  width - mr, height - mb + 20, s_max);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\">lambda(s), %s</text>\n", ml, mt - 14,
                  mesh_desc.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.6g</text>\n",
                  ml - 6, sy(y_min) , y_min);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.6g</text>\n",
                  ml - 6, sy(y_max) + 10, y_max);
    out << buf;
    out << "</svg>\n";
}

std::vector<std::string> emit_report(const SweepReport& report, const std::string& dir,
                                     const std::vector<std::string>& formats) {
    if (report.rows.empty()) throw std::invalid_argument("emit_report: no rows");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, auto writer) {
        const std::string path = (fs::path(dir) / name).string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("emit_report: cannot write " + path);
        writer(out);
        out.flush();
        if (!out) throw std::runtime_error("emit_report: write failure on " + path);
        written.push_back(path);
    };
    for (const auto& fmt : formats) {
        if (fmt == "csv") emit("sweep.csv", [&](std::ostream& o) { report.write_csv(o); });
        else if (fmt == "json") emit("sweep.json", [&](std::ostream& o) { o << report.to_json() << '\n'; });
        else if (fmt == "svg") emit("sweep.svg", [&](std::ostream& o) { report.write_svg(o); });
        else throw std::invalid_argument("emit_report: unknown format '" + fmt + "'");
    }
    return written;
}

} // namespace drift
