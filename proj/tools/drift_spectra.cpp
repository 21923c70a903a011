#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "drift/acceptance.hpp"
#include "drift/config.hpp"
#include "drift/experiment.hpp"
#include "drift/mesh.hpp"
#include "drift/morse.hpp"
#include "drift/spectral.hpp"

namespace {

// stable exit contract
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalidMesh = 2;
constexpr int kExitDegenerateMorse = 3;
constexpr int kExitSolverFailure = 4;
constexpr int kExitInconclusive = 5;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    bool quiet = false;
};

drift::Config load(const CommonArgs& args) {
    drift::Config cfg = drift::load_config_file(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    return cfg;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text << '\n';
    if (!out) throw std::runtime_error("write failure on " + path);
}

int cmd_mesh_info(const CommonArgs& args) {
    const drift::Config cfg = load(args);
    const drift::TriMesh mesh = drift::build_mesh(cfg.manifold);
    const drift::ValidationReport rep = drift::validate(mesh);
    std::printf("closed=%s orientable=%s chi=%d V=%d E=%d F=%d area=%.12g min_area=%.3g "
                "min_angle=%.4f obtuse=%d\n",
                rep.closed ? "true" : "false", rep.orientable ? "true" : "false",
                rep.euler_characteristic, mesh.vertex_count(), mesh.edge_count(),
                mesh.triangle_count(), mesh.total_area(), rep.min_area, rep.min_angle,
                rep.obtuse_triangle_count);
    if (!rep.detail.empty()) std::printf("detail: %s\n", rep.detail.c_str());
    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "{\n  \"closed\": %s,\n  \"orientable\": %s,\n"
                      "  \"euler_characteristic\": %d,\n  \"min_area\": %.17g,\n"
                      "  \"min_angle\": %.17g,\n  \"obtuse_triangle_count\": %d\n}",
                      rep.closed ? "true" : "false", rep.orientable ? "true" : "false",
                      rep.euler_characteristic, rep.min_area, rep.min_angle,
                      rep.obtuse_triangle_count);
        write_text_file((std::filesystem::path(args.out_dir) / "validation.json").string(), buf);
    }
    return rep.ok() ? kExitOk : kExitInvalidMesh;
}

int cmd_morse(const CommonArgs& args) {
    const drift::Config cfg = load(args);
    if (cfg.f_text.empty() || cfg.c_text.empty())
        throw drift::ConfigError("config: morse needs both 'f' and 'c'");
    const drift::TriMesh mesh = drift::build_mesh(cfg.manifold);
    const drift::ScalarField f = drift::sample(drift::parse_expression(cfg.f_text), mesh);
    const drift::ScalarField c = drift::sample(drift::parse_expression(cfg.c_text), mesh);
    const drift::MorseReport rep = drift::predicted_limit(f, c, mesh);
    const std::string json = rep.to_json();
    std::printf("%s\n", json.c_str());
    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        write_text_file((std::filesystem::path(args.out_dir) / "morse.json").string(), json);
    }
    return rep.degenerate ? kExitDegenerateMorse : kExitOk;
}

int cmd_solve(const CommonArgs& args) {
    const drift::Config cfg = load(args);
    if (cfg.f_text.empty() || cfg.c_text.empty())
        throw drift::ConfigError("config: solve needs both 'f' and 'c'");
    if (cfg.s_grid.size() != 1)
        throw drift::ConfigError("config: solve needs s_grid with exactly one entry");
    const double s = cfg.s_grid.front();
    const drift::TriMesh mesh = drift::build_mesh(cfg.manifold);
    const drift::ScalarField f = drift::sample(drift::parse_expression(cfg.f_text), mesh);
    const drift::ScalarField c = drift::sample(drift::parse_expression(cfg.c_text), mesh);
    const drift::WeightedOperator op = drift::assemble(mesh, f, c, s);
    drift::SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.method = cfg.method;
    opts.seed = cfg.seed;
    const drift::EigenResult res = drift::smallest_eigenpair(op, opts);
    std::printf("%s\n", res.to_json().c_str());
    if (!args.quiet) {
        const drift::PositivityReport pos = drift::positivity_check(res);
        const double energy = res.vector.dot(op.stiffness * res.vector);
        std::fprintf(stderr,
                     "diagnostics: c_*=%.12g c^*=%.12g bounds_ok=%d energy=%.6g energy_ok=%d "
                     "positive=%d\n",
                     op.c_min, op.c_max,
                     (res.lambda >= op.c_min - cfg.tol && res.lambda <= op.c_max + cfg.tol) ? 1 : 0,
                     energy, energy <= (op.c_max - op.c_min) + cfg.tol ? 1 : 0,
                     pos.all_same_sign ? 1 : 0);
    }
    if (!args.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(args.out_dir);
        write_text_file((fs::path(args.out_dir) / "eigenresult.json").string(), res.to_json());
        {
            std::ofstream vec((fs::path(args.out_dir) / "eigenvector.csv").string());
            drift::write_eigenvector_csv(vec, res.vector);
        }
        {
            std::ofstream mm((fs::path(args.out_dir) / "stiffness.mtx").string());
            drift::write_matrix_market(mm, op.stiffness);
        }
        {
            std::ofstream mm((fs::path(args.out_dir) / "reaction.mtx").string());
            drift::write_matrix_market_diagonal(mm, op.reaction);
        }
        {
            std::ofstream mm((fs::path(args.out_dir) / "mass.mtx").string());
            drift::write_matrix_market_diagonal(mm, op.mass);
        }
    }
    return res.converged ? kExitOk : kExitSolverFailure;
}

int cmd_sweep(const CommonArgs& args) {
    const drift::Config cfg = load(args);
    if (cfg.f_text.empty() || cfg.c_text.empty())
        throw drift::ConfigError("config: sweep needs both 'f' and 'c'");
    if (cfg.s_grid.empty()) throw drift::ConfigError("config: sweep needs a non-empty s_grid");
    const drift::TriMesh mesh = drift::build_mesh(cfg.manifold);
    drift::SweepConfig scfg;
    scfg.s_list = cfg.s_grid;
    scfg.solver.tol = cfg.tol;
    scfg.solver.max_iter = cfg.max_iter;
    scfg.solver.method = cfg.method;
    scfg.solver.seed = cfg.seed;
    scfg.concentration_radii = cfg.concentration_radii;
    scfg.verdict_rel_threshold = cfg.verdict_rel_threshold;
    const drift::SweepReport rep =
        drift::sweep(mesh, drift::parse_expression(cfg.f_text),
                     drift::parse_expression(cfg.c_text), scfg, cfg.manifold.describe());
    const auto written = drift::emit_report(rep, cfg.output_dir, cfg.output_formats);
    if (!args.quiet) {
        for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
        std::printf("verdict: %s (predicted limit %.12g, lambda(s_max) %.12g, threshold %.3g)\n",
                    rep.verdict.c_str(), rep.morse.predicted_limit, rep.rows.back().lambda,
                    rep.verdict_threshold);
    }
    bool solver_failure = false;
    for (const auto& row : rep.rows) solver_failure |= !row.converged;
    if (solver_failure) return kExitSolverFailure;
    if (rep.morse.degenerate) return kExitDegenerateMorse;
    return rep.pass ? kExitOk : kExitInconclusive;
}

int cmd_verify(const CommonArgs& args) {
    drift::AcceptanceOptions opts;
    if (!args.out_dir.empty()) opts.work_dir = args.out_dir;
    opts.quiet = args.quiet;
    // fail fast if the artifact directory is not writable
    std::error_code ec;
    std::filesystem::create_directories(opts.work_dir, ec);
    {
        const std::string probe = (std::filesystem::path(opts.work_dir) / ".probe").string();
        std::ofstream p(probe);
        if (!p) {
            std::fprintf(stderr, "error: output directory not writable: %s\n",
                         opts.work_dir.c_str());
            return kExitUsage;
        }
        p.close();
        std::filesystem::remove(probe, ec);
    }
    const auto results = drift::run_acceptance(opts);
    drift::print_results(std::cout, results);
    return drift::all_passed(results) ? kExitOk : kExitInconclusive;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"drift-spectra: principal eigenvalue of drifted elliptic operators on closed "
                 "triangulated surfaces"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", args.config_path, "JSON config file");
        if (config_required) opt->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_flag("--quiet", args.quiet, "suppress progress output");
    };

    CLI::App* sub_mesh = app.add_subcommand("mesh-info", "validate the manifold");
    add_common(sub_mesh, true);
    CLI::App* sub_morse = app.add_subcommand("morse", "classify critical points, predict the limit");
    add_common(sub_morse, true);
    CLI::App* sub_solve = app.add_subcommand("solve", "single eigensolve at s from the config");
    add_common(sub_solve, true);
    CLI::App* sub_sweep = app.add_subcommand("sweep", "run an s-sweep and emit reports");
    add_common(sub_sweep, true);
    CLI::App* sub_verify = app.add_subcommand("verify", "run the built-in verification suite");
    add_common(sub_verify, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sub_mesh->parsed()) return cmd_mesh_info(args);
        if (sub_morse->parsed()) return cmd_morse(args);
        if (sub_solve->parsed()) return cmd_solve(args);
        if (sub_sweep->parsed()) return cmd_sweep(args);
        if (sub_verify->parsed()) return cmd_verify(args);
        std::fprintf(stderr, "error: no subcommand\n");
        return kExitUsage;
    } catch (const drift::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const drift::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const drift::EvalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const drift::MeshError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvalidMesh;
    } catch (const drift::SolverError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolverFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}
