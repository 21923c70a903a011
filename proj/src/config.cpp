#include "drift/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace drift {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError("config: " + where + " needs numeric '" + key + "'");
    return obj[key].get<double>();
}

std::vector<double> parse_s_grid(const json& j) {
    std::vector<double> grid;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("config: s_grid entries must be numbers");
            grid.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        reject_unknown_keys(j, {"start", "stop", "count", "spacing"}, "s_grid");
        const double start = require_number(j, "start", "s_grid");
        const double stop = require_number(j, "stop", "s_grid");
        const int count = static_cast<int>(require_number(j, "count", "s_grid"));
        std::string spacing = "linear";
        if (j.contains("spacing")) spacing = j["spacing"].get<std::string>();
        if (count < 1) throw ConfigError("config: s_grid count must be >= 1");
        if (spacing == "linear") {
            for (int i = 0; i < count; ++i)
                grid.push_back(count == 1 ? start
                                          : start + (stop - start) * i / (count - 1));
        } else if (spacing == "log") {
            if (!(start > 0.0) || !(stop > 0.0))
                throw ConfigError("config: log spacing needs positive start and stop");
            for (int i = 0; i < count; ++i)
                grid.push_back(count == 1 ? start
                                          : std::exp(std::log(start) +
                                                     (std::log(stop) - std::log(start)) * i /
                                                         (count - 1)));
        } else {
            throw ConfigError("config: s_grid spacing must be 'linear' or 'log'");
        }
    } else {
        throw ConfigError("config: s_grid must be an array or {start, stop, count, spacing}");
    }
    if (grid.empty()) throw ConfigError("config: s_grid is empty");
    for (double s : grid)
        if (!(s >= 0.0)) throw ConfigError("config: s values must be >= 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("config: s_grid must be strictly increasing");
    return grid;
}

ManifoldSpec parse_manifold(const json& j) {
    if (!j.is_object()) throw ConfigError("config: manifold must be an object");
    if (!j.contains("type")) throw ConfigError("config: manifold needs 'type'");
    const std::string type = j["type"].get<std::string>();
    ManifoldSpec spec;
    if (type == "icosphere") {
        reject_unknown_keys(j, {"type", "subdivisions", "radius"}, "manifold");
        spec.type = ManifoldSpec::Type::Icosphere;
        spec.subdivisions = static_cast<int>(require_number(j, "subdivisions", "manifold"));
        spec.radius = j.contains("radius") ? require_number(j, "radius", "manifold") : 1.0;
    } else if (type == "uv_torus") {
        reject_unknown_keys(j, {"type", "R", "r", "nu", "nv"}, "manifold");
        spec.type = ManifoldSpec::Type::UvTorus;
        spec.big_radius = require_number(j, "R", "manifold");
        spec.tube_radius = require_number(j, "r", "manifold");
        spec.nu = static_cast<int>(require_number(j, "nu", "manifold"));
        spec.nv = static_cast<int>(require_number(j, "nv", "manifold"));
    } else if (type == "off") {
        reject_unknown_keys(j, {"type", "path"}, "manifold");
        spec.type = ManifoldSpec::Type::Off;
        if (!j.contains("path") || !j["path"].is_string())
            throw ConfigError("config: manifold type 'off' needs string 'path'");
        spec.path = j["path"].get<std::string>();
    } else {
        throw ConfigError("config: unknown manifold type '" + type + "'");
    }
    return spec;
}

} // namespace

std::string ManifoldSpec::describe() const {
    std::ostringstream os;
    switch (type) {
    case Type::Icosphere:
        os << "icosphere(" << subdivisions << ", r=" << radius << ")";
        break;
    case Type::UvTorus:
        os << "uv_torus(R=" << big_radius << ", r=" << tube_radius << ", " << nu << "x" << nv
           << ")";
        break;
    case Type::Off:
        os << "off(" << path << ")";
        break;
    }
    return os.str();
}

Config parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j,
                        {"manifold", "f", "c", "s_grid", "solver", "concentration_radii",
                         "output", "seed", "verdict_rel_threshold"},
                        "top level");

    Config cfg;
    if (!j.contains("manifold")) throw ConfigError("config: missing 'manifold'");
    cfg.manifold = parse_manifold(j["manifold"]);

    if (j.contains("f")) cfg.f_text = j["f"].get<std::string>();
    if (j.contains("c")) cfg.c_text = j["c"].get<std::string>();
    if (j.contains("s_grid")) cfg.s_grid = parse_s_grid(j["s_grid"]);

    if (j.contains("solver")) {
        const json& s = j["solver"];
        reject_unknown_keys(s, {"method", "tol", "max_iter"}, "solver");
        if (s.contains("method")) {
            const std::string m = s["method"].get<std::string>();
            if (m == "lobpcg") cfg.method = SolveMethod::Lobpcg;
            else if (m == "inverse_power") cfg.method = SolveMethod::InversePower;
            else throw ConfigError("config: solver method must be lobpcg or inverse_power");
        }
        if (s.contains("tol")) cfg.tol = require_number(s, "tol", "solver");
        if (s.contains("max_iter"))
            cfg.max_iter = static_cast<int>(require_number(s, "max_iter", "solver"));
    }
    if (!(cfg.tol > 0.0) || cfg.tol > 1e-2)
        throw ConfigError("config: solver tol must lie in (0, 1e-2]");
    if (cfg.max_iter <= 0) throw ConfigError("config: solver max_iter must be positive");

    if (j.contains("concentration_radii")) {
        cfg.concentration_radii.clear();
        for (const auto& v : j["concentration_radii"])
            cfg.concentration_radii.push_back(v.get<double>());
        if (cfg.concentration_radii.size() < 2)
            throw ConfigError("config: need at least two concentration radii");
        for (double r : cfg.concentration_radii)
            if (!(r > 0.0)) throw ConfigError("config: concentration radii must be positive");
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        reject_unknown_keys(o, {"dir", "formats"}, "output");
        if (o.contains("dir")) cfg.output_dir = o["dir"].get<std::string>();
        if (o.contains("formats")) {
            cfg.output_formats.clear();
            for (const auto& v : o["formats"]) {
                const std::string fmt = v.get<std::string>();
                if (fmt != "csv" && fmt != "json" && fmt != "svg")
                    throw ConfigError("config: unknown output format '" + fmt + "'");
                cfg.output_formats.push_back(fmt);
            }
        }
    }

    if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
    if (j.contains("verdict_rel_threshold")) {
        cfg.verdict_rel_threshold = require_number(j, "verdict_rel_threshold", "top level");
        if (!(cfg.verdict_rel_threshold > 0.0))
            throw ConfigError("config: verdict_rel_threshold must be positive");
    }
    return cfg;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

TriMesh build_mesh(const ManifoldSpec& spec) {
    switch (spec.type) {
    case ManifoldSpec::Type::Icosphere:
        if (spec.subdivisions < 0 || spec.subdivisions > 8)
            throw ConfigError("config: icosphere subdivisions must lie in [0, 8]");
        if (!(spec.radius > 0.0)) throw ConfigError("config: icosphere radius must be positive");
        return icosphere(spec.subdivisions, spec.radius);
    case ManifoldSpec::Type::UvTorus:
        if (!(spec.tube_radius > 0.0) || !(spec.big_radius > spec.tube_radius))
            throw ConfigError("config: uv_torus needs 0 < r < R");
        if (spec.nu < 3 || spec.nv < 3) throw ConfigError("config: uv_torus needs nu, nv >= 3");
        return uv_torus(spec.big_radius, spec.tube_radius, spec.nu, spec.nv);
    case ManifoldSpec::Type::Off:
        if (!std::filesystem::exists(spec.path))
            throw ConfigError("config: OFF file not found: " + spec.path);
        return load_off_file(spec.path);
    }
    throw ConfigError("config: corrupt manifold spec");
}

} // namespace drift
