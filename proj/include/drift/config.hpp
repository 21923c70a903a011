#pragma once

#include <string>
#include <vector>

#include "drift/mesh.hpp"
#include "drift/spectral.hpp"

namespace drift {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifoldSpec {
    enum class Type { Icosphere, UvTorus, Off };
    Type type = Type::Icosphere;
    int subdivisions = 0;
    double radius = 1.0;
    double big_radius = 2.0; // torus R
    double tube_radius = 1.0; // torus r
    int nu = 0;
    int nv = 0;
    std::string path; // OFF file

    std::string describe() const;
};

/// One experiment = one JSON document. Unknown keys are rejected everywhere;
/// all randomness flows from the single seed.
struct Config {
    ManifoldSpec manifold;
    std::string f_text;
    std::string c_text;
    std::vector<double> s_grid;
    SolveMethod method = SolveMethod::Lobpcg;
    double tol = 1e-8;
    int max_iter = 5000;
    std::vector<double> concentration_radii{0.2, 0.4};
    std::string output_dir = "out";
    std::vector<std::string> output_formats{"csv", "json", "svg"};
    unsigned seed = 42;
    double verdict_rel_threshold = 0.1;
};

Config parse_config(const std::string& json_text);
Config load_config_file(const std::string& path);

/// Instantiate the manifold section. Parameter problems throw ConfigError;
/// structural problems in OFF input throw MeshError.
TriMesh build_mesh(const ManifoldSpec& spec);

} // namespace drift
