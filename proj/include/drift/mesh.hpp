#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drift/expr.hpp"

namespace drift {

class MeshError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-vertex samples of a scalar function on a mesh.
struct ScalarField {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    double min() const;
    double max() const;
};

struct ValidationReport {
    bool closed = false;
    bool orientable = false;
    int euler_characteristic = 0;
    double min_area = 0.0;
    double min_angle = 0.0; // radians
    int obtuse_triangle_count = 0;
    std::string detail;     // first offending edge/triangle, if any

    bool ok() const { return closed && orientable; }
};

/// Embedded closed orientable triangulated surface.
///
/// Triangles are counter-clockwise seen from outside. The geometry cache
/// (areas, P1 hat-function gradients, lumped vertex areas) is built once at
/// construction; instances are immutable afterwards and safe to share
/// between threads.
class TriMesh {
public:
    TriMesh(std::vector<Eigen::Vector3d> vertices,
            std::vector<std::array<int, 3>> triangles,
            std::optional<std::vector<Eigen::Vector2d>> parametric = std::nullopt);

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int triangle_count() const { return static_cast<int>(triangles_.size()); }
    int edge_count() const { return edge_count_; }

    const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    bool has_parametric() const { return parametric_.has_value(); }
    const std::vector<Eigen::Vector2d>& parametric() const;

    double triangle_area(int t) const { return tri_area_[static_cast<std::size_t>(t)]; }
    /// Gradient of the P1 hat function of corner k (0..2) of triangle t;
    /// a vector in the triangle plane, units 1/length.
    const Eigen::Vector3d& basis_gradient(int t, int k) const {
        return tri_grad_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    }
    /// Lumped vertex area m_i = sum of incident triangle areas / 3.
    double lumped_area(int i) const { return lumped_area_[static_cast<std::size_t>(i)]; }
    double total_area() const { return total_area_; }

    /// Undirected vertex adjacency (sorted, deduplicated).
    const std::vector<int>& vertex_neighbors(int i) const {
        return neighbors_[static_cast<std::size_t>(i)];
    }
    /// Triangles incident to vertex i (sorted).
    const std::vector<int>& vertex_triangles(int i) const {
        return vertex_tris_[static_cast<std::size_t>(i)];
    }

private:
    std::vector<Eigen::Vector3d> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::optional<std::vector<Eigen::Vector2d>> parametric_;

    std::vector<double> tri_area_;
    std::vector<std::array<Eigen::Vector3d, 3>> tri_grad_;
    std::vector<double> lumped_area_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::vector<int>> vertex_tris_;
    double total_area_ = 0.0;
    int edge_count_ = 0;
};

/// Subdivided icosahedron projected to the sphere, one vertex at each pole
/// so height-function experiments have their extrema at exact mesh vertices.
/// V = 10*4^k + 2. Throws on subdivisions > 8.
TriMesh icosphere(int subdivisions, double radius);

/// Torus ((R + r cos v) cos u, (R + r cos v) sin u, r sin v) on an nu x nv
/// periodic grid, quads split into triangles. Carries per-vertex (u, v).
/// Requires 0 < r < R and nu, nv >= 3.
TriMesh uv_torus(double R, double r, int nu, int nv);

/// ASCII OFF reader (triangles only). Rejects open and non-orientable
/// surfaces, naming the offending edge.
TriMesh load_off(std::istream& in);
TriMesh load_off_file(const std::string& path);

void save_off(const TriMesh& mesh, std::ostream& out);
void save_off_file(const TriMesh& mesh, const std::string& path);

/// Pure structural audit; findings go in the report, nothing throws.
ValidationReport validate(const TriMesh& mesh);

/// Evaluate an expression at every vertex. Binds x, y, z to the embedding
/// coordinates and u, v to the parametric coordinates when present.
ScalarField sample(const Expr& e, const TriMesh& mesh);

/// Dijkstra distances over the edge graph from `seed`, stopping beyond
/// `cutoff` (entries past the cutoff are +infinity). Multi-source variant
/// gives the distance to the nearest seed.
std::vector<double> geodesic_distances(const TriMesh& mesh, int seed, double cutoff);
std::vector<double> geodesic_distances(const TriMesh& mesh, const std::vector<int>& seeds,
                                       double cutoff);

/// Vertices within graph-geodesic distance `radius` of `seed`.
std::vector<int> geodesic_ball(const TriMesh& mesh, int seed, double radius);

} // namespace drift
