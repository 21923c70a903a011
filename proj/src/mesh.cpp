#include "drift/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

namespace drift {

double ScalarField::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, v);
    return m;
}

double ScalarField::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    return m;
}

TriMesh::TriMesh(std::vector<Eigen::Vector3d> vertices,
                 std::vector<std::array<int, 3>> triangles,
                 std::optional<std::vector<Eigen::Vector2d>> parametric)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      parametric_(std::move(parametric)) {
    const int nv = vertex_count();
    const int nt = triangle_count();
    if (nv < 3 || nt < 2) throw MeshError("mesh too small to be a closed surface");
    if (parametric_ && static_cast<int>(parametric_->size()) != nv)
        throw MeshError("parametric coordinate count does not match vertex count");

    for (const auto& t : triangles_)
        for (int k = 0; k < 3; ++k)
            if (t[static_cast<std::size_t>(k)] < 0 || t[static_cast<std::size_t>(k)] >= nv)
                throw MeshError("triangle vertex index out of range");

    tri_area_.resize(static_cast<std::size_t>(nt));
    tri_grad_.resize(static_cast<std::size_t>(nt));
    lumped_area_.assign(static_cast<std::size_t>(nv), 0.0);
    neighbors_.resize(static_cast<std::size_t>(nv));
    vertex_tris_.resize(static_cast<std::size_t>(nv));

    for (int t = 0; t < nt; ++t) {
        const auto& tri = triangles_[static_cast<std::size_t>(t)];
        const Eigen::Vector3d& p0 = vertices_[static_cast<std::size_t>(tri[0])];
        const Eigen::Vector3d& p1 = vertices_[static_cast<std::size_t>(tri[1])];
        const Eigen::Vector3d& p2 = vertices_[static_cast<std::size_t>(tri[2])];
        const Eigen::Vector3d cross = (p1 - p0).cross(p2 - p0);
        const double doubled = cross.norm();
        const double area = 0.5 * doubled;
        tri_area_[static_cast<std::size_t>(t)] = area;
        if (area > 0.0) {
            const Eigen::Vector3d normal = cross / doubled;
            // gradient of the hat function at corner k is the in-plane
            // normal of the opposite edge, scaled by 1/height
            tri_grad_[static_cast<std::size_t>(t)][0] = normal.cross(p2 - p1) / doubled;
            tri_grad_[static_cast<std::size_t>(t)][1] = normal.cross(p0 - p2) / doubled;
            tri_grad_[static_cast<std::size_t>(t)][2] = normal.cross(p1 - p0) / doubled;
        } else {
            tri_grad_[static_cast<std::size_t>(t)].fill(Eigen::Vector3d::Zero());
        }
        for (int k = 0; k < 3; ++k) {
            const int v = tri[static_cast<std::size_t>(k)];
            lumped_area_[static_cast<std::size_t>(v)] += area / 3.0;
            vertex_tris_[static_cast<std::size_t>(v)].push_back(t);
        }
        total_area_ += area;
    }

    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri[static_cast<std::size_t>(k)];
            const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
            ++edge_use[{std::min(a, b), std::max(a, b)}];
            neighbors_[static_cast<std::size_t>(a)].push_back(b);
            neighbors_[static_cast<std::size_t>(b)].push_back(a);
        }
    }
    edge_count_ = static_cast<int>(edge_use.size());
    for (auto& nb : neighbors_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
}

const std::vector<Eigen::Vector2d>& TriMesh::parametric() const {
    if (!parametric_) throw MeshError("mesh has no parametric coordinates");
    return *parametric_;
}

namespace {

double signed_volume(const std::vector<Eigen::Vector3d>& verts,
                     const std::vector<std::array<int, 3>>& tris) {
    double vol = 0.0;
    for (const auto& t : tris) {
        const Eigen::Vector3d& a = verts[static_cast<std::size_t>(t[0])];
        const Eigen::Vector3d& b = verts[static_cast<std::size_t>(t[1])];
        const Eigen::Vector3d& c = verts[static_cast<std::size_t>(t[2])];
        vol += a.dot(b.cross(c)) / 6.0;
    }
    return vol;
}

void orient_outward(std::vector<Eigen::Vector3d>& verts,
                    std::vector<std::array<int, 3>>& tris) {
    if (signed_volume(verts, tris) < 0.0)
        for (auto& t : tris) std::swap(t[1], t[2]);
}

} // namespace

TriMesh icosphere(int subdivisions, double radius) {
    if (subdivisions < 0) throw MeshError("icosphere: subdivisions must be non-negative");
    if (subdivisions > 8) throw MeshError("icosphere: subdivisions > 8 refused (memory guard)");
    if (!(radius > 0.0)) throw MeshError("icosphere: radius must be positive");

    // icosahedron with vertices at both poles and two rings of five
    std::vector<Eigen::Vector3d> verts;
    verts.emplace_back(0.0, 0.0, 1.0);
    const double zr = 1.0 / std::sqrt(5.0);       // ring height
    const double rr = 2.0 / std::sqrt(5.0);       // ring radius
    for (int i = 0; i < 5; ++i) {
        const double a = 2.0 * M_PI * i / 5.0;
        verts.emplace_back(rr * std::cos(a), rr * std::sin(a), zr);
    }
    for (int i = 0; i < 5; ++i) {
        const double a = 2.0 * M_PI * i / 5.0 + M_PI / 5.0;
        verts.emplace_back(rr * std::cos(a), rr * std::sin(a), -zr);
    }
    verts.emplace_back(0.0, 0.0, -1.0);

    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i < 5; ++i) {
        const int u0 = 1 + i, u1 = 1 + (i + 1) % 5;
        const int l0 = 6 + i, l1 = 6 + (i + 1) % 5;
        tris.push_back({0, u0, u1});
        tris.push_back({u0, l0, u1});
        tris.push_back({u1, l0, l1});
        tris.push_back({l0, 11, l1});
    }

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d m = 0.5 * (verts[static_cast<std::size_t>(a)] +
                                       verts[static_cast<std::size_t>(b)]);
            m.normalize();
            verts.push_back(m);
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            const int ab = mid(t[0], t[1]);
            const int bc = mid(t[1], t[2]);
            const int ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    for (auto& v : verts) v *= radius;
    orient_outward(verts, tris);
    return TriMesh(std::move(verts), std::move(tris));
}

TriMesh uv_torus(double R, double r, int nu, int nv) {
    if (!(R > 0.0) || !(r > 0.0)) throw MeshError("uv_torus: radii must be positive");
    if (!(r < R)) throw MeshError("uv_torus: requires r < R");
    if (nu < 3 || nv < 3) throw MeshError("uv_torus: requires nu >= 3 and nv >= 3");

    std::vector<Eigen::Vector3d> verts;
    std::vector<Eigen::Vector2d> param;
    verts.reserve(static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv));
    param.reserve(verts.capacity());
    for (int i = 0; i < nu; ++i) {
        const double u = 2.0 * M_PI * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double v = 2.0 * M_PI * j / nv;
            const double ring = R + r * std::cos(v);
            verts.emplace_back(ring * std::cos(u), ring * std::sin(u), r * std::sin(v));
            param.emplace_back(u, v);
        }
    }

    std::vector<std::array<int, 3>> tris;
    tris.reserve(2 * verts.size());
    auto vid = [&](int i, int j) { return ((i % nu + nu) % nu) * nv + ((j % nv + nv) % nv); };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    orient_outward(verts, tris);
    return TriMesh(std::move(verts), std::move(tris), std::move(param));
}

namespace {

// Edge audit shared by load_off (throwing) and validate (reporting).
// Returns true when closed and orientable; fills `detail` otherwise.
bool audit_edges(const std::vector<std::array<int, 3>>& tris, bool& closed, bool& orientable,
                 std::string& detail) {
    std::map<std::pair<int, int>, std::pair<int, int>> edges; // (fwd count, bwd count)
    for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<std::size_t>(k)];
            const int b = t[static_cast<std::size_t>((k + 1) % 3)];
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto& use = edges[key];
            if (a < b) ++use.first;
            else ++use.second;
        }
    }
    closed = true;
    orientable = true;
    for (const auto& [key, use] : edges) {
        const int total = use.first + use.second;
        if (total != 2) {
            closed = false;
            if (detail.empty())
                detail = "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                         ") has " + std::to_string(total) + " incident faces";
        } else if (use.first != 1) {
            // two traversals in the same direction
            orientable = false;
            if (detail.empty())
                detail = "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                         ") is traversed twice in the same direction";
        }
    }
    return closed && orientable;
}

std::string next_content_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    throw MeshError("OFF: unexpected end of file");
}

} // namespace

TriMesh load_off(std::istream& in) {
    std::string header = next_content_line(in);
    {
        std::istringstream hs(header);
        std::string tag;
        hs >> tag;
        if (tag != "OFF") throw MeshError("OFF: malformed header (expected 'OFF')");
    }
    std::istringstream counts(next_content_line(in));
    long nv = -1, nf = -1, ne = 0;
    counts >> nv >> nf >> ne;
    if (nv <= 0 || nf <= 0) throw MeshError("OFF: malformed counts line");

    std::vector<Eigen::Vector3d> verts;
    verts.reserve(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        std::istringstream vs(next_content_line(in));
        double x, y, z;
        if (!(vs >> x >> y >> z))
            throw MeshError("OFF: malformed vertex line " + std::to_string(i));
        verts.emplace_back(x, y, z);
    }

    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(nf));
    for (long i = 0; i < nf; ++i) {
        std::istringstream fs(next_content_line(in));
        long arity = -1;
        if (!(fs >> arity)) throw MeshError("OFF: malformed face line " + std::to_string(i));
        if (arity != 3)
            throw MeshError("OFF: non-triangle face (face " + std::to_string(i) + " has " +
                            std::to_string(arity) + " vertices)");
        long a, b, c;
        if (!(fs >> a >> b >> c))
            throw MeshError("OFF: malformed face line " + std::to_string(i));
        for (long idx : {a, b, c})
            if (idx < 0 || idx >= nv)
                throw MeshError("OFF: vertex index " + std::to_string(idx) + " out of range");
        tris.push_back({static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)});
    }

    bool closed = false, orientable = false;
    std::string detail;
    if (!audit_edges(tris, closed, orientable, detail)) {
        if (!closed) throw MeshError("open surface: " + detail);
        throw MeshError("non-orientable surface: " + detail);
    }

    TriMesh mesh(std::move(verts), std::move(tris));
    double mean_area = mesh.total_area() / mesh.triangle_count();
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (mesh.triangle_area(t) < 1e-14 * mean_area)
            throw MeshError("degenerate triangle " + std::to_string(t) +
                            " (area below 1e-14 of mean)");
    return mesh;
}

TriMesh load_off_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open OFF file: " + path);
    return load_off(in);
}

void save_off(const TriMesh& mesh, std::ostream& out) {
    out << "OFF\n";
    out << mesh.vertex_count() << ' ' << mesh.triangle_count() << ' ' << mesh.edge_count()
        << '\n';
    char buf[96];
    for (const auto& v : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& t : mesh.triangles())
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void save_off_file(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write OFF file: " + path);
    save_off(mesh, out);
    if (!out) throw MeshError("write failure on OFF file: " + path);
}

ValidationReport validate(const TriMesh& mesh) {
    ValidationReport rep;
    audit_edges(mesh.triangles(), rep.closed, rep.orientable, rep.detail);
    rep.euler_characteristic =
        mesh.vertex_count() - mesh.edge_count() + mesh.triangle_count();

    rep.min_area = std::numeric_limits<double>::infinity();
    rep.min_angle = std::numeric_limits<double>::infinity();
    const double mean_area = mesh.total_area() / mesh.triangle_count();
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double area = mesh.triangle_area(t);
        rep.min_area = std::min(rep.min_area, area);
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        bool obtuse = false;
        for (int k = 0; k < 3; ++k) {
            const Eigen::Vector3d& a = mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            const Eigen::Vector3d& b = mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
            const Eigen::Vector3d& c = mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 2) % 3)])];
            const Eigen::Vector3d e1 = b - a, e2 = c - a;
            const double denom = e1.norm() * e2.norm();
            if (denom == 0.0) { obtuse = true; continue; }
            const double cosang = std::clamp(e1.dot(e2) / denom, -1.0, 1.0);
            const double ang = std::acos(cosang);
            rep.min_angle = std::min(rep.min_angle, ang);
            if (cosang < 0.0) obtuse = true;
        }
        if (obtuse) ++rep.obtuse_triangle_count;
        if (area < 1e-14 * mean_area && rep.detail.empty())
            rep.detail = "degenerate triangle " + std::to_string(t);
    }
    return rep;
}

ScalarField sample(const Expr& e, const TriMesh& mesh) {
    ScalarField field;
    field.values.resize(static_cast<std::size_t>(mesh.vertex_count()));
    EvalContext ctx;
    ctx.bind("x", 0.0);
    ctx.bind("y", 0.0);
    ctx.bind("z", 0.0);
    if (mesh.has_parametric()) {
        ctx.bind("u", 0.0);
        ctx.bind("v", 0.0);
    }
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Eigen::Vector3d& p = mesh.vertices()[static_cast<std::size_t>(i)];
        ctx.bind("x", p.x());
        ctx.bind("y", p.y());
        ctx.bind("z", p.z());
        if (mesh.has_parametric()) {
            const Eigen::Vector2d& uv = mesh.parametric()[static_cast<std::size_t>(i)];
            ctx.bind("u", uv.x());
            ctx.bind("v", uv.y());
        }
        try {
            field.values[static_cast<std::size_t>(i)] = e.eval(ctx);
        } catch (const EvalError& err) {
            throw EvalError(std::string(err.what()) + " (at vertex " + std::to_string(i) + ")");
        }
    }
    return field;
}

std::vector<double> geodesic_distances(const TriMesh& mesh, const std::vector<int>& seeds,
                                       double cutoff) {
    const int n = mesh.vertex_count();
    std::vector<double> dist(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (int s : seeds) {
        if (s < 0 || s >= n) throw MeshError("geodesic seed vertex out of range");
        dist[static_cast<std::size_t>(s)] = 0.0;
        heap.emplace(0.0, s);
    }
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(v)]) continue;
        if (d > cutoff) break;
        for (int w : mesh.vertex_neighbors(v)) {
            const double len = (mesh.vertices()[static_cast<std::size_t>(v)] -
                                mesh.vertices()[static_cast<std::size_t>(w)])
                                   .norm();
            const double nd = d + len;
            if (nd < dist[static_cast<std::size_t>(w)]) {
                dist[static_cast<std::size_t>(w)] = nd;
                heap.emplace(nd, w);
            }
        }
    }
    return dist;
}

std::vector<double> geodesic_distances(const TriMesh& mesh, int seed, double cutoff) {
    return geodesic_distances(mesh, std::vector<int>{seed}, cutoff);
}

std::vector<int> geodesic_ball(const TriMesh& mesh, int seed, double radius) {
    if (radius < 0.0) throw MeshError("geodesic_ball: radius must be non-negative");
    const auto dist = geodesic_distances(mesh, seed, radius);
    std::vector<int> ball;
    for (int i = 0; i < mesh.vertex_count(); ++i)
        if (dist[static_cast<std::size_t>(i)] <= radius) ball.push_back(i);
    return ball;
}

} // namespace drift
