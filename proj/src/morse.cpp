#include "drift/morse.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace drift {

namespace {

// Ordered one-ring of vertex i. Each incident CCW triangle (i, a, b)
// contributes the directed link edge a -> b; on a closed orientable mesh
// these chain into a single cycle around i.
std::vector<int> ordered_one_ring(const TriMesh& mesh, int i) {
    std::map<int, int> succ;
    for (int t : mesh.vertex_triangles(i)) {
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        int k = 0;
        while (tri[static_cast<std::size_t>(k)] != i) ++k;
        const int a = tri[static_cast<std::size_t>((k + 1) % 3)];
        const int b = tri[static_cast<std::size_t>((k + 2) % 3)];
        succ[a] = b;
    }
    std::vector<int> ring;
    ring.reserve(succ.size());
    int start = succ.begin()->first;
    int cur = start;
    do {
        ring.push_back(cur);
        auto it = succ.find(cur);
        if (it == succ.end()) throw MeshError("one-ring of vertex " + std::to_string(i) +
                                              " is not a cycle (mesh not closed?)");
        cur = it->second;
    } while (cur != start && ring.size() <= succ.size());
    if (ring.size() != succ.size())
        throw MeshError("one-ring of vertex " + std::to_string(i) + " is not a single cycle");
    return ring;
}

} // namespace

std::vector<CriticalPoint> classify(const ScalarField& f, const TriMesh& mesh,
                                    const ScalarField* c, bool* degenerate_out) {
    if (f.size() != mesh.vertex_count())
        throw MeshError("classify: field size does not match mesh");
    bool degenerate = false;
    std::vector<CriticalPoint> out;

    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const std::vector<int> ring = ordered_one_ring(mesh, i);
        // sign of f(j) - f(i) with symbolic perturbation f -> f + index*eps
        auto higher = [&](int j) {
            if (f[j] != f[i]) return f[j] > f[i];
            degenerate = true;
            return j > i;
        };
        int changes = 0;
        bool first = higher(ring[0]);
        bool prev = first;
        for (std::size_t k = 1; k < ring.size(); ++k) {
            const bool cur = higher(ring[static_cast<int>(k)]);
            if (cur != prev) ++changes;
            prev = cur;
        }
        if (prev != first) ++changes;

        if (changes == 2) continue; // regular
        CriticalPoint cp;
        cp.vertex = i;
        cp.f_value = f[i];
        cp.c_value = c ? (*c)[i] : 0.0;
        if (changes == 0) {
            cp.kind = first ? CriticalKind::Minimum : CriticalKind::Maximum;
            cp.multiplicity = 1;
        } else {
            cp.kind = CriticalKind::Saddle;
            cp.multiplicity = (changes - 2) / 2;
        }
        out.push_back(cp);
    }
    if (degenerate_out) *degenerate_out = degenerate;
    return out;
}

MorseReport predicted_limit(const ScalarField& f, const ScalarField& c, const TriMesh& mesh) {
    if (c.size() != mesh.vertex_count())
        throw MeshError("predicted_limit: c field size does not match mesh");
    MorseReport rep;
    rep.criticals = classify(f, mesh, &c, &rep.degenerate);
    rep.c_star = c.min();
    rep.c_upper = c.max();
    rep.euler_chi = mesh.vertex_count() - mesh.edge_count() + mesh.triangle_count();

    int n_max = 0, n_min = 0, saddle_weight = 0;
    for (const auto& cp : rep.criticals) {
        switch (cp.kind) {
        case CriticalKind::Maximum:
            ++n_max;
            rep.maximum_set.push_back(cp.vertex);
            break;
        case CriticalKind::Minimum: ++n_min; break;
        case CriticalKind::Saddle: saddle_weight += cp.multiplicity; break;
        }
    }
    rep.euler_lhs = n_max - saddle_weight + n_min;

    double limit = std::numeric_limits<double>::infinity();
    for (int v : rep.maximum_set) limit = std::min(limit, c[v]);
    rep.predicted_limit = limit;

    // alternative reading: only the global maxima of f
    double f_top = -std::numeric_limits<double>::infinity();
    for (int v : rep.maximum_set) f_top = std::max(f_top, f[v]);
    double global_limit = std::numeric_limits<double>::infinity();
    for (int v : rep.maximum_set)
        if (f[v] == f_top) global_limit = std::min(global_limit, c[v]);
    rep.predicted_limit_global_max = global_limit;
    return rep;
}

std::string MorseReport::to_json() const {
    nlohmann::json j;
    j["criticals"] = nlohmann::json::array();
    for (const auto& cp : criticals) {
        const char* kind = cp.kind == CriticalKind::Maximum  ? "maximum"
                           : cp.kind == CriticalKind::Minimum ? "minimum"
                                                              : "saddle";
        j["criticals"].push_back({{"vertex", cp.vertex},
                                  {"kind", kind},
                                  {"multiplicity", cp.multiplicity},
                                  {"f", cp.f_value},
                                  {"c", cp.c_value}});
    }
    j["maximum_set"] = maximum_set;
    j["c_star"] = c_star;
    j["c_upper"] = c_upper;
    j["predicted_limit"] = predicted_limit;
    j["predicted_limit_global_max"] = predicted_limit_global_max;
    j["euler_lhs"] = euler_lhs;
    j["euler_chi"] = euler_chi;
    j["degenerate"] = degenerate;
    return j.dump(2);
}

} // namespace drift
