#pragma once

#include <string>
#include <vector>

#include "drift/mesh.hpp"

namespace drift {

enum class CriticalKind { Maximum, Minimum, Saddle };

struct CriticalPoint {
    int vertex = -1;
    CriticalKind kind = CriticalKind::Saddle;
    int multiplicity = 1; // saddles only; 1 for extrema
    double f_value = 0.0;
    double c_value = 0.0;
};

struct MorseReport {
    std::vector<CriticalPoint> criticals;
    std::vector<int> maximum_set;     // local maxima (the theorem's M)
    double c_star = 0.0;              // global min of c over the mesh
    double c_upper = 0.0;             // global max of c over the mesh
    double predicted_limit = 0.0;     // min over maximum_set of c
    double predicted_limit_global_max = 0.0; // min of c over argmax(f) only
    int euler_lhs = 0;                // #max - sum saddle multiplicities + #min
    int euler_chi = 0;                // V - E + F of the mesh
    bool degenerate = false;          // exact ties encountered (plateaus)

    std::string to_json() const;
};

/// One-ring sign-change classification of every vertex. Ties are broken by
/// symbolic perturbation (higher vertex index wins), which makes the
/// classification total; any tie also sets the degenerate flag in the
/// owning report. Returns only non-regular vertices, sorted by vertex index.
/// `c` is optional context used to fill CriticalPoint::c_value; pass the
/// field you will feed to predicted_limit or an empty field.
std::vector<CriticalPoint> classify(const ScalarField& f, const TriMesh& mesh,
                                    const ScalarField* c, bool* degenerate_out);

/// Full Morse audit: classification, the maximum set, the two bounds
/// c_* <= lambda(s) <= c^*, and the predicted large-drift limit
/// L* = min over the maximum set of c.
MorseReport predicted_limit(const ScalarField& f, const ScalarField& c, const TriMesh& mesh);

} // namespace drift
