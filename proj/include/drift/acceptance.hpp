#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drift {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::string work_dir = "drift-verify-out"; // report artifacts land here
    bool quiet = false;                        // suppress progress lines
};

/// Runs the built-in verification benchmarks end to end: the large-drift
/// limit on the circle, the sphere and the torus, constant-c exactness, the
/// two-sided bounds and the energy inequality over every solve performed,
/// shift/gauge invariance, agreement between the dense reference path and
/// the sparse solver, the Morse-Euler audit, the ramp test-function bound,
/// concentration of the eigenfunction measure, and eigenvector positivity.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

bool all_passed(const std::vector<CriterionResult>& results);
void print_results(std::ostream& out, const std::vector<CriterionResult>& results);

} // namespace drift
