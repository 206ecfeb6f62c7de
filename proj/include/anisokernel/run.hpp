#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "anisokernel/config.hpp"
#include "anisokernel/verdict.hpp"

namespace anisokernel {

inline const std::vector<std::string> kCommands = {
    "assemble", "eigs", "solve-linear", "solve-multi", "operator-eval", "verify", "torsion"};

struct TorsionLevel {
    double h = 0.0;
    double l2_rel = 0.0;
    double hopf_min = 0.0;
    double holder = 0.0;
};

struct TorsionBenchmark {
    double c_t = 0.0;
    double c_t_error = 0.0;
    std::vector<TorsionLevel> levels;
    std::vector<PropertyVerdict> verdicts;
};

/// Solves Gram u = load(1) on `levels` nested meshes of the unit ball and
/// compares with (1 - |x|^2)_+^s / (2 c_T). Verdicts: L2 error ratio <= 0.8
/// per refinement, Hopf quotient stable within x2, C^s seminorm ratio <= 1.5.
TorsionBenchmark torsion_benchmark(const RunConfig& cfg, int levels = 3);

/// Relative L2 error of a field against a reference function, with
/// quadrature graded towards the boundary.
double relative_l2_error(const Field& u, const std::function<double(Point)>& exact,
                         int order = 8, int levels = 24);

/// Central-difference check of functional_gradient along `pairs` seeded
/// random (u, v) pairs; relative tolerance `tol`.
PropertyVerdict gradient_check(const GramMatrix& gram, const NonlinearitySpec& nl, int pairs,
                               std::uint64_t seed, double tol = 1e-6);

/// Exit status 0 on success, 1 on a failed verdict or failed computation,
/// 2 on a configuration error.
int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace anisokernel
