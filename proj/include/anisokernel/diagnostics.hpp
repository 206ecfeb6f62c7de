#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "anisokernel/assembly.hpp"
#include "anisokernel/variational.hpp"
#include "anisokernel/verdict.hpp"

namespace anisokernel {

/// max over interior nodes of |u| / delta^s
double c0delta_norm(const Field& u, double s);
/// min over interior nodes of u / delta^s (signed)
double hopf_quotient_min(const Field& u, double s);

struct MaxPrincipleCase {
    std::function<double(Point)> g;
    ExteriorTrace h;
    /// Solves (G + c M) u = load(g) + b(h), i.e. the reaction f = -c u + g.
    double c = 0.0;
};

inline constexpr double kMaxPrincipleTol = 1e-3;

/// Verdict: min nodal value >= -tol_mp ||u||_inf. Throws StructuralError if
/// G + c M is not positive definite (c at or below -lambda1).
PropertyVerdict max_principle_check(const GramMatrix& gram, const KernelSpec& spec,
                                    const MaxPrincipleCase& problem,
                                    double tol_mp = kMaxPrincipleTol,
                                    Eigen::VectorXd* solution = nullptr);

/// max over node pairs (all nodes, boundary included) of
/// |u_i - u_j| / |x_i - x_j|^exponent, at most `max_pairs` pairs visited with
/// a deterministic stride.
double holder_seminorm(const Field& u, double exponent, std::int64_t max_pairs = 1000000);

/// Same seminorm for the quotient u / delta^s over interior nodes. Pairs with
/// a node within `corner_radius` of a domain corner (interval endpoints in
/// 1D: use one mesh size) are reported separately.
struct QuotientSeminorm {
    double away_from_corners = 0.0;
    double corner_adjacent = 0.0;
};
QuotientSeminorm holder_quotient_seminorm(const Field& u, double s, double exponent,
                                          double corner_radius,
                                          std::int64_t max_pairs = 1000000);

struct LinfReport {
    double linf = 0.0;
    /// L^p norm with p = 2n / (n - 2s) by element quadrature.
    double lp = 0.0;
    double p = 0.0;
};
LinfReport linf_report(const Field& u, double s, int order = 4);

enum class BallNorm { X, C0Delta };

struct ProbeOptions {
    double radius = 1e-3;
    BallNorm norm = BallNorm::X;
    int samples = 64;
    std::uint64_t seed = 1;
    /// When set, each sample is this direction plus `bias_noise` times noise.
    std::optional<Eigen::VectorXd> bias;
    double bias_noise = 0.1;
};

/// Random perturbations v on the sphere of the requested ball; pass iff
/// J(u0 + v) >= J(u0) - 1e-12 for every sample. `measured` is the smallest
/// increase observed.
PropertyVerdict local_min_probe(const Energy& energy, const Field& u0, double s,
                                const ProbeOptions& opt);

} // namespace anisokernel
