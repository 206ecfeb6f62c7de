#include "anisokernel/diagnostics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

std::vector<Point> corners(const Domain& domain)
{
    if (domain.dim() == 1) {
        return {{domain.lo(), 0.0}, {domain.hi(), 0.0}};
    }
    return domain.vertices();
}

/// Visits node pairs (i < j) from `nodes`, skipping with a fixed stride when
/// the pair count exceeds `max_pairs`.
template <class Visit>
void for_each_pair(const std::vector<int>& nodes, std::int64_t max_pairs, Visit visit)
{
    const std::int64_t n = static_cast<std::int64_t>(nodes.size());
    const std::int64_t total = n * (n - 1) / 2;
    const std::int64_t stride = std::max<std::int64_t>(1, (total + max_pairs - 1) / max_pairs);
    std::int64_t counter = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = i + 1; j < n; ++j, ++counter) {
            if (counter % stride == 0) {
                visit(nodes[i], nodes[j]);
            }
        }
    }
}

} // namespace

double c0delta_norm(const Field& u, double s)
{
    const FeSpace& space = *u.space;
    double best = 0.0;
    for (int d = 0; d < space.num_dofs(); ++d) {
        best = std::max(best, std::abs(u.coeffs[d]) / std::pow(space.delta(space.dof_node(d)), s));
    }
    return best;
}

double hopf_quotient_min(const Field& u, double s)
{
    const FeSpace& space = *u.space;
    if (space.num_dofs() == 0) {
        return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int d = 0; d < space.num_dofs(); ++d) {
        best = std::min(best, u.coeffs[d] / std::pow(space.delta(space.dof_node(d)), s));
    }
    return best;
}

PropertyVerdict max_principle_check(const GramMatrix& gram, const KernelSpec& spec,
                                    const MaxPrincipleCase& problem, double tol_mp,
                                    Eigen::VectorXd* solution)
{
    const FeSpace& space = *gram.space;
    Eigen::MatrixXd system = gram.matrix;
    if (problem.c != 0.0) {
        system += problem.c * assemble_mass(space);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success) {
        throw StructuralError("max_principle_check: G + c M is not positive definite; the shift c = " +
                              std::to_string(problem.c) + " must exceed -lambda1");
    }
    Eigen::VectorXd rhs = assemble_load(space, problem.g) +
                          assemble_exterior_coupling(gram.space, spec, problem.h, gram.quadrature);
    Eigen::VectorXd u = llt.solve(rhs);
    const double scale = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    const double lowest = u.size() ? u.minCoeff() : 0.0;
    std::ostringstream ctx;
    ctx << "h=" << space.mesh_size() << " s=" << spec.order() << " c=" << problem.c;
    PropertyVerdict v;
    v.name = "maximum principle";
    v.pass = lowest >= -tol_mp * scale;
    v.measured = scale > 0.0 ? lowest / scale : 0.0;
    v.threshold = -tol_mp;
    v.context = ctx.str();
    if (solution) {
        *solution = std::move(u);
    }
    return v;
}

double holder_seminorm(const Field& u, double exponent, std::int64_t max_pairs)
{
    if (!(exponent > 0.0 && exponent <= 1.0)) {
        throw ConfigError("holder_seminorm: exponent must lie in (0, 1]");
    }
    const FeSpace& space = *u.space;
    const Eigen::VectorXd values = u.node_values();
    std::vector<int> nodes(space.num_nodes());
    for (int i = 0; i < space.num_nodes(); ++i) {
        nodes[i] = i;
    }
    double best = 0.0;
    for_each_pair(nodes, max_pairs, [&](int i, int j) {
        double dist = norm(space.nodes()[i] - space.nodes()[j]);
        best = std::max(best, std::abs(values[i] - values[j]) / std::pow(dist, exponent));
    });
    return best;
}

QuotientSeminorm holder_quotient_seminorm(const Field& u, double s, double exponent,
                                          double corner_radius, std::int64_t max_pairs)
{
    if (!(exponent > 0.0 && exponent <= 1.0)) {
        throw ConfigError("holder_quotient_seminorm: exponent must lie in (0, 1]");
    }
    const FeSpace& space = *u.space;
    const auto cs = corners(space.domain());
    std::vector<int> nodes;
    std::vector<double> q(space.num_nodes(), 0.0);
    std::vector<char> near(space.num_nodes(), 0);
    for (int d = 0; d < space.num_dofs(); ++d) {
        int node = space.dof_node(d);
        nodes.push_back(node);
        q[node] = u.coeffs[d] / std::pow(space.delta(node), s);
        for (Point c : cs) {
            near[node] |= norm(space.nodes()[node] - c) <= corner_radius;
        }
    }
    QuotientSeminorm out;
    for_each_pair(nodes, max_pairs, [&](int i, int j) {
        double dist = norm(space.nodes()[i] - space.nodes()[j]);
        double v = std::abs(q[i] - q[j]) / std::pow(dist, exponent);
        double& slot = (near[i] || near[j]) ? out.corner_adjacent : out.away_from_corners;
        slot = std::max(slot, v);
    });
    return out;
}

LinfReport linf_report(const Field& u, double s, int order)
{
    const FeSpace& space = *u.space;
    const int n = space.dim();
    LinfReport r;
    r.p = 2.0 * n / (n - 2.0 * s);
    r.linf = u.coeffs.size() ? u.coeffs.cwiseAbs().maxCoeff() : 0.0;
    ElementQuadrature eq = element_quadrature(space, order);
    Eigen::VectorXd uq = eq.basis * u.coeffs;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < uq.size(); ++i) {
        sum += eq.weights[i] * std::pow(std::abs(uq[i]), r.p);
    }
    r.lp = std::pow(sum, 1.0 / r.p);
    return r;
}

PropertyVerdict local_min_probe(const Energy& energy, const Field& u0, double s,
                                const ProbeOptions& opt)
{
    const FeSpace& space = *u0.space;
    const Eigen::Index n = u0.coeffs.size();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double J0 = energy.value(u0.coeffs);
    double lowest = std::numeric_limits<double>::infinity();
    int failing = -1;
    for (int k = 0; k < opt.samples; ++k) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v[i] = normal(rng);
        }
        if (opt.bias) {
            Eigen::VectorXd b = *opt.bias;
            v = b / b.cwiseAbs().maxCoeff() + opt.bias_noise * v / v.cwiseAbs().maxCoeff();
        }
        double size = 0.0;
        if (opt.norm == BallNorm::X) {
            size = energy.gram_norm(v);
        } else {
            for (Eigen::Index i = 0; i < n; ++i) {
                size = std::max(size, std::abs(v[i]) /
                                          std::pow(space.delta(space.dof_node(static_cast<int>(i))), s));
            }
        }
        v *= opt.radius / size;
        const double rise = energy.value(u0.coeffs + v) - J0;
        if (rise < lowest) {
            lowest = rise;
        }
        if (rise < -1e-12 && failing < 0) {
            failing = k;
        }
    }
    std::ostringstream ctx;
    ctx << (opt.norm == BallNorm::X ? "X" : "C0delta") << " ball radius=" << opt.radius
        << " samples=" << opt.samples << " seed=" << opt.seed;
    if (failing >= 0) {
        ctx << " first failing sample=" << failing;
    }
    return {"local minimizer probe", failing < 0, lowest, -1e-12, ctx.str()};
}

} // namespace anisokernel
