#include "anisokernel/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

constexpr int kMaxLocal = 6;

struct ElementData {
    int nv = 0;
    std::array<Point, 3> v{};
    std::array<int, 3> node{};
    std::array<Point, 3> grad{};
    double measure = 0.0;
};

ElementData element_data(const FeSpace& space, int e)
{
    ElementData d;
    d.nv = space.vertices_per_element();
    d.grad = space.barycentric_gradients(e);
    d.measure = space.element_measure(e);
    for (int k = 0; k < d.nv; ++k) {
        d.node[k] = space.elements()[e][k];
        d.v[k] = space.nodes()[d.node[k]];
    }
    return d;
}

/// Element-pair contribution over the union of the two vertex sets.
struct Local {
    int count = 0;
    std::array<int, kMaxLocal> node{};
    double m[kMaxLocal][kMaxLocal] = {};

    void add_outer(const double* d, double w)
    {
        for (int a = 0; a < count; ++a) {
            for (int b = 0; b < count; ++b) {
                m[a][b] += w * d[a] * d[b];
            }
        }
    }
};

double beta_fn(double x, double y)
{
    return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

/// Dimension-agnostic helpers bound to one kernel.
struct PairIntegrator {
    const FeSpace& space;
    const KernelSpec& spec;
    const QuadratureConfig& cfg;
    int n;
    double s;

    PairIntegrator(const FeSpace& sp, const KernelSpec& k, const QuadratureConfig& c)
        : space(sp), spec(k), cfg(c), n(sp.dim()), s(k.order())
    {
    }

    // Symmetrized kernel K_e(z) = (K(z) + K(-z)) / 2.
    double kernel_even(Point z) const
    {
        if (n == 1) {
            return spec.a_even(0.0) * std::pow(std::abs(z.x), -1.0 - 2.0 * s);
        }
        return spec.a_even(polar_angle(z)) * std::pow(norm(z), -2.0 - 2.0 * s);
    }

    // int_T int_T (u(x)-u(y))(v(x)-v(y)) K(x-y) via the overlap area
    // |T cap (T + z)| = |T| (1 - r c(theta))^2_+ (a shrunken copy of T).
    Local identical(const ElementData& t) const
    {
        Local loc;
        loc.count = t.nv;
        for (int k = 0; k < t.nv; ++k) {
            loc.node[k] = t.node[k];
        }
        const double p = 2.0 - 2.0 * s;
        const double factor = t.measure * beta_fn(p, n + 1.0);
        auto accumulate = [&](double theta, double w) {
            Point dir = n == 1 ? Point{std::cos(theta) > 0 ? 1.0 : -1.0, 0.0} : direction(theta);
            double c = 0.0;
            double proj[3];
            for (int k = 0; k < t.nv; ++k) {
                proj[k] = dot(t.grad[k], dir);
                c += std::max(0.0, proj[k]);
            }
            double weight = w * factor * spec.a_even(theta) * std::pow(c, -p);
            loc.add_outer(proj, weight);
        };
        if (n == 1) {
            accumulate(0.0, 1.0);
            accumulate(M_PI, 1.0);
        } else {
            std::vector<double> breaks;
            for (int k = 0; k < 3; ++k) {
                double g = polar_angle(t.grad[k]);
                breaks.push_back(g + 0.5 * M_PI);
                breaks.push_back(g - 0.5 * M_PI);
            }
            for (double b : spec.density().breakpoints()) {
                breaks.push_back(b);
                breaks.push_back(b + M_PI);
            }
            quad::for_each_arc_node(0.0, 2.0 * M_PI, breaks, cfg.touching, {}, accumulate);
        }
        return loc;
    }

    // 1D neighbours [L, M] and [M, R]: Duffy split of the (alpha, beta)
    // square, radial variable integrated exactly.
    Local shared_vertex_1d(const ElementData& left, const ElementData& right) const
    {
        Local loc;
        loc.count = 3;
        loc.node = {left.node[0], left.node[1], right.node[1], 0, 0, 0};
        const double h1 = left.measure, h2 = right.measure;
        const double q = 1.0 + 2.0 * s;
        const double factor = 2.0 * spec.a_even(0.0) * h1 * h2 / (3.0 - 2.0 * s);
        const auto& g = quad::gauss_legendre(cfg.touching);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double w = g.x[i];
            double d1[3] = {1.0, w - 1.0, -w};
            double d2[3] = {w, 1.0 - w, -1.0};
            loc.add_outer(d1, factor * g.w[i] * std::pow(h1 + h2 * w, -q));
            loc.add_outer(d2, factor * g.w[i] * std::pow(h1 * w + h2, -q));
        }
        return loc;
    }

    // Triangles (p, q, r) and (p, q, r') sharing the edge pq. In relative
    // coordinates v = (d, beta, beta') the integrand is homogeneous of degree
    // -2s; the remaining edge coordinate contributes the length 1 - m(v).
    Local shared_edge(const ElementData& t1, const ElementData& t2) const
    {
        int shared1[2], shared2[2], k = 0, r1 = -1, r2 = -1;
        for (int a = 0; a < 3; ++a) {
            bool found = false;
            for (int b = 0; b < 3; ++b) {
                if (t1.node[a] == t2.node[b]) {
                    shared1[k] = a;
                    shared2[k] = b;
                    ++k;
                    found = true;
                }
            }
            if (!found) {
                r1 = a;
            }
        }
        for (int b = 0; b < 3; ++b) {
            if (b != shared2[0] && b != shared2[1]) {
                r2 = b;
            }
        }
        const Point p = t1.v[shared1[0]], q = t1.v[shared1[1]];
        const Point r = t1.v[r1], rp = t2.v[r2];
        Local loc;
        loc.count = 4;
        loc.node = {t1.node[shared1[0]], t1.node[shared1[1]], t1.node[r1], t2.node[r2], 0, 0};

        const double e3 = 3.0 - 2.0 * s;
        const double factor = 2.0 * 4.0 * t1.measure * t2.measure / (e3 * (4.0 - 2.0 * s));
        const auto& g = quad::gauss_legendre(cfg.touching);

        auto integrand = [&](double d, double b, double bp, double w) {
            Point z = d * (q - p) + b * (r - p) - bp * (rp - p);
            double m = std::max(bp, b + d) + std::max(0.0, -d);
            double D[4] = {-d - b + bp, d, b, -bp};
            loc.add_outer(D, w * factor * kernel_even(z) * std::pow(m, -e3));
        };
        // Quadrilateral (bilinear) and collapsed-triangle pieces of the faces.
        auto quad_piece = [&](std::array<std::array<double, 2>, 4> c, bool positive) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                for (std::size_t j = 0; j < g.size(); ++j) {
                    double u = g.x[i], v = g.x[j];
                    double n0 = (1 - u) * (1 - v), n1 = u * (1 - v), n2 = u * v, n3 = (1 - u) * v;
                    double a = n0 * c[0][0] + n1 * c[1][0] + n2 * c[2][0] + n3 * c[3][0];
                    double b = n0 * c[0][1] + n1 * c[1][1] + n2 * c[2][1] + n3 * c[3][1];
                    double xu = (1 - v) * (c[1][0] - c[0][0]) + v * (c[2][0] - c[3][0]);
                    double yu = (1 - v) * (c[1][1] - c[0][1]) + v * (c[2][1] - c[3][1]);
                    double xv = (1 - u) * (c[3][0] - c[0][0]) + u * (c[2][0] - c[1][0]);
                    double yv = (1 - u) * (c[3][1] - c[0][1]) + u * (c[2][1] - c[1][1]);
                    double jac = std::abs(xu * yv - xv * yu);
                    double d = 1.0 - a - b;
                    integrand(positive ? d : -d, a, b, g.w[i] * g.w[j] * jac);
                }
            }
        };
        // face d >= 0 (kink at b = 1/2)
        quad_piece({{{0, 0}, {1, 0}, {0.5, 0.5}, {0, 0.5}}}, true);
        quad_piece({{{0, 0.5}, {0.5, 0.5}, {0, 1}, {0, 1}}}, true);
        // face d <= 0 (kink at a = 1/2)
        quad_piece({{{0, 0}, {0.5, 0}, {0.5, 0.5}, {0, 1}}}, false);
        quad_piece({{{0.5, 0}, {1, 0}, {0.5, 0.5}, {0.5, 0.5}}}, false);
        return loc;
    }

    // Triangles (p, q, r) and (p, q', r') sharing only p: 4D relative
    // coordinates, homogeneous integrand, radial variable integrated exactly.
    Local shared_vertex_2d(const ElementData& t1, const ElementData& t2) const
    {
        int i1 = -1, i2 = -1;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                if (t1.node[a] == t2.node[b]) {
                    i1 = a;
                    i2 = b;
                }
            }
        }
        const Point p = t1.v[i1];
        const Point q = t1.v[(i1 + 1) % 3], r = t1.v[(i1 + 2) % 3];
        const Point qp = t2.v[(i2 + 1) % 3], rp = t2.v[(i2 + 2) % 3];
        Local loc;
        loc.count = 5;
        loc.node = {t1.node[i1], t1.node[(i1 + 1) % 3], t1.node[(i1 + 2) % 3],
                    t2.node[(i2 + 1) % 3], t2.node[(i2 + 2) % 3], 0};

        const double e4 = 4.0 - 2.0 * s;
        const double factor = 2.0 * 4.0 * t1.measure * t2.measure / e4;
        const auto& g = quad::gauss_legendre(cfg.touching);
        for (int half = 0; half < 2; ++half) {
            for (std::size_t it = 0; it < g.size(); ++it) {
                double t = 0.5 * (half + g.x[it]);
                double wt = 0.5 * g.w[it] * t * (1.0 - t) * std::pow(std::max(t, 1.0 - t), -e4);
                for (std::size_t iu = 0; iu < g.size(); ++iu) {
                    for (std::size_t iv = 0; iv < g.size(); ++iv) {
                        double u = g.x[iu], v = g.x[iv];
                        double al = t * u, be = t * (1 - u);
                        double alp = (1 - t) * v, bep = (1 - t) * (1 - v);
                        Point z = al * (q - p) + be * (r - p) - alp * (qp - p) - bep * (rp - p);
                        double D[5] = {-al - be + alp + bep, al, be, -alp, -bep};
                        loc.add_outer(D, factor * wt * g.w[iu] * g.w[iv] * kernel_even(z));
                    }
                }
            }
        }
        return loc;
    }

    double element_distance(const ElementData& t1, const ElementData& t2) const
    {
        if (n == 1) {
            double lo1 = t1.v[0].x, hi1 = t1.v[1].x, lo2 = t2.v[0].x, hi2 = t2.v[1].x;
            return std::max({0.0, lo2 - hi1, lo1 - hi2});
        }
        auto seg = [](Point x, Point a, Point b) {
            Point d = b - a;
            double tt = std::clamp(dot(x - a, d) / dot(d, d), 0.0, 1.0);
            return norm(x - (a + tt * d));
        };
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                best = std::min(best, seg(t1.v[a], t2.v[b], t2.v[(b + 1) % 3]));
                best = std::min(best, seg(t2.v[a], t1.v[b], t1.v[(b + 1) % 3]));
            }
        }
        return best;
    }

    int disjoint_order(double eta) const
    {
        // Gauss error ~ rho^{-2q} for a singularity at relative distance eta.
        constexpr double digits = 12.0;
        double q = 0.5 * digits * std::log(10.0) / std::log(1.0 + 2.0 * eta) + 1.0;
        return std::clamp(static_cast<int>(std::ceil(q)), cfg.disjoint_min, cfg.disjoint_max);
    }

    Local disjoint(const ElementData& t1, const ElementData& t2, double diam) const
    {
        Local loc;
        loc.count = t1.nv + t2.nv;
        for (int k = 0; k < t1.nv; ++k) {
            loc.node[k] = t1.node[k];
            loc.node[t1.nv + k] = t2.node[k];
        }
        const int order = disjoint_order(element_distance(t1, t2) / diam);
        double D[kMaxLocal] = {};
        if (n == 1) {
            const auto& g = quad::gauss_legendre(order);
            for (std::size_t i = 0; i < g.size(); ++i) {
                double x = t1.v[0].x + t1.measure * g.x[i];
                for (std::size_t j = 0; j < g.size(); ++j) {
                    double y = t2.v[0].x + t2.measure * g.x[j];
                    D[0] = 1.0 - g.x[i];
                    D[1] = g.x[i];
                    D[2] = -(1.0 - g.x[j]);
                    D[3] = -g.x[j];
                    double w = 2.0 * t1.measure * t2.measure * g.w[i] * g.w[j] *
                               kernel_even({x - y, 0.0});
                    loc.add_outer(D, w);
                }
            }
            return loc;
        }
        auto r1 = quad::triangle_rule(t1.v[0], t1.v[1], t1.v[2], order);
        auto r2 = quad::triangle_rule(t2.v[0], t2.v[1], t2.v[2], order);
        for (std::size_t i = 0; i < r1.x.size(); ++i) {
            for (std::size_t j = 0; j < r2.x.size(); ++j) {
                for (int k = 0; k < 3; ++k) {
                    D[k] = r1.bary[i][k];
                    D[3 + k] = -r2.bary[j][k];
                }
                loc.add_outer(D, 2.0 * r1.w[i] * r2.w[j] * kernel_even(r1.x[i] - r2.x[j]));
            }
        }
        return loc;
    }

    Local pair(int e1, int e2, const std::vector<ElementData>& data, double diam) const
    {
        const ElementData& t1 = data[e1];
        const ElementData& t2 = data[e2];
        switch (space.classify(e1, e2)) {
        case PairKind::Identical:
            return identical(t1);
        case PairKind::SharedFacet:
            if (n == 1) {
                return t1.v[1].x == t2.v[0].x ? shared_vertex_1d(t1, t2) : shared_vertex_1d(t2, t1);
            }
            return shared_edge(t1, t2);
        case PairKind::SharedVertex:
            return shared_vertex_2d(t1, t2);
        case PairKind::Disjoint:
            break;
        }
        return disjoint(t1, t2, diam);
    }
};

void merge(const FeSpace& space, const Local& loc, Eigen::MatrixXd& target)
{
    for (int a = 0; a < loc.count; ++a) {
        int da = space.dof(loc.node[a]);
        if (da < 0) {
            continue;
        }
        for (int b = 0; b < loc.count; ++b) {
            int db = space.dof(loc.node[b]);
            if (db >= 0) {
                target(da, db) += loc.m[a][b];
            }
        }
    }
}

bool has_dof(const FeSpace& space, int e)
{
    for (int k = 0; k < space.vertices_per_element(); ++k) {
        if (!space.is_boundary(space.elements()[e][k])) {
            return true;
        }
    }
    return false;
}

} // namespace

int resolve_threads(int requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("ANISOKERNEL_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) {
            return v;
        }
    }
    return 1;
}

ExteriorTrace ExteriorTrace::constant(double value, double width)
{
    ExteriorTrace h;
    h.kind = Kind::Constant;
    h.amplitude = value;
    h.width = width;
    return h;
}

ExteriorTrace ExteriorTrace::gaussian(double amplitude, Point center, double length, double width)
{
    ExteriorTrace h;
    h.kind = Kind::Gaussian;
    h.amplitude = amplitude;
    h.center = center;
    h.length = length;
    h.width = width;
    return h;
}

ExteriorTrace ExteriorTrace::sampled(std::vector<double> samples, double width)
{
    if (samples.size() < 2) {
        throw ConfigError("exterior trace: need at least two samples");
    }
    ExteriorTrace h;
    h.kind = Kind::Sampled;
    h.samples = std::move(samples);
    h.width = width;
    return h;
}

double ExteriorTrace::value(const Domain& domain, Point y) const
{
    if (kind == Kind::Zero) {
        return 0.0;
    }
    double d = domain.exterior_distance(y);
    if (d <= 0.0 || d > width) {
        return 0.0;
    }
    switch (kind) {
    case Kind::Constant:
        return amplitude;
    case Kind::Gaussian: {
        Point r = y - center;
        return amplitude * std::exp(-dot(r, r) / (length * length));
    }
    case Kind::Sampled: {
        double pos = d / width * static_cast<double>(samples.size() - 1);
        auto k = std::min(static_cast<std::size_t>(pos), samples.size() - 2);
        double frac = pos - static_cast<double>(k);
        return (1.0 - frac) * samples[k] + frac * samples[k + 1];
    }
    case Kind::Zero:
        break;
    }
    return 0.0;
}

double ExteriorTrace::sampled_minimum(const Domain& domain, int probes) const
{
    if (kind == Kind::Zero) {
        return 0.0;
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= probes; ++i) {
        double d = width * i / probes;
        if (domain.dim() == 1) {
            lowest = std::min({lowest, value(domain, {domain.lo() - d, 0.0}),
                               value(domain, {domain.hi() + d, 0.0})});
            continue;
        }
        // walk outward from each boundary edge midpoint and vertex
        const auto& v = domain.vertices();
        for (std::size_t k = 0; k < v.size(); ++k) {
            Point a = v[k], b = v[(k + 1) % v.size()];
            Point e = b - a;
            Point out = (1.0 / norm(e)) * Point{e.y, -e.x};
            lowest = std::min(lowest, value(domain, 0.5 * (a + b) + d * out));
            Point c = a - domain.vertices()[(k + v.size() - 1) % v.size()];
            Point out_prev = (1.0 / norm(c)) * Point{c.y, -c.x};
            Point bis = out + out_prev;
            lowest = std::min(lowest, value(domain, a + (d / norm(bis)) * bis));
        }
    }
    return lowest;
}

void for_each_graded_point(const FeSpace& space, int e, int order, int levels,
                           const std::function<void(Point, const std::array<double, 3>&,
                                                    double)>& visit)
{
    const auto& el = space.elements()[e];
    if (space.dim() == 1) {
        const Point x0 = space.nodes()[el[0]];
        const double len = space.element_measure(e);
        const bool b0 = space.is_boundary(el[0]), b1 = space.is_boundary(el[1]);
        std::vector<double> cuts{0.0, 1.0};
        auto grade = [&](double from, double to) {
            double span = to - from;
            for (int l = 1; l <= levels; ++l) {
                cuts.push_back(from + span * std::ldexp(1.0, -l));
            }
        };
        if (b0 && b1) {
            cuts.push_back(0.5);
            grade(0.0, 0.5);
            grade(1.0, 0.5);
        } else if (b0) {
            grade(0.0, 1.0);
        } else if (b1) {
            grade(1.0, 0.0);
        }
        std::sort(cuts.begin(), cuts.end());
        const auto& g = quad::gauss_legendre(order);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            double a = cuts[k], w = cuts[k + 1] - cuts[k];
            for (std::size_t q = 0; q < g.size(); ++q) {
                double t = a + w * g.x[q];
                visit(Point{x0.x + len * t, 0.0}, {1.0 - t, t, 0.0}, len * w * g.w[q]);
            }
        }
        return;
    }

    using Bary = std::array<double, 3>;
    const Point v0 = space.nodes()[el[0]], v1 = space.nodes()[el[1]], v2 = space.nodes()[el[2]];
    auto to_point = [&](const Bary& b) { return b[0] * v0 + b[1] * v1 + b[2] * v2; };
    const double tol = 1e-12 * space.domain().diameter();
    auto on_boundary = [&](const Bary& b) {
        return space.domain().boundary_distance(to_point(b)) <= tol;
    };
    std::function<void(const Bary&, const Bary&, const Bary&, int)> recurse =
        [&](const Bary& c0, const Bary& c1, const Bary& c2, int level) {
            if (level < levels && (on_boundary(c0) || on_boundary(c1) || on_boundary(c2))) {
                Bary m01, m12, m20;
                for (int k = 0; k < 3; ++k) {
                    m01[k] = 0.5 * (c0[k] + c1[k]);
                    m12[k] = 0.5 * (c1[k] + c2[k]);
                    m20[k] = 0.5 * (c2[k] + c0[k]);
                }
                recurse(c0, m01, m20, level + 1);
                recurse(m01, c1, m12, level + 1);
                recurse(m20, m12, c2, level + 1);
                recurse(m01, m12, m20, level + 1);
                return;
            }
            auto rule = quad::triangle_rule(to_point(c0), to_point(c1), to_point(c2), order);
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                Bary b;
                for (int k = 0; k < 3; ++k) {
                    b[k] = rule.bary[q][0] * c0[k] + rule.bary[q][1] * c1[k] +
                           rule.bary[q][2] * c2[k];
                }
                visit(rule.x[q], b, rule.w[q]);
            }
        };
    recurse({1, 0, 0}, {0, 1, 0}, {0, 0, 1}, 0);
}

double tail_weight(const Domain& domain, const KernelSpec& spec, Point x, int angular_order)
{
    const double s = spec.order();
    auto radial = [&](double theta) {
        return std::pow(domain.ray_exit_distance(x, theta), -2.0 * s) / (2.0 * s);
    };
    if (domain.dim() == 1) {
        return spec.a_even(0.0) * (radial(0.0) + radial(M_PI));
    }
    std::vector<double> breaks = domain.vertex_angles(x);
    for (double b : spec.density().breakpoints()) {
        breaks.push_back(b);
        breaks.push_back(b + M_PI);
    }
    return quad::arcs([&](double t) { return spec.a_even(t) * radial(t); }, 0.0, 2.0 * M_PI,
                      breaks, angular_order);
}

GramParts assemble_gram_parts(const SpacePtr& space_ptr, const KernelSpec& spec,
                              const QuadratureConfig& cfg)
{
    const FeSpace& space = *space_ptr;
    if (space.dim() != spec.dim()) {
        throw ConfigError("assemble_gram: mesh and kernel dimensions differ");
    }
    if (cfg.touching < kMinTouchingOrder) {
        throw ConfigError("assemble_gram: touching-pair quadrature order below the minimum of " +
                          std::to_string(kMinTouchingOrder));
    }
    const int ne = space.num_elements();
    const int ndof = space.num_dofs();
    std::vector<ElementData> data;
    data.reserve(ne);
    for (int e = 0; e < ne; ++e) {
        data.push_back(element_data(space, e));
    }
    const double diam = space.mesh_size();
    PairIntegrator integrator(space, spec, cfg);

    GramParts parts;
    parts.interaction = Eigen::MatrixXd::Zero(ndof, ndof);
    parts.complement = Eigen::MatrixXd::Zero(ndof, ndof);

    // Rows of the upper-triangular pair table are processed in fixed chunks;
    // results are merged in chunk order so the sum is thread-count invariant.
    constexpr int chunk_rows = 8;
    const int threads = resolve_threads(cfg.threads);
    const int chunks = (ne + chunk_rows - 1) / chunk_rows;
    auto compute_chunk = [&](int c) {
        std::vector<Local> out;
        for (int e1 = c * chunk_rows; e1 < std::min(ne, (c + 1) * chunk_rows); ++e1) {
            for (int e2 = e1; e2 < ne; ++e2) {
                if (has_dof(space, e1) || has_dof(space, e2)) {
                    out.push_back(integrator.pair(e1, e2, data, diam));
                }
            }
        }
        return out;
    };
    for (int first = 0; first < chunks; first += threads) {
        const int batch = std::min(threads, chunks - first);
        std::vector<std::vector<Local>> results(batch);
        if (batch == 1) {
            results[0] = compute_chunk(first);
        } else {
            std::vector<std::thread> workers;
            for (int t = 0; t < batch; ++t) {
                workers.emplace_back([&, t] { results[t] = compute_chunk(first + t); });
            }
            for (auto& w : workers) {
                w.join();
            }
        }
        for (const auto& chunk : results) {
            for (const Local& loc : chunk) {
                merge(space, loc, parts.interaction);
            }
        }
    }

    // complement term 2 int phi_a phi_b Phi
    const int levels = space.dim() == 1 ? cfg.boundary_levels_1d : cfg.boundary_levels_2d;
    for (int e = 0; e < ne; ++e) {
        if (!has_dof(space, e)) {
            continue;
        }
        Local loc;
        loc.count = space.vertices_per_element();
        for (int k = 0; k < loc.count; ++k) {
            loc.node[k] = space.elements()[e][k];
        }
        for_each_graded_point(space, e, cfg.element, levels,
                              [&](Point x, const std::array<double, 3>& b, double w) {
                                  double phi = tail_weight(space.domain(), spec, x, cfg.angular);
                                  loc.add_outer(b.data(), 2.0 * w * phi);
                              });
        merge(space, loc, parts.complement);
    }
    parts.interaction = 0.5 * (parts.interaction + parts.interaction.transpose()).eval();
    parts.complement = 0.5 * (parts.complement + parts.complement.transpose()).eval();
    return parts;
}

GramMatrix assemble_gram(SpacePtr space, const KernelSpec& spec, const QuadratureConfig& quad)
{
    GramParts parts = assemble_gram_parts(space, spec, quad);
    GramMatrix gram;
    gram.space = std::move(space);
    gram.matrix = parts.interaction + parts.complement;
    gram.quadrature = quad;
    return gram;
}

Eigen::MatrixXd assemble_mass(const FeSpace& space, bool all_nodes)
{
    const int size = all_nodes ? space.num_nodes() : space.num_dofs();
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(size, size);
    const int nv = space.vertices_per_element();
    // P1 element mass: |T| (1 + delta_ab) / ((n + 1)(n + 2))
    const double denom = (nv) * (nv + 1);
    for (int e = 0; e < space.num_elements(); ++e) {
        const auto& el = space.elements()[e];
        for (int a = 0; a < nv; ++a) {
            int ia = all_nodes ? el[a] : space.dof(el[a]);
            if (ia < 0) {
                continue;
            }
            for (int b = 0; b < nv; ++b) {
                int ib = all_nodes ? el[b] : space.dof(el[b]);
                if (ib < 0) {
                    continue;
                }
                mass(ia, ib) += space.element_measure(e) * (a == b ? 2.0 : 1.0) / denom;
            }
        }
    }
    return mass;
}

ElementQuadrature element_quadrature(const FeSpace& space, int order)
{
    ElementQuadrature eq;
    std::vector<double> weights;
    std::vector<Eigen::Triplet<double>> triplets;
    const int nv = space.vertices_per_element();
    for (int e = 0; e < space.num_elements(); ++e) {
        const auto& el = space.elements()[e];
        auto add = [&](Point x, const std::array<double, 3>& b, double w) {
            const int row = static_cast<int>(eq.points.size());
            eq.points.push_back(x);
            weights.push_back(w);
            for (int k = 0; k < nv; ++k) {
                int d = space.dof(el[k]);
                if (d >= 0 && b[k] != 0.0) {
                    triplets.emplace_back(row, d, b[k]);
                }
            }
        };
        if (space.dim() == 1) {
            const auto& g = quad::gauss_legendre(order);
            const double x0 = space.nodes()[el[0]].x, len = space.element_measure(e);
            for (std::size_t q = 0; q < g.size(); ++q) {
                add({x0 + len * g.x[q], 0.0}, {1.0 - g.x[q], g.x[q], 0.0}, len * g.w[q]);
            }
        } else {
            auto rule = quad::triangle_rule(space.vertex(e, 0), space.vertex(e, 1),
                                            space.vertex(e, 2), order);
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                add(rule.x[q], rule.bary[q], rule.w[q]);
            }
        }
    }
    eq.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    eq.basis.resize(static_cast<Eigen::Index>(eq.points.size()), space.num_dofs());
    eq.basis.setFromTriplets(triplets.begin(), triplets.end());
    return eq;
}

Eigen::VectorXd assemble_load(const FeSpace& space, const std::function<double(Point)>& g,
                              int order)
{
    if (order < 2) {
        throw ConfigError("assemble_load: quadrature order must be at least 2");
    }
    ElementQuadrature eq = element_quadrature(space, order);
    Eigen::VectorXd values(eq.weights.size());
    for (Eigen::Index q = 0; q < values.size(); ++q) {
        values[q] = eq.weights[q] * g(eq.points[q]);
    }
    return eq.basis.transpose() * values;
}

Eigen::VectorXd assemble_exterior_coupling(const SpacePtr& space_ptr, const KernelSpec& spec,
                                           const ExteriorTrace& h, const QuadratureConfig& cfg)
{
    const FeSpace& space = *space_ptr;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.num_dofs());
    if (h.is_zero()) {
        return b;
    }
    if (h.width < space.mesh_size()) {
        throw ConfigError("exterior trace: collar width smaller than one element diameter");
    }
    const Domain& domain = space.domain();
    const double s = spec.order();
    // Psi(x) = int_S a(theta) int_R^{R_w} h(x + r theta) r^{-1-2s} dr dtheta
    auto radial = [&](Point x, double theta) {
        double r_in = domain.ray_exit_distance(x, theta);
        double r_out = domain.collar_exit_distance(x, theta, h.width);
        if (h.kind == ExteriorTrace::Kind::Constant) {
            return h.amplitude * (std::pow(r_in, -2.0 * s) - std::pow(r_out, -2.0 * s)) / (2.0 * s);
        }
        Point dir = space.dim() == 1 ? Point{std::cos(theta) > 0 ? 1.0 : -1.0, 0.0}
                                     : direction(theta);
        // nudge off the endpoints where h jumps to zero
        auto f = [&](double r) { return h.value(domain, x + r * dir) * std::pow(r, -1.0 - 2.0 * s); };
        return quad::adaptive(f, r_in, r_out, 1e-10).value;
    };
    auto psi = [&](Point x) {
        if (space.dim() == 1) {
            return spec.a_even(0.0) * (radial(x, 0.0) + radial(x, M_PI));
        }
        std::vector<double> breaks = domain.vertex_angles(x);
        for (double bp : spec.density().breakpoints()) {
            breaks.push_back(bp);
            breaks.push_back(bp + M_PI);
        }
        return quad::arcs([&](double t) { return spec.a_even(t) * radial(x, t); }, 0.0,
                          2.0 * M_PI, breaks, cfg.angular);
    };
    const int levels = space.dim() == 1 ? cfg.boundary_levels_1d : cfg.boundary_levels_2d;
    for (int e = 0; e < space.num_elements(); ++e) {
        if (!has_dof(space, e)) {
            continue;
        }
        const auto& el = space.elements()[e];
        for_each_graded_point(space, e, cfg.element, levels,
                              [&](Point x, const std::array<double, 3>& bary, double w) {
                                  double value = 2.0 * w * psi(x);
                                  for (int k = 0; k < space.vertices_per_element(); ++k) {
                                      int d = space.dof(el[k]);
                                      if (d >= 0) {
                                          b[d] += bary[k] * value;
                                      }
                                  }
                              });
    }
    return b;
}

} // namespace anisokernel
