#include "anisokernel/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

void sphere_roots(Point offset, Point dir, double radius, std::vector<double>& out)
{
    double b = dot(offset, dir);
    double disc = b * b - dot(offset, offset) + radius * radius;
    if (disc < 0.0) {
        return;
    }
    double root = std::sqrt(disc);
    for (double r : {-b - root, -b + root}) {
        if (r > 0.0) {
            out.push_back(r);
        }
    }
}

void closest_approach(Point offset, Point dir, double scale, std::vector<double>& out)
{
    double t = -dot(offset, dir);
    for (double k : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}) {
        double r = t + k * scale;
        if (r > 0.0) {
            out.push_back(r);
        }
    }
}

/// Adaptive integral of f over [lo, hi] split at the breakpoints inside.
quad::Estimate piecewise(const std::function<double(double)>& f, double lo, double hi,
                         std::vector<double> breaks, double rel_tol)
{
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    quad::Estimate total;
    double prev = lo;
    for (double b : breaks) {
        if (b <= prev || b > hi) {
            continue;
        }
        auto piece = quad::adaptive(f, prev, b, rel_tol);
        total.value += piece.value;
        total.error += piece.error;
        prev = b;
    }
    return total;
}

/// Half-sphere directions with weights: one direction in 1D, Gauss nodes on
/// [0, pi) in 2D.
std::vector<std::pair<double, double>> half_directions(const KernelSpec& spec, int order)
{
    std::vector<std::pair<double, double>> nodes;
    if (spec.dim() == 1) {
        nodes.emplace_back(0.0, 1.0);
        return nodes;
    }
    std::vector<double> breaks;
    for (int k = 0; k <= 8; ++k) {
        breaks.push_back(M_PI * k / 8.0);
    }
    for (double b : spec.density().breakpoints()) {
        breaks.push_back(std::fmod(b, M_PI));
    }
    quad::for_each_arc_node(0.0, M_PI, breaks, order, {},
                            [&](double t, double w) { nodes.emplace_back(t, w); });
    return nodes;
}

Point unit(const KernelSpec& spec, double theta)
{
    return spec.dim() == 1 ? Point{1.0, 0.0} : direction(theta);
}

/// int_0^inf (2u(x) - u(x + r d) - u(x - r d)) r^{-1-2s} dr
quad::Estimate second_difference_radial(const KernelSpec& spec, const ClosedFormFunction& u,
                                        Point x, Point d, double rel_tol)
{
    const double s = spec.order();
    const double ux = u(x);
    const double outer = u.outer_radius(x);
    auto breaks = u.ray_breaks(x, d);
    auto back = u.ray_breaks(x, -d);
    breaks.insert(breaks.end(), back.begin(), back.end());
    auto f = [&](double r) {
        return (2.0 * ux - u(x + r * d) - u(x - r * d)) * std::pow(r, -1.0 - 2.0 * s);
    };
    // Near r = 0 the difference quotient D(r) / r^2 = A + B r^2 + O(r^4) is
    // fitted from two samples; quadrature there would only see rounding noise.
    double first = outer;
    for (double b : breaks) {
        if (b > 0.0) {
            first = std::min(first, b);
        }
    }
    const double r0 = 1e-3 * first;
    auto quotient = [&](double r) { return (2.0 * ux - u(x + r * d) - u(x - r * d)) / (r * r); };
    const double q1 = quotient(r0), q2 = quotient(0.5 * r0);
    const double A = (4.0 * q2 - q1) / 3.0, B = (q1 - q2) / (0.75 * r0 * r0);
    quad::Estimate est = piecewise(f, r0, outer, breaks, rel_tol);
    est.value += A * std::pow(r0, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) +
                 B * std::pow(r0, 4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    est.error += std::abs(B) * std::pow(r0, 4.0 - 2.0 * s) * 1e-2 +
                 64.0 * std::numeric_limits<double>::epsilon() * std::abs(ux) *
                     std::pow(r0, -2.0 * s);
    est.value += 2.0 * ux * std::pow(outer, -2.0 * s) / (2.0 * s);
    return est;
}

/// Values of int_{eps_k}^inf (u(x) - u(x + r d)) r^{-1-2s} dr for all k,
/// accumulated inward from the outer radius.
std::vector<quad::Estimate> truncated_radial(const KernelSpec& spec, const ClosedFormFunction& u,
                                             Point x, Point d, const std::vector<double>& eps,
                                             double rel_tol)
{
    const double s = spec.order();
    const double ux = u(x);
    const double outer = std::max(u.outer_radius(x), 2.0 * eps.front());
    auto f = [&](double r) { return (ux - u(x + r * d)) * std::pow(r, -1.0 - 2.0 * s); };
    std::vector<double> breaks = u.ray_breaks(x, d);
    quad::Estimate acc{ux * std::pow(outer, -2.0 * s) / (2.0 * s), 0.0};
    auto piece = piecewise(f, eps.front(), outer, breaks, rel_tol);
    acc.value += piece.value;
    acc.error += piece.error;
    std::vector<quad::Estimate> out{acc};
    for (std::size_t k = 1; k < eps.size(); ++k) {
        piece = piecewise(f, eps[k], eps[k - 1], breaks, rel_tol);
        acc.value += piece.value;
        acc.error += piece.error;
        out.push_back(acc);
    }
    return out;
}

} // namespace

ClosedFormFunction ClosedFormFunction::constant(double value)
{
    ClosedFormFunction u;
    u.kind_ = Kind::Constant;
    u.value_ = value;
    return u;
}

ClosedFormFunction ClosedFormFunction::gaussian(Point center, double width, double amplitude)
{
    if (!(width > 0.0)) {
        throw ConfigError("gaussian: width must be positive");
    }
    ClosedFormFunction u;
    u.kind_ = Kind::Gaussian;
    u.center_ = center;
    u.scale_ = width;
    u.value_ = amplitude;
    return u;
}

ClosedFormFunction ClosedFormFunction::torsion(double exponent, double radius)
{
    if (!(radius > 0.0) || !(exponent > 0.0)) {
        throw ConfigError("torsion: radius and exponent must be positive");
    }
    ClosedFormFunction u;
    u.kind_ = Kind::Torsion;
    u.exponent_ = exponent;
    u.scale_ = radius;
    return u;
}

ClosedFormFunction ClosedFormFunction::polynomial_cutoff(std::array<double, 6> coeffs,
                                                         Point center, double radius)
{
    if (!(radius > 0.0)) {
        throw ConfigError("polynomial_cutoff: radius must be positive");
    }
    ClosedFormFunction u;
    u.kind_ = Kind::PolynomialCutoff;
    u.coeffs_ = coeffs;
    u.center_ = center;
    u.scale_ = radius;
    return u;
}

ClosedFormFunction ClosedFormFunction::combination(std::vector<double> weights,
                                                   std::vector<ClosedFormFunction> terms)
{
    if (weights.size() != terms.size() || terms.empty()) {
        throw ConfigError("combination: need one weight per term");
    }
    ClosedFormFunction u;
    u.kind_ = Kind::Combination;
    u.weights_ = std::move(weights);
    for (auto& t : terms) {
        u.terms_.push_back(std::make_shared<const ClosedFormFunction>(std::move(t)));
    }
    return u;
}

double ClosedFormFunction::operator()(Point x) const
{
    switch (kind_) {
    case Kind::Constant:
        return value_;
    case Kind::Gaussian: {
        Point y = x - center_;
        return value_ * std::exp(-dot(y, y) / (scale_ * scale_));
    }
    case Kind::Torsion: {
        double t = scale_ * scale_ - dot(x, x);
        return t > 0.0 ? std::pow(t, exponent_) : 0.0;
    }
    case Kind::PolynomialCutoff: {
        Point y = x - center_;
        double t2 = dot(y, y) / (scale_ * scale_);
        if (t2 >= 1.0) {
            return 0.0;
        }
        const auto& c = coeffs_;
        double p = c[0] + c[1] * y.x + c[2] * y.y + c[3] * y.x * y.x + c[4] * y.x * y.y +
                   c[5] * y.y * y.y;
        return p * std::exp(1.0 - 1.0 / (1.0 - t2));
    }
    case Kind::Combination: {
        double v = 0.0;
        for (std::size_t k = 0; k < terms_.size(); ++k) {
            v += weights_[k] * (*terms_[k])(x);
        }
        return v;
    }
    }
    return 0.0;
}

double ClosedFormFunction::outer_radius(Point x) const
{
    switch (kind_) {
    case Kind::Constant:
        return 1.0;
    case Kind::Gaussian:
        return norm(x - center_) + 7.0 * scale_;
    case Kind::Torsion:
        return norm(x) + scale_;
    case Kind::PolynomialCutoff:
        return norm(x - center_) + scale_;
    case Kind::Combination: {
        double r = 0.0;
        for (const auto& t : terms_) {
            r = std::max(r, t->outer_radius(x));
        }
        return r;
    }
    }
    return 1.0;
}

std::vector<double> ClosedFormFunction::ray_breaks(Point x, Point dir) const
{
    std::vector<double> out;
    switch (kind_) {
    case Kind::Constant:
        break;
    case Kind::Gaussian:
        closest_approach(x - center_, dir, scale_, out);
        break;
    case Kind::Torsion:
        sphere_roots(x, dir, scale_, out);
        break;
    case Kind::PolynomialCutoff:
        sphere_roots(x - center_, dir, scale_, out);
        closest_approach(x - center_, dir, 0.25 * scale_, out);
        break;
    case Kind::Combination:
        for (const auto& t : terms_) {
            auto more = t->ray_breaks(x, dir);
            out.insert(out.end(), more.begin(), more.end());
        }
        break;
    }
    return out;
}

quad::Estimate lk_pointwise_sd(const KernelSpec& spec, const ClosedFormFunction& u, Point x,
                               const OperatorConfig& cfg)
{
    if (u.kind() == ClosedFormFunction::Kind::Constant) {
        return {};
    }
    auto integrate = [&](int order) {
        quad::Estimate total;
        for (auto [theta, w] : half_directions(spec, order)) {
            double weight = 0.5 * w * (spec.a(theta) + spec.a(theta + M_PI));
            auto radial = second_difference_radial(spec, u, x, unit(spec, theta), cfg.rel_tol);
            total.value += weight * radial.value;
            total.error += std::abs(weight) * radial.error;
        }
        return total;
    };
    auto fine = integrate(2 * cfg.angular_order);
    if (spec.dim() == 2) {
        fine.error += std::abs(fine.value - integrate(cfg.angular_order).value);
    }
    return fine;
}

quad::Estimate lk_pointwise_pv(const KernelSpec& spec, const ClosedFormFunction& u, Point x,
                               const OperatorConfig& cfg)
{
    if (cfg.levels < 4) {
        throw ConfigError("lk_pointwise_pv: need at least four truncation levels");
    }
    if (u.kind() == ClosedFormFunction::Kind::Constant) {
        return {};
    }
    std::vector<double> eps;
    for (int k = 0; k < cfg.levels; ++k) {
        eps.push_back(std::ldexp(1.0, -(cfg.first_level + k)));
    }
    const int levels = cfg.levels;

    auto truncated = [&](int order) {
        std::vector<double> values(levels, 0.0);
        double error = 0.0;
        for (auto [theta, w] : half_directions(spec, order)) {
            Point d = unit(spec, theta);
            auto fwd = truncated_radial(spec, u, x, d, eps, cfg.rel_tol);
            auto bwd = truncated_radial(spec, u, x, -d, eps, cfg.rel_tol);
            double af = spec.a(theta), ab = spec.a(theta + M_PI);
            for (int k = 0; k < levels; ++k) {
                values[k] += w * (af * fwd[k].value + ab * bwd[k].value);
            }
            error += w * (af * fwd.back().error + ab * bwd.back().error);
        }
        return std::make_pair(values, error);
    };

    auto [values, quad_error] = truncated(2 * cfg.angular_order);

    double first_step = std::abs(values[1] - values[0]);
    double last_step = std::abs(values[levels - 1] - values[levels - 2]);
    if (last_step > first_step && last_step > 1e-13 * (1.0 + std::abs(values.back()))) {
        throw QuadratureError("lk_pointwise_pv: truncated integrals do not settle as eps -> 0",
                              last_step);
    }

    // eliminate eps^{2-2s}, then eps^{4-2s}
    const double s = spec.order();
    auto richardson = [](const std::vector<double>& v, double p) {
        const double f = std::pow(2.0, p);
        std::vector<double> out;
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            out.push_back((f * v[k + 1] - v[k]) / (f - 1.0));
        }
        return out;
    };
    auto first = richardson(values, 2.0 - 2.0 * s);
    auto second = richardson(first, 4.0 - 2.0 * s);
    quad::Estimate est;
    est.value = second.back();
    est.error = std::abs(second.back() - second[second.size() - 2]) + 3.0 * quad_error;
    if (spec.dim() == 2) {
        auto coarse = truncated(cfg.angular_order).first;
        auto c2 = richardson(richardson(coarse, 2.0 - 2.0 * s), 4.0 - 2.0 * s);
        est.error += std::abs(est.value - c2.back());
    }
    return est;
}

quad::Estimate torsion_constant(const KernelSpec& spec, const OperatorConfig& cfg)
{
    return lk_pointwise_sd(spec, ClosedFormFunction::torsion(spec.order()), Point{0.0, 0.0},
                           cfg);
}

} // namespace anisokernel
