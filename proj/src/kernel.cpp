#include "anisokernel/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

constexpr double two_pi = 2.0 * M_PI;

double wrap_angle(double theta)
{
    double t = std::fmod(theta, two_pi);
    return t < 0.0 ? t + two_pi : t;
}

} // namespace

AngularDensity AngularDensity::constant(double value)
{
    AngularDensity a;
    a.kind_ = Kind::Constant;
    a.values_ = {value};
    a.validate();
    return a;
}

AngularDensity AngularDensity::sectors(std::vector<double> starts, std::vector<double> values,
                                       bool even)
{
    AngularDensity a;
    a.kind_ = Kind::Sectors;
    a.even_ = even;
    a.starts_ = std::move(starts);
    a.values_ = std::move(values);
    a.validate();
    return a;
}

AngularDensity AngularDensity::samples(std::vector<double> values, bool even)
{
    AngularDensity a;
    a.kind_ = Kind::Samples;
    a.even_ = even;
    a.values_ = std::move(values);
    a.validate();
    return a;
}

AngularDensity AngularDensity::tabulate(const std::function<double(double)>& f, int count,
                                        bool even)
{
    std::vector<double> v(count);
    for (int k = 0; k < count; ++k) {
        v[k] = f(two_pi * k / count);
    }
    return samples(std::move(v), even);
}

void AngularDensity::validate() const
{
    if (values_.empty()) {
        throw ConfigError("angular density: no values");
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw ConfigError("angular density must be strictly positive (inf a > 0)");
        }
    }
    if (kind_ == Kind::Sectors) {
        if (starts_.size() != values_.size()) {
            throw ConfigError("angular density: sector starts and values differ in length");
        }
        for (std::size_t k = 0; k < starts_.size(); ++k) {
            if (starts_[k] < 0.0 || starts_[k] >= two_pi ||
                (k > 0 && starts_[k] <= starts_[k - 1])) {
                throw ConfigError("angular density: sector starts must increase within [0, 2pi)");
            }
        }
    }
    if (kind_ == Kind::Samples && values_.size() < 2) {
        throw ConfigError("angular density: need at least two samples");
    }
    if (even_ && evenness_defect() > 1e-12 * supremum()) {
        throw ConfigError("angular density declared even but a(theta) != a(theta + pi)");
    }
}

double AngularDensity::operator()(double theta) const
{
    switch (kind_) {
    case Kind::Constant:
        return values_[0];
    case Kind::Sectors: {
        double t = wrap_angle(theta);
        auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
        if (it == starts_.begin()) {
            return values_.back();
        }
        return values_[static_cast<std::size_t>(it - starts_.begin()) - 1];
    }
    case Kind::Samples: {
        const auto n = values_.size();
        double pos = wrap_angle(theta) / two_pi * static_cast<double>(n);
        auto k = static_cast<std::size_t>(std::floor(pos));
        double frac = pos - static_cast<double>(k);
        k %= n;
        return (1.0 - frac) * values_[k] + frac * values_[(k + 1) % n];
    }
    }
    return values_[0];
}

double AngularDensity::infimum() const
{
    return *std::min_element(values_.begin(), values_.end());
}

double AngularDensity::supremum() const
{
    return *std::max_element(values_.begin(), values_.end());
}

std::vector<double> AngularDensity::breakpoints() const
{
    switch (kind_) {
    case Kind::Constant:
        return {};
    case Kind::Sectors:
        return starts_;
    case Kind::Samples: {
        std::vector<double> b(values_.size());
        for (std::size_t k = 0; k < b.size(); ++k) {
            b[k] = two_pi * static_cast<double>(k) / static_cast<double>(b.size());
        }
        return b;
    }
    }
    return {};
}

double AngularDensity::evenness_defect(int probes) const
{
    std::vector<double> angles = breakpoints();
    for (int j = 0; j < probes; ++j) {
        angles.push_back(two_pi * (j + 0.3183) / probes);
    }
    double worst = 0.0;
    for (double t : angles) {
        worst = std::max(worst, std::abs((*this)(t) - (*this)(t + M_PI)));
    }
    return worst;
}

KernelSpec::KernelSpec(int n, double s, AngularDensity a) : n_(n), s_(s), a_(std::move(a))
{
    if (n != 1 && n != 2) {
        throw ConfigError("kernel: dimension n must be 1 or 2");
    }
    if (!(s > 0.0 && s < 1.0)) {
        throw ConfigError("kernel: order s must lie in (0, 1)");
    }
    if (!(n > 2.0 * s)) {
        throw ConfigError("kernel: n > 2s required (n = " + std::to_string(n) +
                          ", s = " + std::to_string(s) + ")");
    }
    if (n == 1 && a_.kind() != AngularDensity::Kind::Constant) {
        // S^0 = {-1, +1}; an even density on it is a constant.
        throw ConfigError("kernel: in 1D the angular density must be constant");
    }
    beta_ = a_.infimum();
}

double KernelSpec::a_even(double theta) const
{
    return 0.5 * (a_(theta) + a_(theta + M_PI));
}

double KernelSpec::sphere_integral(const std::function<double(double)>& f, int order,
                                   std::vector<double> breaks) const
{
    if (n_ == 1) {
        return f(0.0) + f(M_PI);
    }
    for (double b : a_.breakpoints()) {
        breaks.push_back(b);
        breaks.push_back(b + M_PI); // breakpoints of a(theta + pi)
    }
    return quad::arcs(f, 0.0, two_pi, std::move(breaks), order);
}

double KernelSpec::weighted_sphere_integral(const std::function<double(double)>& f, int order,
                                            std::vector<double> breaks) const
{
    return sphere_integral([&](double t) { return a_(t) * f(t); }, order, std::move(breaks));
}

double kernel_eval(const KernelSpec& spec, Point y)
{
    const int n = spec.dim();
    double r = n == 1 ? std::abs(y.x) : norm(y);
    if (r == 0.0) {
        throw DomainError("kernel_eval: K is singular at y = 0");
    }
    double theta = n == 1 ? (y.x > 0.0 ? 0.0 : M_PI) : polar_angle(y);
    return spec.a(theta) * std::pow(r, -n - 2.0 * spec.order());
}

namespace {

// int_0^inf (1 - cos(k r)) r^{-1-2s} dr, split at r0 = 1/|xi|.
quad::Estimate radial_multiplier(double k, double r0, double s, const MultiplierConfig& cfg)
{
    if (k == 0.0) {
        return {};
    }
    const double p = 1.0 + 2.0 * s;
    auto f = [&](double r) {
        double h = std::sin(0.5 * k * r);
        return 2.0 * h * h * std::pow(r, -p);
    };
    // r = r0 t^g with g = 1 / (2 - 2s) removes the r^{1-2s} endpoint singularity
    const double g = 1.0 / (2.0 - 2.0 * s);
    auto near = [&](double t) {
        if (t == 0.0) {
            return 0.5 * k * k * g * std::pow(r0, 2.0 - 2.0 * s);
        }
        double r = r0 * std::pow(t, g);
        return f(r) * g * r / t;
    };
    quad::Estimate total = quad::adaptive(near, 0.0, 1.0, cfg.rel_tol);

    const double panel = M_PI / k;
    const double r_max = std::max(r0, 2.0 * M_PI * cfg.periods / k);
    const int panels = static_cast<int>(std::ceil((r_max - r0) / panel));
    for (int j = 0; j < panels; ++j) {
        quad::Estimate e = quad::adaptive(f, r0 + j * panel, r0 + (j + 1) * panel, cfg.rel_tol);
        total.value += e.value;
        total.error += e.error;
    }

    // Tail beyond R: exact non-oscillatory part plus asymptotic expansion of
    // int_R^inf cos(k r) r^{-p} dr.
    const double big_r = r0 + panels * panel;
    const double c = std::cos(k * big_r), sn = std::sin(k * big_r);
    const double osc = -sn * std::pow(big_r, -p) / k + p * c * std::pow(big_r, -p - 1) / (k * k) +
                       p * (p + 1) * sn * std::pow(big_r, -p - 2) / (k * k * k);
    total.value += std::pow(big_r, -2.0 * s) / (2.0 * s) - osc;
    total.error += 2.0 * p * (p + 1) * (p + 2) * std::pow(big_r, -p - 3) / std::pow(k, 4);
    return total;
}

} // namespace

quad::Estimate multiplier_eval(const KernelSpec& spec, Point xi, const MultiplierConfig& cfg)
{
    const int n = spec.dim();
    const double s = spec.order();
    const double xi_norm = n == 1 ? std::abs(xi.x) : norm(xi);
    if (xi_norm == 0.0) {
        return {};
    }
    const double r0 = 1.0 / xi_norm;
    quad::Estimate total;
    if (n == 1) {
        quad::Estimate e = radial_multiplier(xi_norm, r0, s, cfg);
        total.value = (spec.a(0.0) + spec.a(M_PI)) * e.value;
        total.error = (spec.a(0.0) + spec.a(M_PI)) * e.error;
    } else {
        const double psi = polar_angle(xi);
        const std::vector<double> cusps{psi + 0.5 * M_PI, psi + 1.5 * M_PI};
        quad::for_each_arc_node(0.0, 2.0 * M_PI, spec.density().breakpoints(), cfg.angular_order,
                                cusps,
                                [&](double theta, double w) {
                                    double k = xi_norm * std::abs(std::cos(theta - psi));
                                    quad::Estimate e = radial_multiplier(k, r0, s, cfg);
                                    total.value += w * spec.a(theta) * e.value;
                                    total.error += w * spec.a(theta) * e.error;
                                });
    }
    if (!(total.error <= 1e-7 * std::abs(total.value))) {
        throw QuadratureError("multiplier_eval: radial quadrature did not converge", total.error);
    }
    return total;
}

StructuralReport check_structural_properties(const KernelSpec& spec)
{
    const int n = spec.dim();
    const double s = spec.order();
    StructuralReport report;

    // int m K = (int_S a) * (int_0^1 r^{1-2s} dr + int_1^inf r^{-1-2s} dr)
    double a_total = spec.weighted_sphere_integral([](double) { return 1.0; }, 16);
    double radial = 1.0 / (2.0 - 2.0 * s) + 1.0 / (2.0 * s);
    report.integrability = {"mK_integrable", std::isfinite(a_total * radial) && a_total > 0.0,
                            a_total * radial};

    std::vector<double> angles;
    if (n == 1) {
        angles = {0.0, M_PI};
    } else {
        for (int j = 0; j < 720; ++j) {
            angles.push_back(2.0 * M_PI * (j + 0.5) / 720.0);
        }
        for (double b : spec.density().breakpoints()) {
            angles.push_back(b);
        }
    }
    double min_ratio = std::numeric_limits<double>::infinity();
    double even_defect = 0.0;
    for (double t : angles) {
        for (double r : {0.1, 1.0, 10.0}) {
            Point y = r * direction(t);
            if (n == 1) {
                y = {t == 0.0 ? r : -r, 0.0};
            }
            double k = kernel_eval(spec, y);
            min_ratio = std::min(min_ratio, k * std::pow(r, n + 2.0 * s));
            even_defect = std::max(even_defect, std::abs(k - kernel_eval(spec, -y)) / k);
        }
    }
    report.lower_bound = {"lower_bound", spec.beta() > 0.0 &&
                                             min_ratio >= spec.beta() * (1.0 - 1e-12),
                          min_ratio};
    report.evenness = {"evenness", even_defect <= 1e-12, even_defect};
    return report;
}

} // namespace anisokernel
