#include "anisokernel/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace anisokernel::quad {

namespace {

Rule1D compute_gauss_legendre(int n)
{
    Rule1D rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        double w = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        rule.x[i] = 0.5 * (1.0 - z);
        rule.x[n - 1 - i] = 0.5 * (1.0 + z);
        rule.w[i] = 0.5 * w;
        rule.w[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

} // namespace

const Rule1D& gauss_legendre(int n)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Rule1D>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<Rule1D>(compute_gauss_legendre(n));
    }
    return *slot;
}

TriangleRule triangle_rule(Point a, Point b, Point c, int order)
{
    const Rule1D& g = gauss_legendre(order);
    double area = 0.5 * std::abs(cross(b - a, c - a));
    TriangleRule rule;
    rule.x.reserve(order * order);
    rule.bary.reserve(order * order);
    rule.w.reserve(order * order);
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
            // x = a + xi (b - a) + xi eta (c - b), Jacobian 2 |T| xi
            double xi = g.x[i], eta = g.x[j];
            double lb = xi * (1.0 - eta), lc = xi * eta;
            double la = 1.0 - lb - lc;
            rule.bary.push_back({la, lb, lc});
            rule.x.push_back(la * a + lb * b + lc * c);
            rule.w.push_back(2.0 * area * xi * g.w[i] * g.w[j]);
        }
    }
    return rule;
}

Estimate adaptive(const std::function<double(double)>& f, double a, double b,
                  double rel_tol, int max_depth)
{
    if (a == b) {
        return {};
    }
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Panel {
        double a, b, value, error, l1;
        int depth;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto panel = [&](double lo, double hi, int depth) {
        Panel p{lo, hi, 0.0, 0.0, 0.0, depth};
        p.value = GK::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
        // without recursion boost leaves the error on the reference interval
        p.error = std::abs(p.error) * 0.5 * (hi - lo);
        return p;
    };
    // Global bisection of the worst panel; stops at the tolerance, at the
    // roundoff floor, or when the panel budget is spent.
    constexpr std::size_t kBudget = 4000;
    std::priority_queue<Panel> queue;
    queue.push(panel(a, b, 0));
    double value = queue.top().value, error = queue.top().error, l1 = queue.top().l1;
    std::vector<Panel> done;
    while (!queue.empty() && queue.size() + done.size() < kBudget) {
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
        if (error <= std::max(rel_tol * std::abs(value), floor)) {
            break;
        }
        Panel worst = queue.top();
        queue.pop();
        if (worst.depth >= max_depth || worst.error <= floor / 1e3) {
            done.push_back(worst);
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = panel(worst.a, mid, worst.depth + 1);
        Panel right = panel(mid, worst.b, worst.depth + 1);
        if (worst.depth >= 6 && left.error + right.error > 0.9 * worst.error) {
            // no progress: the estimate is dominated by rounding noise
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            l1 += left.l1 + right.l1 - worst.l1;
            done.push_back(left);
            done.push_back(right);
            continue;
        }
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        queue.push(left);
        queue.push(right);
    }
    // re-sum to avoid drift from the running updates
    value = 0.0;
    error = 0.0;
    for (const auto& p : done) {
        value += p.value;
        error += p.error;
    }
    while (!queue.empty()) {
        value += queue.top().value;
        error += queue.top().error;
        queue.pop();
    }
    return {value, error};
}

void for_each_arc_node(double lo, double hi, std::vector<double> breakpoints, int order,
                       const std::vector<double>& cusps,
                       const std::function<void(double, double)>& visit)
{
    const double period = 2.0 * M_PI;
    auto images = [&](double t, std::vector<double>& into) {
        double base = t - period * std::floor((t - lo) / period);
        for (double u = base; u < hi; u += period) {
            if (u > lo) {
                into.push_back(u);
            }
        }
    };
    std::vector<double> cuts{lo, hi};
    for (double t : breakpoints) {
        images(t, cuts);
    }
    std::vector<double> singular;
    for (double t : cusps) {
        images(t, cuts);
        images(t, singular);
        if (std::abs(std::remainder(t - lo, period)) < 1e-12) {
            singular.push_back(lo);
            singular.push_back(hi);
        }
    }
    auto is_cusp = [&](double x) {
        return std::any_of(singular.begin(), singular.end(),
                           [&](double c) { return std::abs(c - x) < 1e-12; });
    };
    std::sort(cuts.begin(), cuts.end());
    constexpr double kReferenceArc = M_PI / 8.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double len = cuts[k + 1] - cuts[k];
        if (len <= 1e-15) {
            continue;
        }
        const bool left = is_cusp(cuts[k]), right = is_cusp(cuts[k + 1]);
        // short arcs (dense density breakpoints) get proportionally fewer nodes
        int m = static_cast<int>(std::ceil(order * len / kReferenceArc));
        if (!left && !right) {
            m = std::clamp(m, std::min(order, 4), order);
        } else {
            m = order;
        }
        const Rule1D& g = gauss_legendre(m);
        for (std::size_t q = 0; q < g.size(); ++q) {
            double t = g.x[q], jac = 1.0;
            if (left && right) {
                // u = t^4 / (t^4 + (1-t)^4)
                double p = std::pow(t, 4), r = std::pow(1.0 - t, 4);
                double den = p + r;
                jac = 4.0 * std::pow(t, 3) * std::pow(1.0 - t, 3) / (den * den);
                t = p / den;
            } else if (left) {
                jac = 4.0 * std::pow(t, 3);
                t = std::pow(t, 4);
            } else if (right) {
                jac = 4.0 * std::pow(1.0 - t, 3);
                t = 1.0 - std::pow(1.0 - t, 4);
            }
            visit(cuts[k] + len * t, len * g.w[q] * jac);
        }
    }
}

double arcs(const std::function<double(double)>& f, double lo, double hi,
            std::vector<double> breakpoints, int order, const std::vector<double>& cusps)
{
    double total = 0.0;
    for_each_arc_node(lo, hi, std::move(breakpoints), order, cusps,
                      [&](double theta, double w) { total += w * f(theta); });
    return total;
}

} // namespace anisokernel::quad
