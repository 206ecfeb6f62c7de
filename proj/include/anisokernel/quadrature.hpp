#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "anisokernel/point.hpp"

namespace anisokernel::quad {

/// Nodes and weights of a rule on [0, 1].
struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

/// Gauss-Legendre rule with `n` points mapped to [0, 1].
const Rule1D& gauss_legendre(int n);

/// Rule on a triangle given by its vertices: collapsed (Duffy) tensor Gauss
/// with order^2 points. Weights include the triangle area.
struct TriangleRule {
    std::vector<Point> x;
    std::vector<std::array<double, 3>> bary;
    std::vector<double> w;
};
TriangleRule triangle_rule(Point a, Point b, Point c, int order);

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod (G7/K15) on [a, b]; `a` and `b` finite.
Estimate adaptive(const std::function<double(double)>& f, double a, double b,
                  double rel_tol = 1e-12, int max_depth = 30);

/// Integrates a 2-pi-periodic function over [lo, hi] splitting at the given
/// breakpoints and using a Gauss rule of `order` points on each arc of
/// length pi/8 or more; shorter arcs use proportionally fewer (at least 4).
/// Angles in `cusps` are also breakpoints, and arcs ending at one get the
/// full order with nodes pulled towards that end (for |theta - theta_0|^p cusps).
/// Visits the (angle, weight) pairs of the rule used by `arcs`.
void for_each_arc_node(double lo, double hi, std::vector<double> breakpoints, int order,
                       const std::vector<double>& cusps,
                       const std::function<void(double, double)>& visit);

double arcs(const std::function<double(double)>& f, double lo, double hi,
            std::vector<double> breakpoints, int order, const std::vector<double>& cusps = {});

} // namespace anisokernel::quad
