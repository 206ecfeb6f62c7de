#pragma once

#include <cmath>

namespace anisokernel {

/// A point in R^1 or R^2. One-dimensional code only reads `x`.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator-(Point a) { return {-a.x, -a.y}; }
    friend Point operator*(double t, Point a) { return {t * a.x, t * a.y}; }
    friend Point operator*(Point a, double t) { return {t * a.x, t * a.y}; }
    friend bool operator==(Point, Point) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Unit vector at polar angle `theta`.
inline Point direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Polar angle of `p` normalized to [0, 2pi).
inline double polar_angle(Point p)
{
    double t = std::atan2(p.y, p.x);
    return t < 0.0 ? t + 2.0 * M_PI : t;
}

} // namespace anisokernel
