#pragma once

#include <array>
#include <memory>
#include <vector>

#include "anisokernel/kernel.hpp"
#include "anisokernel/point.hpp"
#include "anisokernel/quadrature.hpp"

namespace anisokernel {

/// Bounded test function given in closed form, evaluable on all of R^n.
class ClosedFormFunction {
public:
    enum class Kind { Constant, Gaussian, Torsion, PolynomialCutoff, Combination };

    static ClosedFormFunction constant(double value);
    /// amplitude * exp(-|x - center|^2 / width^2)
    static ClosedFormFunction gaussian(Point center, double width, double amplitude = 1.0);
    /// (radius^2 - |x|^2)_+^exponent
    static ClosedFormFunction torsion(double exponent, double radius = 1.0);
    /// p(x - center) * psi(|x - center| / radius), p quadratic with
    /// coefficients (1, x, y, x^2, xy, y^2), psi(t) = exp(1 - 1 / (1 - t^2)).
    static ClosedFormFunction polynomial_cutoff(std::array<double, 6> coeffs, Point center,
                                                double radius);
    /// sum_k weights[k] * terms[k]
    static ClosedFormFunction combination(std::vector<double> weights,
                                          std::vector<ClosedFormFunction> terms);

    double operator()(Point x) const;

    Kind kind() const { return kind_; }
    bool bounded() const { return true; }
    /// Beyond this distance from x the function is zero (or below 1e-18 of its peak).
    double outer_radius(Point x) const;
    /// Distances along x + r dir where the function is not smooth or has a feature.
    std::vector<double> ray_breaks(Point x, Point dir) const;

private:
    ClosedFormFunction() = default;

    Kind kind_ = Kind::Constant;
    double value_ = 0.0;
    Point center_;
    double scale_ = 1.0;
    double exponent_ = 0.5;
    std::array<double, 6> coeffs_{};
    std::vector<double> weights_;
    std::vector<std::shared_ptr<const ClosedFormFunction>> terms_;
};

struct OperatorConfig {
    /// Gauss points per angular arc (2D); the arc count is fixed at 8 per half turn.
    int angular_order = 16;
    double rel_tol = 1e-12;
    /// Truncation radii eps_k = 2^{-k}, k = first_level .. first_level + levels - 1.
    int first_level = 2;
    int levels = 14;
};

/// lim_{eps -> 0} int_{|z| > eps} (u(x) - u(x + z)) K(z) dz with Richardson
/// extrapolation in eps. Throws QuadratureError if the truncated values are
/// not Cauchy.
quad::Estimate lk_pointwise_pv(const KernelSpec& spec, const ClosedFormFunction& u, Point x,
                               const OperatorConfig& cfg = {});

/// (1/2) int (2u(x) - u(x + z) - u(x - z)) K(z) dz.
quad::Estimate lk_pointwise_sd(const KernelSpec& spec, const ClosedFormFunction& u, Point x,
                               const OperatorConfig& cfg = {});

/// Value of L_K (1 - |x|^2)_+^s at the origin, the torsion constant c_T.
quad::Estimate torsion_constant(const KernelSpec& spec, const OperatorConfig& cfg = {});

} // namespace anisokernel
