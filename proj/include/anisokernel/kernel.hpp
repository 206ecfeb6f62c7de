#pragma once

#include <functional>
#include <string>
#include <vector>

#include "anisokernel/point.hpp"
#include "anisokernel/quadrature.hpp"

namespace anisokernel {

/// Strictly positive density on the unit circle (or on {-1, +1} in 1D),
/// addressed by polar angle.
///
/// Three machine forms are supported: a constant, a piecewise-constant
/// function on angular sectors, and uniform samples theta_k = 2 pi k / N
/// with periodic linear interpolation.
class AngularDensity {
public:
    enum class Kind { Constant, Sectors, Samples };

    static AngularDensity constant(double value);
    /// Sector k covers [starts[k], starts[k+1]) cyclically; `starts` must be
    /// increasing in [0, 2 pi).
    static AngularDensity sectors(std::vector<double> starts, std::vector<double> values,
                                  bool even);
    static AngularDensity samples(std::vector<double> values, bool even);
    /// Tabulates `f` at `count` uniform angles.
    static AngularDensity tabulate(const std::function<double(double)>& f, int count,
                                   bool even);

    double operator()(double theta) const;

    Kind kind() const { return kind_; }
    bool declared_even() const { return even_; }
    const std::vector<double>& starts() const { return starts_; }
    const std::vector<double>& values() const { return values_; }

    double infimum() const;
    double supremum() const;
    /// Angles where the density is not smooth.
    std::vector<double> breakpoints() const;
    /// Largest |a(theta) - a(theta + pi)| over `probes` sampled angles.
    double evenness_defect(int probes = 720) const;

private:
    AngularDensity() = default;
    void validate() const;

    Kind kind_ = Kind::Constant;
    bool even_ = true;
    std::vector<double> starts_;
    std::vector<double> values_;
};

/// K(y) = a(y/|y|) |y|^{-n-2s}.
class KernelSpec {
public:
    KernelSpec(int n, double s, AngularDensity a);

    int dim() const { return n_; }
    double order() const { return s_; }
    const AngularDensity& density() const { return a_; }
    /// Lower kernel constant: K(y) >= beta |y|^{-n-2s}.
    double beta() const { return beta_; }
    /// Fractional critical exponent 2n / (n - 2s).
    double critical_exponent() const { return 2.0 * n_ / (n_ - 2.0 * s_); }

    double a(double theta) const { return a_(theta); }
    /// (a(theta) + a(theta + pi)) / 2; equals a for even densities.
    double a_even(double theta) const;

    /// Integral over the unit sphere S^{n-1} of `f(theta)`; in 1D the sum of
    /// f(0) and f(pi). `breaks` are extra non-smooth angles of `f`.
    double sphere_integral(const std::function<double(double)>& f, int order,
                           std::vector<double> breaks = {}) const;

    /// Same as above with a(theta) included as a weight.
    double weighted_sphere_integral(const std::function<double(double)>& f, int order,
                                    std::vector<double> breaks = {}) const;

private:
    int n_;
    double s_;
    AngularDensity a_;
    double beta_;
};

double kernel_eval(const KernelSpec& spec, Point y);

struct MultiplierConfig {
    int angular_order = 64;
    /// Oscillation periods integrated before the asymptotic tail takes over.
    int periods = 64;
    double rel_tol = 1e-11;
};

/// S(xi) = int (1 - cos(xi . z)) K(z) dz with an error estimate. Throws
/// QuadratureError when the estimate exceeds the configured tolerance.
quad::Estimate multiplier_eval(const KernelSpec& spec, Point xi,
                               const MultiplierConfig& cfg = {});

struct PropertyCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;
};

struct StructuralReport {
    PropertyCheck integrability; // value: int min(|y|^2, 1) K(y) dy
    PropertyCheck lower_bound;   // value: min sampled K(y) |y|^{n+2s}
    PropertyCheck evenness;      // value: max sampled |K(y) - K(-y)| / K(y)
    bool all_pass() const { return integrability.pass && lower_bound.pass && evenness.pass; }
};

StructuralReport check_structural_properties(const KernelSpec& spec);

} // namespace anisokernel
