#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "anisokernel/geometry.hpp"
#include "anisokernel/kernel.hpp"

namespace anisokernel {

/// Quadrature orders used by the assembly routines.
struct QuadratureConfig {
    /// Gauss order per direction for identical / touching element pairs.
    int touching = 16;
    /// Order range for disjoint pairs; the order grows as pairs get closer.
    int disjoint_min = 3;
    int disjoint_max = 16;
    /// Gauss order per arc for angular integrals (tail weight, 2D).
    int angular = 16;
    /// Gauss order on elements for the complement term and exterior coupling.
    int element = 8;
    /// Levels of geometric grading towards the boundary.
    int boundary_levels_1d = 24;
    int boundary_levels_2d = 3;
    /// Worker count; 0 reads ANISOKERNEL_THREADS (default 1).
    int threads = 0;
};

inline constexpr int kMinTouchingOrder = 4;

/// Gram matrix of <u, v>_X over the interior basis functions.
struct GramMatrix {
    SpacePtr space;
    Eigen::MatrixXd matrix;
    QuadratureConfig quadrature;
    std::string tail_method = "exact radial tail, angular Gauss";
};

/// Gram matrix split into the Omega x Omega interaction and the complement
/// term 2 int phi_i phi_j Phi.
struct GramParts {
    Eigen::MatrixXd interaction;
    Eigen::MatrixXd complement;
};

/// Prescribed values h on R^n \ Omega, zero beyond the collar
/// {y : 0 < dist(y, Omega) <= width}.
struct ExteriorTrace {
    enum class Kind { Zero, Constant, Gaussian, Sampled };

    Kind kind = Kind::Zero;
    double width = 0.0;
    double amplitude = 0.0;
    Point center;        // Gaussian
    double length = 1.0; // Gaussian
    /// Sampled: values at uniform exterior distances 0..width, linear interpolation.
    std::vector<double> samples;

    static ExteriorTrace zero() { return {}; }
    static ExteriorTrace constant(double value, double width);
    static ExteriorTrace gaussian(double amplitude, Point center, double length, double width);
    static ExteriorTrace sampled(std::vector<double> samples, double width);

    bool is_zero() const { return kind == Kind::Zero; }
    double value(const Domain& domain, Point y) const;
    /// Smallest value over a sampling of the collar.
    double sampled_minimum(const Domain& domain, int probes = 64) const;
};

/// Quadrature points over all elements with the basis-value matrix
/// B (points x dofs), so that u_h(x_q) = (B u)_q.
struct ElementQuadrature {
    std::vector<Point> points;
    Eigen::VectorXd weights;
    Eigen::SparseMatrix<double, Eigen::RowMajor> basis;
};

ElementQuadrature element_quadrature(const FeSpace& space, int order = 4);

GramMatrix assemble_gram(SpacePtr space, const KernelSpec& spec,
                         const QuadratureConfig& quad = {});
GramParts assemble_gram_parts(const SpacePtr& space, const KernelSpec& spec,
                              const QuadratureConfig& quad = {});

/// P1 mass matrix over interior dofs, or over all nodes.
Eigen::MatrixXd assemble_mass(const FeSpace& space, bool all_nodes = false);

/// Entry i = int g phi_i dx.
Eigen::VectorXd assemble_load(const FeSpace& space, const std::function<double(Point)>& g,
                              int order = 4);

/// b_i = 2 int_Omega int_{R^n \ Omega} phi_i(x) h(y) K(x - y) dy dx.
Eigen::VectorXd assemble_exterior_coupling(const SpacePtr& space, const KernelSpec& spec,
                                           const ExteriorTrace& h,
                                           const QuadratureConfig& quad = {});

/// Phi(x) = int_{R^n \ Omega} K(x - y) dy = int_S a(theta) R(x, theta)^{-2s} / (2s).
double tail_weight(const Domain& domain, const KernelSpec& spec, Point x, int angular_order = 16);

/// Visits quadrature points of element e, graded towards boundary nodes.
/// `bary` holds the element's barycentric coordinates of the point.
void for_each_graded_point(const FeSpace& space, int e, int order, int levels,
                           const std::function<void(Point, const std::array<double, 3>&,
                                                    double)>& visit);

int resolve_threads(int requested);

} // namespace anisokernel
