#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "anisokernel/point.hpp"

namespace anisokernel {

/// Bounded convex domain: an interval in 1D or a convex polygon in 2D.
class Domain {
public:
    enum class Kind { Interval, Polygon };

    static Domain interval(double lo, double hi);
    /// Vertices in counterclockwise order; the polygon must be strictly convex.
    static Domain polygon(std::vector<Point> vertices);

    Kind kind() const { return kind_; }
    int dim() const { return kind_ == Kind::Interval ? 1 : 2; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<Point>& vertices() const { return vertices_; }

    double measure() const;
    double diameter() const;
    bool contains(Point x) const;

    /// delta(x) = dist(x, R^n \ Omega); zero outside the closure.
    double boundary_distance(Point x) const;
    /// dist(x, Omega); zero inside.
    double exterior_distance(Point x) const;
    /// sup{t > 0 : x + t theta in Omega} for interior x. In 1D theta is 0
    /// (towards +inf) or pi.
    double ray_exit_distance(Point x, double theta) const;
    /// Exit distance of the ray from {y : dist(y, Omega) <= width}.
    double collar_exit_distance(Point x, double theta, double width) const;
    /// Angles from x towards the polygon vertices (kinks of the exit distance).
    std::vector<double> vertex_angles(Point x) const;

private:
    Domain() = default;

    Kind kind_ = Kind::Interval;
    double lo_ = 0.0, hi_ = 0.0;
    std::vector<Point> vertices_;
};

enum class PairKind { Identical, SharedFacet, SharedVertex, Disjoint };

/// P1 finite-element space on a conforming simplicial mesh of a Domain.
/// Degrees of freedom are the interior nodes; basis functions of interior
/// nodes vanish on and outside the boundary.
class FeSpace {
public:
    using Element = std::array<int, 3>; // 1D elements use the first two entries

    FeSpace(Domain domain, int subdivisions);

    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    int subdivisions() const { return subdivisions_; }
    int vertices_per_element() const { return dim() + 1; }

    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Element>& elements() const { return elements_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }
    int num_dofs() const { return static_cast<int>(dof_nodes_.size()); }

    /// Degree of freedom of a node, or -1 for boundary nodes.
    int dof(int node) const { return node_dof_[node]; }
    int dof_node(int dof) const { return dof_nodes_[dof]; }
    bool is_boundary(int node) const { return node_dof_[node] < 0; }
    double delta(int node) const { return delta_[node]; }
    const std::vector<double>& deltas() const { return delta_; }

    double element_measure(int e) const { return measure_[e]; }
    double element_diameter(int e) const;
    /// Maximum element diameter.
    double mesh_size() const;
    /// Gradients of the barycentric coordinates of element e (local order).
    std::array<Point, 3> barycentric_gradients(int e) const;
    Point vertex(int e, int local) const { return nodes_[elements_[e][local]]; }
    bool touches_boundary(int e) const;

    PairKind classify(int e1, int e2) const;

    /// Element containing x (closest match on shared faces), or -1.
    int locate(Point x) const;

private:
    Domain domain_;
    int subdivisions_;
    std::vector<Point> nodes_;
    std::vector<Element> elements_;
    std::vector<int> node_dof_;
    std::vector<int> dof_nodes_;
    std::vector<double> delta_;
    std::vector<double> measure_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

/// Uniform mesh with maximum element diameter <= 1.5 target_h.
SpacePtr build_mesh(const Domain& domain, double target_h);
/// Nested uniform refinement; each level halves the mesh size.
SpacePtr refine(const FeSpace& space, int levels = 1);

double boundary_distance(const FeSpace& space, Point x);
double ray_exit_distance(const FeSpace& space, Point x, double theta);

struct ExteriorTrace;

/// FE function: coefficients on interior nodes, zero on the boundary and
/// (unless an exterior trace is attached) outside the domain.
struct Field {
    SpacePtr space;
    Eigen::VectorXd coeffs;
    std::shared_ptr<const ExteriorTrace> exterior;

    Field() = default;
    Field(SpacePtr sp, Eigen::VectorXd c) : space(std::move(sp)), coeffs(std::move(c)) {}

    /// Values on all mesh nodes (boundary nodes carry zero).
    Eigen::VectorXd node_values() const;
    /// u_h(x) for x in the closure of the domain; zero outside.
    double operator()(Point x) const;
};

} // namespace anisokernel
