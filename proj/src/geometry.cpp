#include "anisokernel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "anisokernel/assembly.hpp"
#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

// Outward unit normal of the counterclockwise edge a -> b.
Point outward_normal(Point a, Point b)
{
    Point d = b - a;
    double len = norm(d);
    return {d.y / len, -d.x / len};
}

double segment_distance(Point x, Point a, Point b)
{
    Point d = b - a;
    double t = std::clamp(dot(x - a, d) / dot(d, d), 0.0, 1.0);
    return norm(x - (a + t * d));
}

} // namespace

Domain Domain::interval(double lo, double hi)
{
    if (!(hi > lo)) {
        throw ConfigError("interval domain: need lo < hi");
    }
    Domain d;
    d.kind_ = Kind::Interval;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
}

Domain Domain::polygon(std::vector<Point> vertices)
{
    const std::size_t n = vertices.size();
    if (n < 3) {
        throw ConfigError("polygon domain: need at least three vertices");
    }
    for (std::size_t i = 0; i < n; ++i) {
        Point a = vertices[i], b = vertices[(i + 1) % n], c = vertices[(i + 2) % n];
        if (!(cross(b - a, c - b) > 0.0)) {
            throw ConfigError(
                "polygon domain: vertices must be counterclockwise and strictly convex");
        }
    }
    Domain d;
    d.kind_ = Kind::Polygon;
    d.vertices_ = std::move(vertices);
    return d;
}

double Domain::measure() const
{
    if (kind_ == Kind::Interval) {
        return hi_ - lo_;
    }
    double area = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        area += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    }
    return 0.5 * area;
}

double Domain::diameter() const
{
    if (kind_ == Kind::Interval) {
        return hi_ - lo_;
    }
    double d = 0.0;
    for (Point a : vertices_) {
        for (Point b : vertices_) {
            d = std::max(d, norm(a - b));
        }
    }
    return d;
}

bool Domain::contains(Point x) const
{
    if (kind_ == Kind::Interval) {
        return x.x >= lo_ && x.x <= hi_;
    }
    const double tol = 1e-14 * diameter();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        Point a = vertices_[i], b = vertices_[(i + 1) % vertices_.size()];
        if (dot(outward_normal(a, b), x - a) > tol) {
            return false;
        }
    }
    return true;
}

double Domain::boundary_distance(Point x) const
{
    if (kind_ == Kind::Interval) {
        return std::max(0.0, std::min(x.x - lo_, hi_ - x.x));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        Point a = vertices_[i], b = vertices_[(i + 1) % vertices_.size()];
        best = std::min(best, dot(outward_normal(a, b), a - x));
    }
    return std::max(0.0, best);
}

double Domain::exterior_distance(Point x) const
{
    if (kind_ == Kind::Interval) {
        return std::max({0.0, lo_ - x.x, x.x - hi_});
    }
    if (contains(x)) {
        return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        best = std::min(best,
                        segment_distance(x, vertices_[i], vertices_[(i + 1) % vertices_.size()]));
    }
    return best;
}

double Domain::ray_exit_distance(Point x, double theta) const
{
    if (kind_ == Kind::Interval) {
        return std::cos(theta) > 0.0 ? hi_ - x.x : x.x - lo_;
    }
    Point dir = direction(theta);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        Point a = vertices_[i], b = vertices_[(i + 1) % vertices_.size()];
        Point nrm = outward_normal(a, b);
        double speed = dot(nrm, dir);
        if (speed > 0.0) {
            best = std::min(best, dot(nrm, a - x) / speed);
        }
    }
    return best;
}

double Domain::collar_exit_distance(Point x, double theta, double width) const
{
    if (kind_ == Kind::Interval) {
        return std::cos(theta) > 0.0 ? hi_ + width - x.x : x.x - (lo_ - width);
    }
    // The collar of a convex polygon is convex and bounded by offset edges and
    // vertex arcs; every ray hit on those lies in it, so the exit is the farthest.
    Point dir = direction(theta);
    double best = ray_exit_distance(x, theta);
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        Point a = vertices_[i], b = vertices_[(i + 1) % vertices_.size()];
        Point nrm = outward_normal(a, b);
        double speed = dot(nrm, dir);
        if (speed > 0.0) {
            double r = (dot(nrm, a - x) + width) / speed;
            Point p = x + r * dir - width * nrm;
            double along = dot(p - a, b - a) / dot(b - a, b - a);
            if (along >= 0.0 && along <= 1.0) {
                best = std::max(best, r);
            }
        }
        // |x + r dir - a|^2 = width^2
        Point d = x - a;
        double half_b = dot(d, dir), c = dot(d, d) - width * width;
        double disc = half_b * half_b - c;
        if (disc >= 0.0) {
            best = std::max(best, -half_b + std::sqrt(disc));
        }
    }
    return best;
}

std::vector<double> Domain::vertex_angles(Point x) const
{
    std::vector<double> angles;
    for (Point v : vertices_) {
        angles.push_back(polar_angle(v - x));
    }
    return angles;
}

FeSpace::FeSpace(Domain domain, int subdivisions)
    : domain_(std::move(domain)), subdivisions_(subdivisions)
{
    if (subdivisions < 1) {
        throw ConfigError("mesh: need at least one subdivision");
    }
    const int m = subdivisions;
    if (domain_.kind() == Domain::Kind::Interval) {
        for (int i = 0; i <= m; ++i) {
            double t = static_cast<double>(i) / m;
            nodes_.push_back({(1.0 - t) * domain_.lo() + t * domain_.hi(), 0.0});
        }
        for (int i = 0; i < m; ++i) {
            elements_.push_back({i, i + 1, -1});
        }
    } else {
        // Fan triangulation from vertex 0, each fan triangle split into m^2
        // congruent triangles. Shared fan edges get identical node sets.
        const auto& v = domain_.vertices();
        const double quantum = 1e-10 * domain_.diameter();
        std::map<std::pair<long long, long long>, int> index;
        auto node_id = [&](Point p) {
            std::pair<long long, long long> key{std::llround(p.x / quantum),
                                                std::llround(p.y / quantum)};
            auto [it, inserted] = index.try_emplace(key, static_cast<int>(nodes_.size()));
            if (inserted) {
                nodes_.push_back(p);
            }
            return it->second;
        };
        for (std::size_t f = 1; f + 1 < v.size(); ++f) {
            Point a = v[0], b = v[f], c = v[f + 1];
            std::vector<std::vector<int>> grid(m + 1);
            for (int i = 0; i <= m; ++i) {
                for (int j = 0; i + j <= m; ++j) {
                    Point p = a + (static_cast<double>(i) / m) * (b - a) +
                              (static_cast<double>(j) / m) * (c - a);
                    grid[i].push_back(node_id(p));
                }
            }
            for (int i = 0; i < m; ++i) {
                for (int j = 0; i + j < m; ++j) {
                    elements_.push_back({grid[i][j], grid[i + 1][j], grid[i][j + 1]});
                    if (i + j + 2 <= m) {
                        elements_.push_back({grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
                    }
                }
            }
        }
    }

    const double tol = 1e-12 * domain_.diameter();
    node_dof_.assign(nodes_.size(), -1);
    delta_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        double d = domain_.boundary_distance(nodes_[i]);
        delta_[i] = d <= tol ? 0.0 : d;
        if (delta_[i] > 0.0) {
            node_dof_[i] = static_cast<int>(dof_nodes_.size());
            dof_nodes_.push_back(static_cast<int>(i));
        }
    }

    measure_.resize(elements_.size());
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto& el = elements_[e];
        if (dim() == 1) {
            measure_[e] = nodes_[el[1]].x - nodes_[el[0]].x;
        } else {
            measure_[e] = 0.5 * cross(nodes_[el[1]] - nodes_[el[0]], nodes_[el[2]] - nodes_[el[0]]);
        }
        if (!(measure_[e] > 0.0)) {
            throw ConfigError("mesh: degenerate element");
        }
    }
}

double FeSpace::element_diameter(int e) const
{
    const auto& el = elements_[e];
    if (dim() == 1) {
        return measure_[e];
    }
    return std::max({norm(nodes_[el[0]] - nodes_[el[1]]), norm(nodes_[el[1]] - nodes_[el[2]]),
                     norm(nodes_[el[2]] - nodes_[el[0]])});
}

double FeSpace::mesh_size() const
{
    double h = 0.0;
    for (int e = 0; e < num_elements(); ++e) {
        h = std::max(h, element_diameter(e));
    }
    return h;
}

std::array<Point, 3> FeSpace::barycentric_gradients(int e) const
{
    const auto& el = elements_[e];
    if (dim() == 1) {
        double len = measure_[e];
        return {Point{-1.0 / len, 0.0}, Point{1.0 / len, 0.0}, Point{}};
    }
    std::array<Point, 3> g;
    const double area2 = 2.0 * measure_[e];
    for (int i = 0; i < 3; ++i) {
        Point p1 = nodes_[el[(i + 1) % 3]], p2 = nodes_[el[(i + 2) % 3]];
        g[i] = {(p1.y - p2.y) / area2, (p2.x - p1.x) / area2};
    }
    return g;
}

bool FeSpace::touches_boundary(int e) const
{
    for (int k = 0; k < vertices_per_element(); ++k) {
        if (is_boundary(elements_[e][k])) {
            return true;
        }
    }
    return false;
}

PairKind FeSpace::classify(int e1, int e2) const
{
    const int nv = vertices_per_element();
    int shared = 0;
    for (int a = 0; a < nv; ++a) {
        for (int b = 0; b < nv; ++b) {
            shared += elements_[e1][a] == elements_[e2][b];
        }
    }
    if (shared == nv) {
        return PairKind::Identical;
    }
    if (shared == nv - 1) {
        return PairKind::SharedFacet;
    }
    return shared == 0 ? PairKind::Disjoint : PairKind::SharedVertex;
}

int FeSpace::locate(Point x) const
{
    if (dim() == 1) {
        if (x.x < nodes_.front().x || x.x > nodes_.back().x) {
            return -1;
        }
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x.x,
                                   [](double v, Point p) { return v < p.x; });
        int e = static_cast<int>(it - nodes_.begin()) - 1;
        return std::clamp(e, 0, num_elements() - 1);
    }
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < num_elements(); ++e) {
        auto g = barycentric_gradients(e);
        Point p0 = vertex(e, 0);
        double l1 = dot(g[1], x - p0), l2 = dot(g[2], x - p0);
        double worst = std::min({1.0 - l1 - l2, l1, l2});
        if (worst > best_min) {
            best_min = worst;
            best = e;
        }
    }
    return best_min >= -1e-12 ? best : -1;
}

SpacePtr build_mesh(const Domain& domain, double target_h)
{
    if (!(target_h > 0.0) || target_h >= domain.diameter()) {
        throw ConfigError("mesh: target h must be positive and below the domain diameter");
    }
    int m = 1;
    if (domain.kind() == Domain::Kind::Interval) {
        m = static_cast<int>(std::ceil(domain.measure() / target_h - 1e-9));
    } else {
        const auto& v = domain.vertices();
        double fan_diameter = 0.0;
        for (std::size_t f = 1; f + 1 < v.size(); ++f) {
            fan_diameter = std::max({fan_diameter, norm(v[f] - v[0]), norm(v[f + 1] - v[0]),
                                     norm(v[f + 1] - v[f])});
        }
        m = std::max(1, static_cast<int>(std::ceil(fan_diameter / (1.5 * target_h) - 1e-9)));
    }
    return std::make_shared<const FeSpace>(domain, m);
}

SpacePtr refine(const FeSpace& space, int levels)
{
    return std::make_shared<const FeSpace>(space.domain(), space.subdivisions() << levels);
}

double boundary_distance(const FeSpace& space, Point x)
{
    return space.domain().boundary_distance(x);
}

double ray_exit_distance(const FeSpace& space, Point x, double theta)
{
    return space.domain().ray_exit_distance(x, theta);
}

Eigen::VectorXd Field::node_values() const
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(space->num_nodes());
    for (int d = 0; d < space->num_dofs(); ++d) {
        v[space->dof_node(d)] = coeffs[d];
    }
    return v;
}

double Field::operator()(Point x) const
{
    int e = space->locate(x);
    if (e < 0) {
        return exterior ? exterior->value(space->domain(), x) : 0.0;
    }
    auto g = space->barycentric_gradients(e);
    Point p0 = space->vertex(e, 0);
    const auto& el = space->elements()[e];
    double result = 0.0;
    double lam_rest = 1.0;
    for (int k = 1; k < space->vertices_per_element(); ++k) {
        double lam = dot(g[k], x - p0);
        lam_rest -= lam;
        int d = space->dof(el[k]);
        if (d >= 0) {
            result += lam * coeffs[d];
        }
    }
    int d0 = space->dof(el[0]);
    if (d0 >= 0) {
        result += lam_rest * coeffs[d0];
    }
    return result;
}

} // namespace anisokernel
