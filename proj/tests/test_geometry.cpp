#include <doctest.h>

#include <cmath>

#include "anisokernel/error.hpp"
#include "anisokernel/geometry.hpp"

using namespace anisokernel;

namespace {

Domain unit_square()
{
    return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

} // namespace

TEST_CASE("interval mesh")
{
    SpacePtr sp = build_mesh(Domain::interval(-1.0, 1.0), 0.25);
    CHECK(sp->num_nodes() == 9);
    CHECK(sp->num_dofs() == 7);
    CHECK(sp->mesh_size() == doctest::Approx(0.25));
    CHECK(sp->is_boundary(0));
    CHECK(sp->delta(4) == doctest::Approx(1.0));
    CHECK(sp->delta(1) == doctest::Approx(0.25));
    SpacePtr fine = refine(*sp, 2);
    CHECK(fine->num_nodes() == 33);
    CHECK(fine->mesh_size() == doctest::Approx(0.0625));
}

TEST_CASE("interval distances")
{
    Domain d = Domain::interval(-1.0, 2.0);
    CHECK(d.boundary_distance({0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(d.boundary_distance({3.0, 0.0}) == 0.0);
    CHECK(d.exterior_distance({3.0, 0.0}) == doctest::Approx(1.0));
    CHECK(d.ray_exit_distance({0.0, 0.0}, 0.0) == doctest::Approx(2.0));
    CHECK(d.ray_exit_distance({0.0, 0.0}, M_PI) == doctest::Approx(1.0));
    CHECK_THROWS_AS(Domain::interval(1.0, 1.0), ConfigError);
}

TEST_CASE("square distances and exits")
{
    Domain d = unit_square();
    CHECK(d.measure() == doctest::Approx(1.0));
    CHECK(d.diameter() == doctest::Approx(std::sqrt(2.0)));
    CHECK(d.boundary_distance({0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(d.boundary_distance({0.2, 0.7}) == doctest::Approx(0.2));
    CHECK(d.ray_exit_distance({0.5, 0.5}, 0.0) == doctest::Approx(0.5));
    CHECK(d.ray_exit_distance({0.5, 0.5}, M_PI / 4) == doctest::Approx(std::sqrt(0.5)));
    CHECK(d.exterior_distance({2.0, 0.5}) == doctest::Approx(1.0));
    CHECK(d.exterior_distance({2.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
    // boundary distance is the minimum ray exit distance for convex domains
    Point x{0.3, 0.6};
    double best = 1e9;
    for (int k = 0; k < 3600; ++k) {
        best = std::min(best, d.ray_exit_distance(x, 2.0 * M_PI * k / 3600.0));
    }
    CHECK(best == doctest::Approx(d.boundary_distance(x)).epsilon(1e-6));
}

TEST_CASE("collar exit distance agrees with bisection on the exterior distance")
{
    Domain tri = Domain::polygon({{0, 0}, {2, 0}, {0.5, 1.5}});
    for (Point x : {Point{0.5, 0.5}, Point{1.5, 0.2}, Point{0.01, 0.01}}) {
        for (int k = 0; k < 24; ++k) {
            double theta = 2.0 * M_PI * (k + 0.3) / 24.0;
            for (double w : {0.1, 0.7}) {
                Point dir{std::cos(theta), std::sin(theta)};
                double lo = tri.ray_exit_distance(x, theta), hi = lo + 10.0;
                for (int it = 0; it < 200; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (tri.exterior_distance(x + mid * dir) < w ? lo : hi) = mid;
                }
                CHECK(tri.collar_exit_distance(x, theta, w) == doctest::Approx(lo).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("polygon validation")
{
    CHECK_THROWS_AS(Domain::polygon({{0, 0}, {1, 0}}), ConfigError);
    CHECK_THROWS_AS(Domain::polygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), ConfigError);
}

TEST_CASE("square mesh")
{
    auto sp = std::make_shared<const FeSpace>(unit_square(), 4);
    CHECK(sp->num_nodes() == 25);
    CHECK(sp->num_dofs() == 9);
    CHECK(sp->num_elements() == 32);
    double area = 0.0;
    for (int e = 0; e < sp->num_elements(); ++e) {
        area += sp->element_measure(e);
    }
    CHECK(area == doctest::Approx(1.0));
    CHECK(sp->locate({0.3, 0.4}) >= 0);
    CHECK(sp->locate({1.3, 0.4}) == -1);
    auto fine = refine(*sp);
    CHECK(fine->mesh_size() == doctest::Approx(0.5 * sp->mesh_size()));
    CHECK(fine->num_nodes() == 81);
}

TEST_CASE("element pair classification")
{
    SpacePtr sp = build_mesh(Domain::interval(0.0, 1.0), 0.25);
    CHECK(sp->classify(1, 1) == PairKind::Identical);
    CHECK(sp->classify(1, 2) == PairKind::SharedFacet);
    CHECK(sp->classify(0, 3) == PairKind::Disjoint);
    auto sq = std::make_shared<const FeSpace>(unit_square(), 2);
    int facet = 0, vertex = 0;
    for (int e = 1; e < sq->num_elements(); ++e) {
        facet += sq->classify(0, e) == PairKind::SharedFacet;
        vertex += sq->classify(0, e) == PairKind::SharedVertex;
    }
    CHECK(facet >= 1);
    CHECK(vertex >= 1);
}

TEST_CASE("fields interpolate linearly and vanish outside")
{
    SpacePtr sp = build_mesh(Domain::interval(-1.0, 1.0), 0.5);
    Eigen::VectorXd c(3);
    c << 1.0, 2.0, 3.0; // nodes -0.5, 0, 0.5
    Field u(sp, c);
    CHECK(u({-0.25, 0.0}) == doctest::Approx(1.5));
    CHECK(u({0.75, 0.0}) == doctest::Approx(1.5));
    CHECK(u({1.5, 0.0}) == 0.0);
    Eigen::VectorXd v = u.node_values();
    CHECK(v.size() == 5);
    CHECK(v[0] == 0.0);
    CHECK(v[2] == 2.0);
}
