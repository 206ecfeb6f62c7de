#include <doctest.h>

#include <cmath>

#include "anisokernel/error.hpp"
#include "anisokernel/kernel.hpp"
#include "oracles.hpp"

using namespace anisokernel;

namespace {

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

AngularDensity cos2(int count = 4096)
{
    return AngularDensity::tabulate([](double t) { return 1.0 + 0.5 * std::cos(2.0 * t); }, count,
                                    true);
}

} // namespace

TEST_CASE("kernel values follow a(theta) |y|^{-n-2s}")
{
    KernelSpec k1(1, 0.25, AngularDensity::constant(2.0));
    CHECK(kernel_eval(k1, {0.5, 0.0}) == doctest::Approx(2.0 * std::pow(0.5, -1.5)).epsilon(1e-14));
    CHECK(kernel_eval(k1, {-0.5, 0.0}) == kernel_eval(k1, {0.5, 0.0}));

    KernelSpec k2(2, 0.3, cos2());
    double expected = (1.0 + 0.5 * std::cos(M_PI)) * std::pow(2.0, -2.6);
    CHECK(rel(kernel_eval(k2, {0.0, 2.0}), expected) < 1e-6);
    CHECK_THROWS_AS(kernel_eval(k2, {0.0, 0.0}), DomainError);
}

TEST_CASE("kernel spec rejects inadmissible parameters")
{
    CHECK_THROWS_AS(KernelSpec(1, 0.8, AngularDensity::constant(1.0)), ConfigError);
    CHECK_THROWS_AS(KernelSpec(2, 1.0, AngularDensity::constant(1.0)), ConfigError);
    CHECK_THROWS_AS(AngularDensity::constant(0.0), ConfigError);
    CHECK_THROWS_AS(AngularDensity::samples({1.0, 2.0, 3.0}, true), ConfigError);
    CHECK_THROWS_AS(AngularDensity::sectors({0.0, 1.0}, {1.0}, false), ConfigError);
}

TEST_CASE("structural properties hold for admissible kernels")
{
    KernelSpec iso(2, 0.5, AngularDensity::constant(1.0));
    auto r = check_structural_properties(iso);
    CHECK(r.all_pass());
    // int min(|y|^2, 1) |y|^{-2-2s} over R^2 = 2 pi (1 / (2 - 2s) + 1 / (2s))
    CHECK(rel(r.integrability.value, 2.0 * M_PI * 2.0) < 1e-12);

    KernelSpec aniso(2, 0.3, cos2(720));
    auto ra = check_structural_properties(aniso);
    CHECK(ra.all_pass());
    CHECK(ra.lower_bound.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("one-dimensional multiplier matches the closed form")
{
    KernelSpec k(1, 0.25, AngularDensity::constant(1.0));
    for (double xi : {0.5, 1.0, 3.0}) {
        auto e = multiplier_eval(k, {xi, 0.0});
        CHECK(rel(e.value, oracle::multiplier_1d(xi, 0.25)) < 1e-9);
        CHECK(e.error < 1e-8 * e.value);
    }
}

TEST_CASE("two-dimensional multiplier matches closed forms")
{
    for (double s : {0.3, 0.5}) {
        KernelSpec k(2, s, AngularDensity::constant(1.0));
        for (Point xi : {Point{1.0, 0.0}, Point{0.6, 0.8}, Point{-2.0, 1.0}}) {
            CHECK(rel(multiplier_eval(k, xi).value, oracle::multiplier_2d(norm(xi), s)) < 1e-8);
        }
    }
    // s = 1/2, a = 1 + cos(2 theta) / 2, xi = e_1:
    // (pi / 2) int a |cos theta| = (pi / 2)(4 + 2/3)
    KernelSpec k(2, 0.5, cos2());
    CHECK(rel(multiplier_eval(k, {1.0, 0.0}).value, 7.0 * M_PI / 3.0) < 1e-5);
}

TEST_CASE("multiplier vanishes at zero and is even")
{
    KernelSpec k(2, 0.4, cos2(720));
    CHECK(multiplier_eval(k, {0.0, 0.0}).value == 0.0);
    CHECK(rel(multiplier_eval(k, {0.3, -0.7}).value, multiplier_eval(k, {-0.3, 0.7}).value) < 1e-10);
}
