#include <doctest.h>

#include <cmath>
#include <random>

#include "anisokernel/error.hpp"
#include "anisokernel/spectral.hpp"
#include "anisokernel/variational.hpp"

using namespace anisokernel;

namespace {

NonlinearitySpec model(double beta1)
{
    return NonlinearitySpec::model({1.5, 3.0, 0.5 * beta1, 0.5 * beta1, beta1});
}

struct Setup {
    SpacePtr space;
    GramMatrix gram;
    Eigen::MatrixXd mass;
    double lambda1;
};

const Setup& setup()
{
    static const Setup s = [] {
        Setup out;
        out.space = build_mesh(Domain::interval(-1.0, 1.0), 1.0 / 32);
        out.gram = assemble_gram(out.space, KernelSpec(1, 0.25, AngularDensity::constant(1.0)));
        out.mass = assemble_mass(*out.space);
        out.lambda1 = eigenpairs(out.gram, out.mass, 2).values[0];
        return out;
    }();
    return s;
}

} // namespace

TEST_CASE("model nonlinearity: primitive, continuity, growth")
{
    NonlinearitySpec nl = model(9.0);
    CHECK(nl.F(0.0) == 0.0);
    for (double t : {-2.5, -0.7, -0.1, 0.05, 0.6, 1.0, 3.0}) {
        const double e = 1e-6;
        CHECK((nl.F(t + e) - nl.F(t - e)) / (2 * e) == doctest::Approx(nl.f(t)).epsilon(1e-6));
        CHECK(nl.f(-t) == -nl.f(t));
    }
    CHECK(nl.f(1.0 - 1e-12) == doctest::Approx(nl.f(1.0 + 1e-12)).epsilon(1e-10));
    // |f| <= C (1 + |t|^{q-1}) with C = beta1 suffices
    CHECK(nl.growth_constant() <= 9.0 + 1e-12);
    CHECK(nl.growth_exponent() == 3.0);
}

TEST_CASE("model validation")
{
    const double crit = 4.0; // n = 1, s = 1/4
    CHECK_NOTHROW(model(1.0).validate(crit));
    auto at_critical = NonlinearitySpec::model({1.5, 4.0, 0.5, 0.5, 1.0});
    CHECK_THROWS_WITH_AS(at_critical.validate(crit), doctest::Contains("1 < q < 2*_s"), ConfigError);
    CHECK_THROWS_AS(NonlinearitySpec::model({2.5, 3.0, 0.5, 0.5, 1.0}).validate(crit), ConfigError);
    CHECK_THROWS_AS(NonlinearitySpec::model({1.5, 3.0, 0.5, 0.6, 1.0}).validate(crit), ConfigError);
    CHECK_THROWS_AS(model(5.0).validate_below(4.0), ConfigError);
}

TEST_CASE("tabulated nonlinearity has an exact primitive")
{
    NonlinearitySpec nl = NonlinearitySpec::tabulated({-1.0, 0.0, 2.0}, {-1.0, 0.0, 4.0});
    CHECK(nl.F(0.0) == doctest::Approx(0.0));
    CHECK(nl.F(2.0) == doctest::Approx(4.0));
    CHECK(nl.F(-1.0) == doctest::Approx(0.5));
    CHECK(nl.f(1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(NonlinearitySpec::tabulated({0.0, 0.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("truncation clamps the argument")
{
    NonlinearitySpec nl = model(4.0);
    NonlinearitySpec plus = truncate(nl, +1), minus = truncate(nl, -1);
    CHECK(plus.f(-0.5) == 0.0);
    CHECK(plus.F(-0.5) == 0.0);
    CHECK(plus.f(0.5) == nl.f(0.5));
    CHECK(minus.f(0.5) == 0.0);
    CHECK(minus.F(-0.5) == nl.F(-0.5));
}

TEST_CASE("energy of the quadratic part")
{
    const Setup& s = setup();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Eigen::VectorXd u(s.gram.matrix.rows());
    for (auto& x : u) {
        x = n01(rng);
    }
    Field f(s.space, u);
    CHECK(functional_value(s.gram, NonlinearitySpec::zero(), f) ==
          doctest::Approx(0.5 * u.dot(s.gram.matrix * u)).epsilon(1e-14));
    // F(t) = t^2 / 2 with the same quadrature: J = (1/2) u^T (G - M) u
    CHECK(functional_value(s.gram, NonlinearitySpec::linear(1.0), f) ==
          doctest::Approx(0.5 * u.dot((s.gram.matrix - s.mass) * u)).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences")
{
    const Setup& s = setup();
    NonlinearitySpec nl = model(0.9 * s.lambda1);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    const Eigen::Index n = s.gram.matrix.rows();
    for (int k = 0; k < 5; ++k) {
        Eigen::VectorXd u(n), v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            u[i] = 0.5 * n01(rng);
            v[i] = n01(rng);
        }
        const double e = 1e-5;
        double fd = (functional_value(s.gram, nl, Field(s.space, u + e * v)) -
                     functional_value(s.gram, nl, Field(s.space, u - e * v))) /
                    (2 * e);
        double an = functional_gradient(s.gram, nl, Field(s.space, u)).dot(v);
        CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
    }
}

TEST_CASE("descent finds the unique minimizer of a coercive problem")
{
    const Setup& s = setup();
    Energy e(s.gram, NonlinearitySpec::zero());
    Eigen::VectorXd u0 = Eigen::VectorXd::Constant(s.gram.matrix.rows(), 0.3);
    CriticalPoint cp = minimize(e, Field(s.space, u0));
    CHECK(cp.gradient_norm <= 1e-8);
    CHECK(cp.field.coeffs.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(cp.tag == CriticalPoint::Tag::Trivial);
}

TEST_CASE("three solutions for the model problem")
{
    const Setup& s = setup();
    SolveReport r = solve_three(s.gram, s.mass, model(0.9 * s.lambda1), 0.25);
    REQUIRE(r.solutions.size() == 3);
    for (const auto& v : r.verdicts) {
        INFO(v.name << " " << v.measured);
        CHECK(v.pass);
    }
    CHECK(r.solutions[0].tag == CriticalPoint::Tag::MinimizerPositive);
    CHECK(r.solutions[1].tag == CriticalPoint::Tag::MinimizerNegative);
    CHECK(r.solutions[2].energy > r.solutions[0].energy);
    CHECK((r.solutions[0].field.coeffs + r.solutions[1].field.coeffs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("slope above lambda1 is rejected")
{
    const Setup& s = setup();
    CHECK_THROWS_AS(solve_three(s.gram, s.mass, model(1.1 * s.lambda1), 0.25), ConfigError);
}
