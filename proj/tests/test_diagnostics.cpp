#include <doctest.h>

#include <cmath>
#include <random>

#include "anisokernel/diagnostics.hpp"
#include "anisokernel/error.hpp"
#include "anisokernel/spectral.hpp"

using namespace anisokernel;

namespace {

struct Setup {
    SpacePtr space;
    KernelSpec spec{1, 0.25, AngularDensity::constant(1.0)};
    GramMatrix gram;
    Eigen::MatrixXd mass;
};

const Setup& setup()
{
    static const Setup s = [] {
        Setup out;
        out.space = build_mesh(Domain::interval(-1.0, 1.0), 1.0 / 32);
        out.gram = assemble_gram(out.space, out.spec);
        out.mass = assemble_mass(*out.space);
        return out;
    }();
    return s;
}

Field zero_field()
{
    return Field(setup().space, Eigen::VectorXd::Zero(setup().space->num_dofs()));
}

Field torsion()
{
    const Setup& s = setup();
    Eigen::VectorXd b = assemble_load(*s.space, [](Point) { return 1.0; });
    return Field(s.space, s.gram.matrix.llt().solve(b));
}

} // namespace

TEST_CASE("boundary quotients")
{
    CHECK(c0delta_norm(zero_field(), 0.25) == 0.0);
    CHECK(hopf_quotient_min(zero_field(), 0.25) == 0.0);
    Field u = torsion();
    double lo = hopf_quotient_min(u, 0.25), hi = c0delta_norm(u, 0.25);
    CHECK(lo > 0.0);
    CHECK(lo <= hi);
    Field neg(u.space, -u.coeffs);
    CHECK(c0delta_norm(neg, 0.25) == hi);
    CHECK(hopf_quotient_min(neg, 0.25) < 0.0);
}

TEST_CASE("maximum principle")
{
    const Setup& s = setup();
    Eigen::VectorXd u;
    auto zero = max_principle_check(s.gram, s.spec, {[](Point) { return 0.0; }, {}, 0.0}, 1e-3, &u);
    CHECK(zero.pass);
    CHECK(u.cwiseAbs().maxCoeff() == 0.0);

    auto one = max_principle_check(s.gram, s.spec, {[](Point) { return 1.0; }, {}, 0.0}, 1e-3, &u);
    CHECK(one.pass);
    CHECK(u.minCoeff() > 0.0);

    // negative control
    auto minus = max_principle_check(s.gram, s.spec, {[](Point) { return -1.0; }, {}, 0.0}, 1e-3, &u);
    CHECK_FALSE(minus.pass);
    CHECK(u.maxCoeff() < 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit;
    for (int k = 0; k < 5; ++k) {
        double c = unit(rng), w = 0.1 + 0.3 * unit(rng);
        auto g = [c, w](Point x) { return std::exp(-std::pow((x.x - c + 0.5) / w, 2)); };
        CHECK(max_principle_check(s.gram, s.spec, {g, ExteriorTrace::constant(unit(rng), 0.5), 0.0}).pass);
    }
}

TEST_CASE("shifted system must stay positive definite")
{
    const Setup& s = setup();
    double l1 = eigenpairs(s.gram, s.mass, 2).values[0];
    auto g = [](Point) { return 1.0; };
    CHECK(max_principle_check(s.gram, s.spec, {g, {}, 0.5 * l1}).pass);
    CHECK_THROWS_AS(max_principle_check(s.gram, s.spec, {g, {}, -1.5 * l1}), StructuralError);
}

TEST_CASE("Hoelder seminorms")
{
    CHECK(holder_seminorm(zero_field(), 0.5) == 0.0);
    // 1 - |x|^s has C^s seminorm 1, attained by the pair (0, h)
    const Setup& s = setup();
    Eigen::VectorXd c(s.space->num_dofs());
    for (int d = 0; d < c.size(); ++d) {
        c[d] = 1.0 - std::pow(std::abs(s.space->nodes()[s.space->dof_node(d)].x), 0.25);
    }
    Field u(s.space, c);
    CHECK(holder_seminorm(u, 0.25) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(holder_seminorm(u, 0.25) <= 1.0 + 1e-12);
    // monotone in the exponent when all distances are at most one
    Field t = torsion();
    SpacePtr half = build_mesh(Domain::interval(0.0, 1.0), 1.0 / 16);
    Eigen::VectorXd hc = Eigen::VectorXd::LinSpaced(half->num_dofs(), 0.1, 0.9).array().sin();
    Field hv(half, hc);
    CHECK(holder_seminorm(hv, 0.3) <= holder_seminorm(hv, 0.6));
    CHECK(holder_seminorm(t, 0.25, 100) <= holder_seminorm(t, 0.25));
}

TEST_CASE("quotient seminorm separates corner pairs")
{
    Field t = torsion();
    auto q = holder_quotient_seminorm(t, 0.25, 0.125, t.space->mesh_size());
    CHECK(q.away_from_corners > 0.0);
    CHECK(std::isfinite(q.corner_adjacent));
}

TEST_CASE("Linf report")
{
    auto z = linf_report(zero_field(), 0.25);
    CHECK(z.linf == 0.0);
    CHECK(z.lp == 0.0);
    CHECK(z.p == 4.0);
    Field t = torsion();
    Field t2(t.space, 2.0 * t.coeffs);
    auto a = linf_report(t, 0.25), b = linf_report(t2, 0.25);
    CHECK(b.linf == doctest::Approx(2.0 * a.linf).epsilon(1e-15));
    CHECK(b.lp == doctest::Approx(2.0 * a.lp).epsilon(1e-13));
    // constant field 1 on a unit interval: ||1||_p = 1
    SpacePtr sp = build_mesh(Domain::interval(0.0, 1.0), 0.5);
    auto one = linf_report(Field(sp, Eigen::VectorXd::Ones(1)), 0.25);
    CHECK(one.lp == doctest::Approx(std::pow(2.0 * 0.5 / 5.0, 0.25)).epsilon(1e-12));
}

TEST_CASE("local minimizer probe")
{
    const Setup& s = setup();
    Energy e(s.gram, NonlinearitySpec::zero());
    for (BallNorm norm : {BallNorm::X, BallNorm::C0Delta}) {
        ProbeOptions opt;
        opt.norm = norm;
        opt.radius = 0.5;
        auto v = local_min_probe(e, zero_field(), 0.25, opt);
        CHECK(v.pass);
        CHECK(v.measured > 0.0);
        CHECK(v.context.find("seed=1") != std::string::npos);
    }
    // a negative-definite reaction makes 0 a saddle
    Energy unstable = e.with(NonlinearitySpec::linear(1e4));
    ProbeOptions opt;
    opt.radius = 0.1;
    CHECK_FALSE(local_min_probe(unstable, zero_field(), 0.25, opt).pass);
}
