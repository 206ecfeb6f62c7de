#include <doctest.h>

#include <cmath>

#include "anisokernel/error.hpp"
#include "anisokernel/spectral.hpp"

using namespace anisokernel;

namespace {

struct Problem {
    GramMatrix gram;
    Eigen::MatrixXd mass;
};

Problem interval_problem(double h, double s = 0.25)
{
    SpacePtr sp = build_mesh(Domain::interval(-1.0, 1.0), h);
    return {assemble_gram(sp, KernelSpec(1, s, AngularDensity::constant(1.0))), assemble_mass(*sp)};
}

} // namespace

TEST_CASE("eigenpairs are mass-orthonormal with small residuals")
{
    Problem p = interval_problem(1.0 / 32);
    EigenResult r = eigenpairs(p.gram, p.mass, 5);
    REQUIRE(r.count() == 5);
    Eigen::MatrixXd gram = r.vectors.transpose() * p.mass * r.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.residuals.maxCoeff() < 1e-10);
    for (int k = 1; k < 5; ++k) {
        CHECK(r.values[k] > r.values[k - 1]);
    }
    // Rayleigh quotient of e_1 equals lambda_1
    Eigen::VectorXd e = r.vectors.col(0);
    CHECK(e.dot(p.gram.matrix * e) == doctest::Approx(r.values[0]).epsilon(1e-12));
}

TEST_CASE("spectral verdicts pass on the interval")
{
    Problem p = interval_problem(1.0 / 32);
    EigenResult r = eigenpairs(p.gram, p.mass, 4);
    for (const auto& v : spectral_report(r, 0.25)) {
        INFO(v.name);
        CHECK(v.pass);
    }
    // verdicts are invariant under flipping eigenvector signs
    EigenResult flipped = r;
    flipped.vectors *= -1.0;
    auto a = spectral_report(r, 0.25), b = spectral_report(flipped, 0.25);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pass == b[i].pass);
    }
}

TEST_CASE("nested refinement lowers eigenvalues")
{
    Problem c = interval_problem(1.0 / 16), f = interval_problem(1.0 / 32);
    EigenResult rc = eigenpairs(c.gram, c.mass, 3), rf = eigenpairs(f.gram, f.mass, 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(rf.values[k] <= rc.values[k] * (1.0 + 1e-12));
    }
}

TEST_CASE("invalid input")
{
    Problem p = interval_problem(0.25);
    CHECK_THROWS_AS(eigenpairs(p.gram, p.mass, 0), ConfigError);
    CHECK_THROWS_AS(eigenpairs(p.gram, p.mass, 100), ConfigError);
    Eigen::MatrixXd bad = -p.mass;
    CHECK_THROWS_AS(eigenpairs(p.gram, bad, 2), StructuralError);
    Eigen::MatrixXd small = p.mass.topLeftCorner(3, 3);
    CHECK_THROWS_AS(eigenpairs(p.gram, small, 2), ConfigError);
}

TEST_CASE("two-dimensional anisotropic spectrum")
{
    auto sp = std::make_shared<const FeSpace>(Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 6);
    KernelSpec k(2, 0.4, AngularDensity::tabulate(
                             [](double t) { return 1.0 + 0.5 * std::cos(2.0 * t); }, 360, true));
    GramMatrix g = assemble_gram(sp, k);
    EigenResult r = eigenpairs(g, assemble_mass(*sp), 3);
    CHECK(r.values[0] > 0.0);
    for (const auto& v : spectral_report(r, 0.4)) {
        INFO(v.name);
        CHECK(v.pass);
    }
}
