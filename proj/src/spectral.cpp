#include "anisokernel/spectral.hpp"

#include <cmath>
#include <sstream>

#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

void require_spd(const Eigen::MatrixXd& a, const char* name)
{
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * a.cwiseAbs().maxCoeff()) {
        throw StructuralError(std::string(name) + " is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        throw StructuralError(std::string(name) + " is not positive definite");
    }
}

} // namespace

EigenResult eigenpairs(const GramMatrix& gram, const Eigen::MatrixXd& mass, int m, double tol)
{
    const Eigen::Index n = gram.matrix.rows();
    if (mass.rows() != n || mass.cols() != n) {
        throw ConfigError("eigenpairs: Gram and mass sizes differ");
    }
    if (m < 1 || m > n) {
        throw ConfigError("eigenpairs: requested " + std::to_string(m) +
                          " pairs from a problem of size " + std::to_string(n));
    }
    require_spd(gram.matrix, "Gram matrix");
    require_spd(mass, "mass matrix");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        gram.matrix, mass, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigenpairs: eigensolver did not converge", 0.0);
    }
    EigenResult res;
    res.space = gram.space;
    res.values = solver.eigenvalues().head(m);
    res.vectors = solver.eigenvectors().leftCols(m);
    res.residuals.resize(m);
    for (int k = 0; k < m; ++k) {
        Eigen::Index imax;
        res.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        if (res.vectors(imax, k) < 0.0) {
            res.vectors.col(k) *= -1.0;
        }
        Eigen::VectorXd me = mass * res.vectors.col(k);
        // re-normalize in the mass inner product
        const double scale = std::sqrt(res.vectors.col(k).dot(me));
        res.vectors.col(k) /= scale;
        me /= scale;
        res.residuals[k] = (gram.matrix * res.vectors.col(k) - res.values[k] * me).norm() /
                           (std::abs(res.values[k]) * me.norm());
    }
    if (res.residuals.maxCoeff() > tol) {
        std::vector<double> best(res.residuals.data(), res.residuals.data() + m);
        throw ConvergenceError("eigenpairs: residual above tolerance", res.residuals.maxCoeff(),
                               best);
    }
    return res;
}

std::vector<PropertyVerdict> spectral_report(const EigenResult& res, double s, double gap_tol_rel)
{
    if (res.count() < 3) {
        throw ConfigError("spectral_report: needs at least three eigenpairs");
    }
    const FeSpace& space = *res.space;
    std::ostringstream ctx;
    ctx << "h=" << space.mesh_size() << " s=" << s << " dofs=" << space.num_dofs();
    std::vector<PropertyVerdict> out;

    const double l1 = res.values[0];
    const double gap_tol = gap_tol_rel * l1;
    out.push_back({"simple first eigenvalue", res.values[1] - l1 > gap_tol, res.values[1] - l1,
                   gap_tol, ctx.str()});

    Eigen::VectorXd e1 = res.vectors.col(0);
    if (e1.sum() < 0.0) {
        e1 = -e1;
    }
    const double ratio = e1.minCoeff() / e1.maxCoeff();
    out.push_back({"first eigenfunction sign-constant", ratio > 0.0, ratio, 0.0, ctx.str()});

    for (int k = 1; k < res.count(); ++k) {
        const auto col = res.vectors.col(k);
        const double both = std::min(col.maxCoeff(), -col.minCoeff()) / col.cwiseAbs().maxCoeff();
        out.push_back({"eigenfunction " + std::to_string(k + 1) + " changes sign", both > 0.0,
                       both, 0.0, ctx.str()});
    }

    double quotient = std::numeric_limits<double>::infinity();
    for (int d = 0; d < space.num_dofs(); ++d) {
        quotient = std::min(quotient, e1[d] / std::pow(space.delta(space.dof_node(d)), s));
    }
    out.push_back({"first eigenfunction / delta^s bounded below", quotient > 0.0, quotient, 0.0,
                   ctx.str()});
    return out;
}

} // namespace anisokernel
