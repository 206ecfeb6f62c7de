#pragma once

#include <vector>

#include <Eigen/Dense>

#include "anisokernel/assembly.hpp"
#include "anisokernel/verdict.hpp"

namespace anisokernel {

/// The m smallest generalized eigenpairs of Gram e = lambda Mass e.
struct EigenResult {
    SpacePtr space;
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // columns, Mass-orthonormal, largest entry positive
    Eigen::VectorXd residuals;

    int count() const { return static_cast<int>(values.size()); }
    Field field(int k) const { return Field(space, vectors.col(k)); }
};

/// Residuals are ||G e - lambda M e|| / (lambda ||M e||); any above `tol`
/// raises ConvergenceError.
EigenResult eigenpairs(const GramMatrix& gram, const Eigen::MatrixXd& mass, int m,
                       double tol = 1e-8);

/// Simplicity gap, positivity of e_1, sign change of e_k (k >= 2) and the
/// boundary quotient min e_1 / delta^s.
std::vector<PropertyVerdict> spectral_report(const EigenResult& res, double s,
                                             double gap_tol_rel = 1e-8);

} // namespace anisokernel
