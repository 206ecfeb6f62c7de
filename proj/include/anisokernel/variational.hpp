#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anisokernel/assembly.hpp"
#include "anisokernel/verdict.hpp"

namespace anisokernel {

/// Reaction f(t) (independent of x) with primitive F(t) = int_0^t f.
///
/// Model: f(t) = b |t|^{r-2} t + a1 |t|^{q-2} t for |t| <= 1 and beta1 t
/// beyond, with a1 + b = beta1. Tabulated: piecewise linear through
/// (t_k, f_k), extended linearly by the end slopes.
class NonlinearitySpec {
public:
    enum class Kind { Zero, Linear, Model, Tabulated };

    struct ModelParams {
        double r = 1.5;
        double q = 3.0;
        double b = 0.0;
        double a1 = 0.0;
        double beta1 = 0.0;
    };

    static NonlinearitySpec zero();
    static NonlinearitySpec linear(double lambda);
    static NonlinearitySpec model(ModelParams p);
    static NonlinearitySpec tabulated(std::vector<double> t, std::vector<double> f);

    Kind kind() const { return kind_; }
    const ModelParams& params() const { return model_; }
    double lambda() const { return lambda_; }

    double f(double t) const;
    double F(double t) const;
    /// d f / dt (infinite at t = 0 for the model when r < 2)
    double df(double t) const;

    /// Growth exponent q of |f| <= C (1 + |t|^{q-1}).
    double growth_exponent() const;
    /// Smallest C satisfying the growth bound on a sampled t-grid.
    double growth_constant(double t_max = 100.0, int samples = 2001) const;

    /// Optional lower-bound constant c of f(t) >= -c t.
    double lower_c = 0.0;

    /// Restricts the argument to [lo, hi]; see truncate().
    double clamp_lo() const { return lo_; }
    double clamp_hi() const { return hi_; }

    /// Checks the structural constraints; `critical_exponent` is 2n / (n - 2s).
    void validate(double critical_exponent) const;
    /// Checks beta1 < lambda1 (asymptotic slope below the first eigenvalue).
    void validate_below(double lambda1) const;

    friend NonlinearitySpec truncate(const NonlinearitySpec& nl, int sign);

private:
    double raw_f(double t) const;
    double raw_F(double t) const;
    double raw_df(double t) const;

    Kind kind_ = Kind::Zero;
    double lambda_ = 0.0;
    ModelParams model_;
    std::vector<double> t_, f_, prim_;
    double lo_ = -std::numeric_limits<double>::infinity();
    double hi_ = std::numeric_limits<double>::infinity();
};

/// f_+(t) = f(max(t, 0)) for sign > 0, f_-(t) = f(min(t, 0)) for sign < 0.
NonlinearitySpec truncate(const NonlinearitySpec& nl, int sign);

/// J(u) = (1/2) u^T G u - int F(u_h) with the Gram factorization cached.
class Energy {
public:
    Energy(const GramMatrix& gram, NonlinearitySpec nl, int quadrature_order = 4);

    /// Same matrices, different reaction.
    Energy with(NonlinearitySpec nl) const;

    double value(const Eigen::VectorXd& u) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& u) const;

    Eigen::VectorXd solve_gram(const Eigen::VectorXd& g) const;
    /// sqrt(g^T G^{-1} g)
    double dual_norm(const Eigen::VectorXd& g) const;
    double gram_norm(const Eigen::VectorXd& u) const;

    const NonlinearitySpec& nonlinearity() const { return nl_; }
    const SpacePtr& space() const { return shared_->space; }
    const Eigen::MatrixXd& gram() const { return shared_->gram; }
    const ElementQuadrature& quadrature() const { return shared_->quad; }

private:
    struct Shared {
        SpacePtr space;
        Eigen::MatrixXd gram;
        Eigen::LLT<Eigen::MatrixXd> llt;
        ElementQuadrature quad;
    };
    Energy(std::shared_ptr<const Shared> shared, NonlinearitySpec nl);

    std::shared_ptr<const Shared> shared_;
    NonlinearitySpec nl_;
};

double functional_value(const GramMatrix& gram, const NonlinearitySpec& nl, const Field& u);
Eigen::VectorXd functional_gradient(const GramMatrix& gram, const NonlinearitySpec& nl,
                                    const Field& u);

struct CriticalPoint {
    enum class Tag { MinimizerPositive, MinimizerNegative, MountainPass, Trivial, Other };

    Field field;
    double energy = 0.0;
    double gradient_norm = 0.0;
    Tag tag = Tag::Other;
    int iterations = 0;
};

std::string tag_name(CriticalPoint::Tag tag);
/// Tag from the nodal sign pattern (Trivial if the Gram norm is below `zero_tol`).
CriticalPoint::Tag classify(const Energy& energy, const Eigen::VectorXd& u,
                            double zero_tol = 1e-10);

struct DescentOptions {
    double tol = 1e-8;
    int iter_cap = 20000;
};

/// Gram-preconditioned steepest descent with Armijo backtracking.
CriticalPoint minimize(const Energy& energy, const Field& u0, const DescentOptions& opt = {});

struct MountainPassOptions {
    int path_nodes = 21;
    double tol = 1e-8;
    int iter_cap = 4000;
    /// The middle of the initial path is bow * e2.
    double bow = 0.05;
    /// Newton steps are tried once the dual gradient norm falls below this.
    double polish_below = 1e-4;
};

/// Climbing-string search for a saddle between two minimizers.
CriticalPoint mountain_pass(const Energy& energy, const Field& u_minus, const Field& u_plus,
                            const Eigen::VectorXd& e2, const MountainPassOptions& opt = {});

struct SolveReport {
    std::vector<CriticalPoint> solutions; // u+, u-, mountain pass
    double lambda1 = 0.0;
    double hopf_plus = 0.0;
    double hopf_minus = 0.0;
    double symmetry_defect = 0.0;
    double separation = 0.0;
    std::vector<PropertyVerdict> verdicts;
};

/// Minimizers of J_+ and J_- from +-0.1 e1 and a mountain pass between them.
SolveReport solve_three(const GramMatrix& gram, const Eigen::MatrixXd& mass,
                        const NonlinearitySpec& nl, double s, double tol = 1e-8,
                        const MountainPassOptions& mp = {});

} // namespace anisokernel
