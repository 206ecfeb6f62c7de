#include "anisokernel/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisokernel/error.hpp"
#include "anisokernel/spectral.hpp"

namespace anisokernel {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

NonlinearitySpec NonlinearitySpec::zero()
{
    return {};
}

NonlinearitySpec NonlinearitySpec::linear(double lambda)
{
    NonlinearitySpec nl;
    nl.kind_ = Kind::Linear;
    nl.lambda_ = lambda;
    return nl;
}

NonlinearitySpec NonlinearitySpec::model(ModelParams p)
{
    NonlinearitySpec nl;
    nl.kind_ = Kind::Model;
    nl.model_ = p;
    return nl;
}

NonlinearitySpec NonlinearitySpec::tabulated(std::vector<double> t, std::vector<double> f)
{
    if (t.size() < 2 || t.size() != f.size()) {
        throw ConfigError("tabulated nonlinearity: need at least two (t, f) pairs");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k] > t[k - 1])) {
            throw ConfigError("tabulated nonlinearity: t values must increase");
        }
    }
    NonlinearitySpec nl;
    nl.kind_ = Kind::Tabulated;
    nl.t_ = std::move(t);
    nl.f_ = std::move(f);
    nl.prim_.assign(nl.t_.size(), 0.0);
    for (std::size_t k = 1; k < nl.t_.size(); ++k) {
        nl.prim_[k] = nl.prim_[k - 1] + 0.5 * (nl.f_[k] + nl.f_[k - 1]) * (nl.t_[k] - nl.t_[k - 1]);
    }
    // shift so that F(0) = 0
    const double at_zero = nl.raw_F(0.0);
    for (double& p : nl.prim_) {
        p -= at_zero;
    }
    return nl;
}

double NonlinearitySpec::raw_f(double t) const
{
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::Linear:
        return lambda_ * t;
    case Kind::Model: {
        const double a = std::abs(t);
        if (a > 1.0) {
            return model_.beta1 * t;
        }
        if (a == 0.0) {
            return 0.0;
        }
        return std::copysign(model_.b * std::pow(a, model_.r - 1.0) +
                                 model_.a1 * std::pow(a, model_.q - 1.0),
                             t);
    }
    case Kind::Tabulated: {
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t k = std::clamp<std::size_t>(it - t_.begin(), 1, t_.size() - 1) - 1;
        double slope = (f_[k + 1] - f_[k]) / (t_[k + 1] - t_[k]);
        return f_[k] + slope * (t - t_[k]);
    }
    }
    return 0.0;
}

double NonlinearitySpec::raw_F(double t) const
{
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::Linear:
        return 0.5 * lambda_ * t * t;
    case Kind::Model: {
        const auto& m = model_;
        const double a = std::abs(t);
        if (a > 1.0) {
            return m.b / m.r + m.a1 / m.q + 0.5 * m.beta1 * (t * t - 1.0);
        }
        return m.b * std::pow(a, m.r) / m.r + m.a1 * std::pow(a, m.q) / m.q;
    }
    case Kind::Tabulated: {
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t k = std::clamp<std::size_t>(it - t_.begin(), 1, t_.size() - 1) - 1;
        double slope = (f_[k + 1] - f_[k]) / (t_[k + 1] - t_[k]);
        double dt = t - t_[k];
        return prim_[k] + f_[k] * dt + 0.5 * slope * dt * dt;
    }
    }
    return 0.0;
}

double NonlinearitySpec::raw_df(double t) const
{
    switch (kind_) {
    case Kind::Zero:
        return 0.0;
    case Kind::Linear:
        return lambda_;
    case Kind::Model: {
        const auto& m = model_;
        const double a = std::abs(t);
        if (a > 1.0) {
            return m.beta1;
        }
        if (a == 0.0) {
            return m.r < 2.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        return m.b * (m.r - 1.0) * std::pow(a, m.r - 2.0) +
               m.a1 * (m.q - 1.0) * std::pow(a, m.q - 2.0);
    }
    case Kind::Tabulated: {
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t k = std::clamp<std::size_t>(it - t_.begin(), 1, t_.size() - 1) - 1;
        return (f_[k + 1] - f_[k]) / (t_[k + 1] - t_[k]);
    }
    }
    return 0.0;
}

double NonlinearitySpec::f(double t) const
{
    return raw_f(std::clamp(t, lo_, hi_));
}

double NonlinearitySpec::F(double t) const
{
    const double c = std::clamp(t, lo_, hi_);
    return raw_F(c) + (t == c ? 0.0 : raw_f(c) * (t - c));
}

double NonlinearitySpec::df(double t) const
{
    if (t < lo_ || t > hi_) {
        return 0.0;
    }
    return raw_df(t);
}

double NonlinearitySpec::growth_exponent() const
{
    return kind_ == Kind::Model ? model_.q : 2.0;
}

double NonlinearitySpec::growth_constant(double t_max, int samples) const
{
    const double q = growth_exponent();
    double c = 0.0;
    for (int i = 0; i < samples; ++i) {
        double t = -t_max + 2.0 * t_max * i / (samples - 1);
        c = std::max(c, std::abs(f(t)) / (1.0 + std::pow(std::abs(t), q - 1.0)));
    }
    return c;
}

void NonlinearitySpec::validate(double critical_exponent) const
{
    if (kind_ != Kind::Model) {
        return;
    }
    const auto& m = model_;
    if (!(m.r > 1.0 && m.r < 2.0)) {
        throw ConfigError("model nonlinearity: need 1 < r < 2, got r = " + num(m.r));
    }
    if (!(m.q > 2.0)) {
        throw ConfigError("model nonlinearity: need q > 2, got q = " + num(m.q));
    }
    if (!(m.q < critical_exponent)) {
        throw ConfigError("model nonlinearity: subcritical requirement 1 < q < 2*_s violated (q = " +
                          num(m.q) + ", 2*_s = 2n/(n-2s) = " + num(critical_exponent) + ")");
    }
    if (!(m.b > 0.0) || !(m.a1 > 0.0) || !(m.beta1 > 0.0)) {
        throw ConfigError("model nonlinearity: b, a1 and beta1 must be positive");
    }
    if (std::abs(m.a1 + m.b - m.beta1) > 1e-12 * std::max(1.0, m.beta1)) {
        throw ConfigError("model nonlinearity: continuity at |t| = 1 needs a1 + b = beta1");
    }
}

void NonlinearitySpec::validate_below(double lambda1) const
{
    if (kind_ == Kind::Model && !(model_.beta1 < lambda1)) {
        throw ConfigError("model nonlinearity: asymptotic slope beta1 = " + num(model_.beta1) +
                          " must lie below lambda1 = " + num(lambda1));
    }
}

NonlinearitySpec truncate(const NonlinearitySpec& nl, int sign)
{
    NonlinearitySpec out = nl;
    if (sign > 0) {
        out.lo_ = std::max(out.lo_, 0.0);
    } else {
        out.hi_ = std::min(out.hi_, 0.0);
    }
    return out;
}

Energy::Energy(const GramMatrix& gram, NonlinearitySpec nl, int quadrature_order)
    : nl_(std::move(nl))
{
    auto shared = std::make_shared<Shared>();
    shared->space = gram.space;
    shared->gram = gram.matrix;
    shared->llt.compute(gram.matrix);
    if (shared->llt.info() != Eigen::Success) {
        throw StructuralError("energy: Gram matrix is not positive definite");
    }
    shared->quad = element_quadrature(*gram.space, quadrature_order);
    shared_ = std::move(shared);
}

Energy::Energy(std::shared_ptr<const Shared> shared, NonlinearitySpec nl)
    : shared_(std::move(shared)), nl_(std::move(nl))
{
}

Energy Energy::with(NonlinearitySpec nl) const
{
    return Energy(shared_, std::move(nl));
}

double Energy::value(const Eigen::VectorXd& u) const
{
    const auto& q = shared_->quad;
    Eigen::VectorXd uq = q.basis * u;
    double reaction = 0.0;
    for (Eigen::Index i = 0; i < uq.size(); ++i) {
        reaction += q.weights[i] * nl_.F(uq[i]);
    }
    return 0.5 * u.dot(shared_->gram * u) - reaction;
}

Eigen::VectorXd Energy::gradient(const Eigen::VectorXd& u) const
{
    const auto& q = shared_->quad;
    Eigen::VectorXd uq = q.basis * u;
    for (Eigen::Index i = 0; i < uq.size(); ++i) {
        uq[i] = q.weights[i] * nl_.f(uq[i]);
    }
    return shared_->gram * u - q.basis.transpose() * uq;
}

Eigen::MatrixXd Energy::hessian(const Eigen::VectorXd& u) const
{
    const auto& q = shared_->quad;
    Eigen::VectorXd uq = q.basis * u;
    for (Eigen::Index i = 0; i < uq.size(); ++i) {
        // f' blows up at t = 0 for sublinear reactions; cap it
        uq[i] = q.weights[i] * std::min(nl_.df(uq[i]), 1e8);
    }
    Eigen::MatrixXd bt = q.basis.transpose();
    return shared_->gram - bt * uq.asDiagonal() * bt.transpose();
}

Eigen::VectorXd Energy::solve_gram(const Eigen::VectorXd& g) const
{
    return shared_->llt.solve(g);
}

double Energy::dual_norm(const Eigen::VectorXd& g) const
{
    return std::sqrt(std::max(0.0, g.dot(solve_gram(g))));
}

double Energy::gram_norm(const Eigen::VectorXd& u) const
{
    return std::sqrt(std::max(0.0, u.dot(shared_->gram * u)));
}

double functional_value(const GramMatrix& gram, const NonlinearitySpec& nl, const Field& u)
{
    return Energy(gram, nl).value(u.coeffs);
}

Eigen::VectorXd functional_gradient(const GramMatrix& gram, const NonlinearitySpec& nl,
                                    const Field& u)
{
    return Energy(gram, nl).gradient(u.coeffs);
}

std::string tag_name(CriticalPoint::Tag tag)
{
    switch (tag) {
    case CriticalPoint::Tag::MinimizerPositive:
        return "minimizer-positive";
    case CriticalPoint::Tag::MinimizerNegative:
        return "minimizer-negative";
    case CriticalPoint::Tag::MountainPass:
        return "mountain-pass";
    case CriticalPoint::Tag::Trivial:
        return "trivial";
    case CriticalPoint::Tag::Other:
        break;
    }
    return "other";
}

CriticalPoint::Tag classify(const Energy& energy, const Eigen::VectorXd& u, double zero_tol)
{
    if (energy.gram_norm(u) <= zero_tol) {
        return CriticalPoint::Tag::Trivial;
    }
    const double scale = u.cwiseAbs().maxCoeff();
    if (u.minCoeff() >= -1e-8 * scale) {
        return CriticalPoint::Tag::MinimizerPositive;
    }
    if (u.maxCoeff() <= 1e-8 * scale) {
        return CriticalPoint::Tag::MinimizerNegative;
    }
    return CriticalPoint::Tag::Other;
}

CriticalPoint minimize(const Energy& energy, const Field& u0, const DescentOptions& opt)
{
    Eigen::VectorXd u = u0.coeffs;
    double J = energy.value(u);
    Eigen::VectorXd g = energy.gradient(u);
    Eigen::VectorXd p = energy.solve_gram(g);
    double dn = std::sqrt(std::max(0.0, g.dot(p)));
    double alpha = 1.0;
    int it = 0;
    for (; it < opt.iter_cap && dn > opt.tol; ++it) {
        double step = alpha;
        Eigen::VectorXd trial;
        double J_trial = J;
        bool accepted = false;
        for (int back = 0; back < 60; ++back) {
            trial = u - step * p;
            J_trial = energy.value(trial);
            if (J_trial <= J - 1e-4 * step * dn * dn) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // the decrease is below rounding; accept if the gradient improves
            trial = u - alpha * p;
            Eigen::VectorXd g_trial = energy.gradient(trial);
            if (energy.dual_norm(g_trial) >= dn) {
                throw ConvergenceError("minimize: line search failed at gradient norm " + num(dn), dn,
                                       to_std(u));
            }
            J_trial = energy.value(trial);
            step = alpha;
        }
        Eigen::VectorXd g_new = energy.gradient(trial);
        Eigen::VectorXd s = trial - u;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        // Barzilai-Borwein step in the Gram metric
        alpha = sy > 0.0 ? std::clamp(s.dot(energy.gram() * s) / sy, 1e-3, 1e3) : 1.0;
        u = std::move(trial);
        J = J_trial;
        g = std::move(g_new);
        p = energy.solve_gram(g);
        dn = std::sqrt(std::max(0.0, g.dot(p)));
        if (!std::isfinite(J) || J < -1e12 || energy.gram_norm(u) > 1e8) {
            throw ConvergenceError(
                "minimize: energy unbounded below along the iterates; the reaction's asymptotic "
                "slope must stay below lambda1",
                dn, to_std(u));
        }
    }
    if (dn > opt.tol) {
        throw ConvergenceError("minimize: iteration cap reached with gradient norm " + num(dn), dn,
                               to_std(u));
    }
    CriticalPoint cp;
    cp.field = Field(energy.space(), u);
    cp.energy = J;
    cp.gradient_norm = dn;
    cp.tag = classify(energy, u);
    cp.iterations = it;
    return cp;
}

namespace {

/// Moves interior nodes so that consecutive nodes are equally spaced in the
/// Gram metric, separately on [first, pin] and [pin, last].
void respline(const Energy& energy, std::vector<Eigen::VectorXd>& path, int pin)
{
    auto redistribute = [&](int a, int b) {
        if (b - a < 2) {
            return;
        }
        std::vector<double> arc{0.0};
        for (int k = a + 1; k <= b; ++k) {
            arc.push_back(arc.back() + energy.gram_norm(path[k] - path[k - 1]));
        }
        if (arc.back() <= 0.0) {
            return;
        }
        std::vector<Eigen::VectorXd> old(path.begin() + a, path.begin() + b + 1);
        for (int k = a + 1; k < b; ++k) {
            double target = arc.back() * (k - a) / (b - a);
            auto it = std::upper_bound(arc.begin(), arc.end(), target);
            int j = std::clamp(static_cast<int>(it - arc.begin()) - 1, 0,
                               static_cast<int>(arc.size()) - 2);
            double len = arc[j + 1] - arc[j];
            double w = len > 0.0 ? (target - arc[j]) / len : 0.0;
            path[k] = (1.0 - w) * old[j] + w * old[j + 1];
        }
    };
    redistribute(0, pin);
    redistribute(pin, static_cast<int>(path.size()) - 1);
}

} // namespace

CriticalPoint mountain_pass(const Energy& energy, const Field& u_minus, const Field& u_plus,
                            const Eigen::VectorXd& e2, const MountainPassOptions& opt)
{
    const int P = std::max(opt.path_nodes, 5);
    const int mid = P / 2;
    const Eigen::VectorXd& a = u_minus.coeffs;
    const Eigen::VectorXd& b = u_plus.coeffs;
    const Eigen::VectorXd m = opt.bow * e2;
    std::vector<Eigen::VectorXd> path(P);
    for (int k = 0; k < P; ++k) {
        if (k <= mid) {
            double t = static_cast<double>(k) / mid;
            path[k] = (1.0 - t) * a + t * m;
        } else {
            double t = static_cast<double>(k - mid) / (P - 1 - mid);
            path[k] = (1.0 - t) * m + t * b;
        }
    }
    const double J_ends = std::max(energy.value(a), energy.value(b));
    const double sep = 1e-6 * std::max({1.0, energy.gram_norm(a), energy.gram_norm(b)});

    auto collapse = [&](const std::string& why) {
        return ConvergenceError("mountain_pass: path collapsed onto an endpoint (" + why +
                                    "); try more path nodes",
                                0.0);
    };

    double climb_step = 1.0;
    double dn = std::numeric_limits<double>::infinity();
    int top = mid;
    int it = 0;
    for (; it < opt.iter_cap; ++it) {
        std::vector<double> J(P);
        for (int k = 0; k < P; ++k) {
            J[k] = energy.value(path[k]);
        }
        top = static_cast<int>(std::max_element(J.begin(), J.end()) - J.begin());
        if (top == 0 || top == P - 1) {
            throw collapse("maximum at a path end");
        }
        if (energy.gram_norm(path[top] - a) <= sep || energy.gram_norm(path[top] - b) <= sep ||
            J[top] <= J_ends) {
            throw collapse("maximum node reached u- or u+");
        }

        Eigen::VectorXd g = energy.gradient(path[top]);
        dn = energy.dual_norm(g);
        if (dn <= opt.tol) {
            break;
        }

        if (dn < opt.polish_below) {
            // Newton on the gradient: the saddle is a nondegenerate zero
            Eigen::VectorXd u = path[top];
            double d = dn;
            for (int n = 0; n < 30 && d > opt.tol; ++n) {
                Eigen::VectorXd step = energy.hessian(u).fullPivLu().solve(-energy.gradient(u));
                Eigen::VectorXd trial = u + step;
                double d_trial = energy.dual_norm(energy.gradient(trial));
                if (!(d_trial < d)) {
                    break;
                }
                u = trial;
                d = d_trial;
            }
            if (d <= opt.tol) {
                path[top] = u;
                dn = d;
                if (energy.gram_norm(u - a) <= sep || energy.gram_norm(u - b) <= sep) {
                    throw collapse("saddle coincides with u- or u+");
                }
                break;
            }
        }

        // climbing node: ascend along the path tangent, descend across it
        Eigen::VectorXd tau = path[top + 1] - path[top - 1];
        const double tn = energy.gram_norm(tau);
        if (tn <= sep) {
            throw collapse("degenerate tangent");
        }
        tau /= tn;
        Eigen::VectorXd p = energy.solve_gram(g);
        const double along = tau.dot(energy.gram() * p);
        Eigen::VectorXd dir = -p + 2.0 * along * tau;
        bool moved = false;
        for (int back = 0; back < 30; ++back) {
            Eigen::VectorXd trial = path[top] + climb_step * dir;
            double d_trial = energy.dual_norm(energy.gradient(trial));
            if (d_trial < dn) {
                path[top] = trial;
                climb_step = std::min(1.0, 1.5 * climb_step);
                moved = true;
                break;
            }
            climb_step *= 0.5;
        }
        if (!moved) {
            path[top] += climb_step * dir;
            climb_step = std::min(1.0, 4.0 * climb_step);
        }

        // remaining nodes relax across the path
        for (int k = 1; k < P - 1; ++k) {
            if (k == top) {
                continue;
            }
            Eigen::VectorXd t = path[k + 1] - path[k - 1];
            double n = energy.gram_norm(t);
            if (n <= 0.0) {
                continue;
            }
            t /= n;
            Eigen::VectorXd pk = energy.solve_gram(energy.gradient(path[k]));
            path[k] -= 0.5 * (pk - t.dot(energy.gram() * pk) * t);
        }
        respline(energy, path, top);
    }
    if (dn > opt.tol) {
        throw ConvergenceError("mountain_pass: gradient norm " + num(dn) +
                                   " above tolerance at the iteration cap",
                               dn, to_std(path[top]));
    }
    CriticalPoint cp;
    cp.field = Field(energy.space(), path[top]);
    cp.energy = energy.value(path[top]);
    cp.gradient_norm = dn;
    cp.tag = CriticalPoint::Tag::MountainPass;
    cp.iterations = it;
    return cp;
}

SolveReport solve_three(const GramMatrix& gram, const Eigen::MatrixXd& mass,
                        const NonlinearitySpec& nl, double s, double tol,
                        const MountainPassOptions& mp)
{
    if (nl.kind() != NonlinearitySpec::Kind::Model) {
        throw ConfigError("solve_three: needs the model nonlinearity");
    }
    const FeSpace& space = *gram.space;
    const int n = space.dim();
    nl.validate(2.0 * n / (n - 2.0 * s));
    EigenResult eig = eigenpairs(gram, mass, 2);
    nl.validate_below(eig.values[0]);

    SolveReport report;
    report.lambda1 = eig.values[0];
    const Eigen::VectorXd e1 = eig.vectors.col(0);
    const Eigen::VectorXd e2 = eig.vectors.col(1);

    Energy J(gram, nl);
    DescentOptions descent;
    descent.tol = tol;
    CriticalPoint plus = minimize(J.with(truncate(nl, +1)), Field(gram.space, 0.1 * e1), descent);
    CriticalPoint minus = minimize(J.with(truncate(nl, -1)), Field(gram.space, -0.1 * e1), descent);
    plus.tag = CriticalPoint::Tag::MinimizerPositive;
    minus.tag = CriticalPoint::Tag::MinimizerNegative;
    // critical for J itself, not only for the truncated functionals
    plus.gradient_norm = J.dual_norm(J.gradient(plus.field.coeffs));
    minus.gradient_norm = J.dual_norm(J.gradient(minus.field.coeffs));
    plus.energy = J.value(plus.field.coeffs);
    minus.energy = J.value(minus.field.coeffs);

    MountainPassOptions mpo = mp;
    mpo.tol = tol;
    CriticalPoint pass = mountain_pass(J, minus.field, plus.field, e2, mpo);

    const Eigen::VectorXd& up = plus.field.coeffs;
    const Eigen::VectorXd& um = minus.field.coeffs;
    const Eigen::VectorXd& ut = pass.field.coeffs;
    std::ostringstream ctx;
    ctx << "h=" << space.mesh_size() << " s=" << s << " lambda1=" << report.lambda1;
    auto& v = report.verdicts;

    const double up_max = up.cwiseAbs().maxCoeff(), um_max = um.cwiseAbs().maxCoeff();
    v.push_back({"u+ nonnegative", up.minCoeff() >= -1e-8 * up_max,
                 up_max > 0 ? up.minCoeff() / up_max : 0.0, -1e-8, ctx.str()});
    v.push_back({"u+ nonzero", up_max > 0.0, up_max, 0.0, ctx.str()});
    v.push_back({"u- nonpositive", um.maxCoeff() <= 1e-8 * um_max,
                 um_max > 0 ? um.maxCoeff() / um_max : 0.0, 1e-8, ctx.str()});
    v.push_back({"u- nonzero", um_max > 0.0, um_max, 0.0, ctx.str()});

    report.separation = std::min({J.gram_norm(ut), J.gram_norm(ut - up), J.gram_norm(ut - um)});
    v.push_back({"mountain pass distinct from 0, u+, u-", report.separation > 1e-3,
                 report.separation, 1e-3, ctx.str()});
    const double worst_grad =
        std::max({plus.gradient_norm, minus.gradient_norm, pass.gradient_norm});
    v.push_back({"gradient norms", worst_grad <= tol, worst_grad, tol, ctx.str()});
    const double level_gap = pass.energy - std::max(plus.energy, minus.energy);
    v.push_back({"pass level above both minima", level_gap >= 0.0, level_gap, 0.0, ctx.str()});
    v.push_back({"J(u+-) < 0", std::max(plus.energy, minus.energy) < 0.0,
                 std::max(plus.energy, minus.energy), 0.0, ctx.str()});
    report.symmetry_defect = (up + um).cwiseAbs().maxCoeff();
    v.push_back({"u+ = -u-", report.symmetry_defect <= 1e-8, report.symmetry_defect, 1e-8,
                 ctx.str()});

    report.hopf_plus = std::numeric_limits<double>::infinity();
    report.hopf_minus = std::numeric_limits<double>::infinity();
    for (int d = 0; d < space.num_dofs(); ++d) {
        const double w = std::pow(space.delta(space.dof_node(d)), s);
        report.hopf_plus = std::min(report.hopf_plus, up[d] / w);
        report.hopf_minus = std::min(report.hopf_minus, -um[d] / w);
    }

    report.solutions = {plus, minus, pass};
    return report;
}

} // namespace anisokernel
