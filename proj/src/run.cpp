#include "anisokernel/run.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "anisokernel/diagnostics.hpp"
#include "anisokernel/error.hpp"
#include "anisokernel/io.hpp"
#include "anisokernel/spectral.hpp"

namespace anisokernel {

namespace {

std::string join(const std::string& dir, const std::string& name)
{
    return dir + "/" + name;
}

PropertyVerdict verdict(std::string name, bool pass, double measured, double threshold,
                        std::string context)
{
    return {std::move(name), pass, measured, threshold, std::move(context)};
}

void print(std::ostream& out, const PropertyVerdict& v)
{
    out << (v.pass ? "PASS " : "FAIL ") << v.name << "  measured=" << io::format(v.measured)
        << " threshold=" << io::format(v.threshold);
    if (!v.context.empty()) {
        out << "  [" << v.context << "]";
    }
    out << '\n';
}

bool all_pass(const std::vector<PropertyVerdict>& vs)
{
    return std::all_of(vs.begin(), vs.end(), [](const PropertyVerdict& v) { return v.pass; });
}

NonlinearitySpec resolved_nonlinearity(const RunConfig& cfg, const GramMatrix& gram,
                                       const Eigen::MatrixXd& mass, double* lambda1 = nullptr)
{
    double l1 = 0.0;
    if (cfg.nonlinearity.needs_lambda1() || lambda1) {
        l1 = eigenpairs(gram, mass, 2, cfg.solver.eigen_tol).values[0];
    }
    if (lambda1) {
        *lambda1 = l1;
    }
    NonlinearitySpec nl = cfg.nonlinearity.resolve(l1);
    nl.validate(cfg.kernel.critical_exponent());
    return nl;
}

/// Nonnegative load: a seeded sum of Gaussian bumps.
std::function<double(Point)> random_load(std::mt19937_64& rng, const Domain& domain)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double diam = domain.diameter();
    std::vector<Point> centers;
    std::vector<double> amps;
    std::vector<double> widths;
    const double lo_x = domain.dim() == 1 ? domain.lo() : -diam, hi_x = domain.dim() == 1 ? domain.hi() : diam;
    for (int k = 0; k < 4; ++k) {
        Point c;
        do {
            c = {lo_x + (hi_x - lo_x) * unit(rng),
                 domain.dim() == 1 ? 0.0 : -diam + 2.0 * diam * unit(rng)};
        } while (!domain.contains(c));
        centers.push_back(c);
        amps.push_back(unit(rng));
        widths.push_back(diam * (0.05 + 0.25 * unit(rng)));
    }
    return [=](Point x) {
        double g = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k) {
            double r = norm(x - centers[k]) / widths[k];
            g += amps[k] * std::exp(-r * r);
        }
        return g;
    };
}

int cmd_assemble(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    SpacePtr space = cfg.mesh();
    GramMatrix gram = assemble_gram(space, cfg.kernel, cfg.quadrature);
    Eigen::MatrixXd mass = assemble_mass(*space);
    io::write_mesh(dir, cfg.hash, *space);
    io::write_triplets(join(dir, "gram.txt"), cfg.hash, gram.matrix);
    io::write_triplets(join(dir, "mass.txt"), cfg.hash, mass);
    StructuralReport sr = check_structural_properties(cfg.kernel);
    std::vector<PropertyVerdict> vs;
    for (const auto* c : {&sr.integrability, &sr.lower_bound, &sr.evenness}) {
        vs.push_back(verdict("kernel " + c->name, c->pass, c->value, 0.0, ""));
    }
    io::write_json(join(dir, "structural.json"), cfg.hash, "verdicts", io::to_json(vs));
    out << "assembled " << gram.matrix.rows() << " dofs, h=" << io::format(space->mesh_size())
        << '\n';
    for (const auto& v : vs) {
        print(out, v);
    }
    return all_pass(vs) ? 0 : 1;
}

int cmd_eigs(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    SpacePtr space = cfg.mesh();
    GramMatrix gram = assemble_gram(space, cfg.kernel, cfg.quadrature);
    Eigen::MatrixXd mass = assemble_mass(*space);
    EigenResult res = eigenpairs(gram, mass, std::min(cfg.solver.eigen_count, space->num_dofs()),
                                 cfg.solver.eigen_tol);
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < res.count(); ++k) {
        rows.push_back({static_cast<double>(k + 1), res.values[k], res.residuals[k]});
        io::write_field(join(dir, "eigenvector_" + std::to_string(k + 1) + ".csv"), cfg.hash,
                        res.field(k));
        out << "lambda_" << k + 1 << " = " << io::format(res.values[k]) << '\n';
    }
    io::write_csv(join(dir, "eigenvalues.csv"), cfg.hash, {"k", "lambda", "residual"}, rows);
    auto vs = spectral_report(res, cfg.kernel.order());
    io::write_json(join(dir, "spectral.json"), cfg.hash, "verdicts", io::to_json(vs));
    for (const auto& v : vs) {
        print(out, v);
    }
    return all_pass(vs) ? 0 : 1;
}

int cmd_solve_linear(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    SpacePtr space = cfg.mesh();
    GramMatrix gram = assemble_gram(space, cfg.kernel, cfg.quadrature);
    const double g = cfg.linear.g;
    MaxPrincipleCase problem{[g](Point) { return g; }, cfg.linear.h, cfg.linear.c};
    Eigen::VectorXd u;
    PropertyVerdict v = max_principle_check(gram, cfg.kernel, problem, kMaxPrincipleTol, &u);
    Field field(space, u);
    io::write_field(join(dir, "solution.csv"), cfg.hash, field);
    io::write_json(join(dir, "solution.json"), cfg.hash, "verdicts", io::to_json({v}));
    out << "solved " << u.size() << " dofs, max=" << io::format(u.size() ? u.maxCoeff() : 0.0)
        << '\n';
    // the sign verdict applies only to nonnegative data
    const bool nonneg = g >= 0.0 && (cfg.linear.h.is_zero() ||
                                     cfg.linear.h.sampled_minimum(space->domain()) >= 0.0);
    if (nonneg) {
        print(out, v);
        return v.pass ? 0 : 1;
    }
    return 0;
}

int cmd_solve_multi(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    SpacePtr space = cfg.mesh();
    GramMatrix gram = assemble_gram(space, cfg.kernel, cfg.quadrature);
    Eigen::MatrixXd mass = assemble_mass(*space);
    NonlinearitySpec nl = resolved_nonlinearity(cfg, gram, mass);
    MountainPassOptions mp;
    mp.iter_cap = cfg.solver.mp_iter_cap;
    mp.path_nodes = cfg.solver.path_nodes;
    mp.tol = cfg.solver.tol;
    SolveReport rep = solve_three(gram, mass, nl, cfg.kernel.order(), cfg.solver.tol, mp);
    const char* names[] = {"u_plus.csv", "u_minus.csv", "u_pass.csv"};
    nlohmann::json sols = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.solutions.size(); ++k) {
        const auto& cp = rep.solutions[k];
        io::write_field(join(dir, names[k]), cfg.hash, cp.field);
        sols.push_back({{"tag", tag_name(cp.tag)},
                        {"energy", cp.energy},
                        {"gradient_norm", cp.gradient_norm},
                        {"iterations", cp.iterations},
                        {"linf", cp.field.coeffs.cwiseAbs().maxCoeff()}});
        out << tag_name(cp.tag) << ": J=" << io::format(cp.energy)
            << " |grad|=" << io::format(cp.gradient_norm) << '\n';
    }
    nlohmann::json report = {{"solutions", sols},
                             {"lambda1", rep.lambda1},
                             {"hopf_plus", rep.hopf_plus},
                             {"hopf_minus", rep.hopf_minus},
                             {"symmetry_defect", rep.symmetry_defect},
                             {"separation", rep.separation},
                             {"verdicts", io::to_json(rep.verdicts)}};
    io::write_json(join(dir, "solve_report.json"), cfg.hash, "report", report);
    for (const auto& v : rep.verdicts) {
        print(out, v);
    }
    return all_pass(rep.verdicts) ? 0 : 1;
}

int cmd_operator_eval(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    const int n = cfg.kernel.dim();
    std::vector<std::vector<double>> rows;
    out << (n == 1 ? "x" : "x,y") << ",value,error\n";
    for (Point x : cfg.operator_eval.points) {
        quad::Estimate e = lk_pointwise_sd(cfg.kernel, cfg.operator_eval.function, x, cfg.op);
        std::vector<double> row{x.x};
        if (n == 2) {
            row.push_back(x.y);
        }
        row.push_back(e.value);
        row.push_back(e.error);
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << io::format(row[c]);
        }
        out << '\n';
        rows.push_back(std::move(row));
    }
    if (n == 1) {
        io::write_csv(join(dir, "operator.csv"), cfg.hash, {"x", "value", "error"}, rows);
    } else {
        io::write_csv(join(dir, "operator.csv"), cfg.hash, {"x", "y", "value", "error"}, rows);
    }
    return 0;
}

int cmd_torsion(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    TorsionBenchmark tb = torsion_benchmark(cfg, 3);
    std::vector<std::vector<double>> rows;
    for (const auto& l : tb.levels) {
        rows.push_back({l.h, l.l2_rel, l.hopf_min, l.holder});
        out << "h=" << io::format(l.h) << " l2_rel=" << io::format(l.l2_rel)
            << " hopf_min=" << io::format(l.hopf_min) << " holder=" << io::format(l.holder) << '\n';
    }
    io::write_csv(join(dir, "torsion.csv"), cfg.hash, {"h", "l2_rel", "hopf_min", "holder_s"}, rows);
    io::write_json(join(dir, "torsion.json"), cfg.hash, "verdicts", io::to_json(tb.verdicts));
    out << "c_T=" << io::format(tb.c_t) << " (error " << io::format(tb.c_t_error) << ")\n";
    for (const auto& v : tb.verdicts) {
        print(out, v);
    }
    return all_pass(tb.verdicts) ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, const std::string& dir, std::ostream& out)
{
    std::vector<PropertyVerdict> vs;
    const double s = cfg.kernel.order();

    StructuralReport sr = check_structural_properties(cfg.kernel);
    for (const auto* c : {&sr.integrability, &sr.lower_bound, &sr.evenness}) {
        vs.push_back(verdict("kernel " + c->name, c->pass, c->value, 0.0, ""));
    }

    // pointwise operator: principal value against second differences
    {
        ClosedFormFunction bump = ClosedFormFunction::gaussian(Point{}, 0.5);
        double worst = 0.0;
        bool pass = true;
        for (double t : {0.0, 0.2, 0.45}) {
            Point x = cfg.kernel.dim() == 1 ? Point{t, 0.0} : Point{t, 0.5 * t};
            auto pv = lk_pointwise_pv(cfg.kernel, bump, x, cfg.op);
            auto sd = lk_pointwise_sd(cfg.kernel, bump, x, cfg.op);
            double diff = std::abs(pv.value - sd.value);
            double allowed = pv.error + sd.error;
            pass = pass && diff <= allowed;
            worst = std::max(worst, allowed > 0.0 ? diff / allowed : diff);
        }
        vs.push_back(verdict("principal value matches second-difference form", pass, worst, 1.0,
                             "Gaussian bump, |pv - sd| / (err_pv + err_sd)"));
    }

    SpacePtr space = cfg.mesh();
    GramMatrix gram = assemble_gram(space, cfg.kernel, cfg.quadrature);
    Eigen::MatrixXd mass = assemble_mass(*space);
    EigenResult eig = eigenpairs(gram, mass, std::min(cfg.solver.eigen_count, space->num_dofs()),
                                 cfg.solver.eigen_tol);
    for (auto& v : spectral_report(eig, s)) {
        vs.push_back(std::move(v));
    }
    const double lambda1 = eig.values[0];

    // maximum principle battery
    {
        Eigen::VectorXd torsion;
        MaxPrincipleCase one{[](Point) { return 1.0; }, ExteriorTrace::zero(), 0.0};
        auto v = max_principle_check(gram, cfg.kernel, one, kMaxPrincipleTol, &torsion);
        v.name += " (g = 1)";
        vs.push_back(v);
        const double q = hopf_quotient_min(Field(space, torsion), s);
        vs.push_back(verdict("Hopf quotient of the torsion solution", q > 0.0, q, 0.0,
                             "min u / delta^s"));

        std::mt19937_64 rng(cfg.verify.seed);
        const double width = 0.25 * space->domain().diameter();
        std::vector<MaxPrincipleCase> cases;
        for (int k = 0; k < cfg.verify.random_loads; ++k) {
            cases.push_back({random_load(rng, space->domain()), ExteriorTrace::zero(), 0.0});
        }
        cases.push_back({[](Point) { return 0.0; }, ExteriorTrace::constant(1.0, width), 0.0});
        cases.push_back({random_load(rng, space->domain()), ExteriorTrace::constant(0.5, width),
                         0.5 * lambda1});
        bool pass = true;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c : cases) {
            auto r = max_principle_check(gram, cfg.kernel, c);
            pass = pass && r.pass;
            worst = std::min(worst, r.measured);
        }
        std::ostringstream ctx;
        ctx << cases.size() << " cases, seed=" << cfg.verify.seed << ", c-shift 0.5 lambda1";
        vs.push_back(verdict("maximum principle (seeded battery)", pass, worst, -kMaxPrincipleTol,
                             ctx.str()));
    }

    // reaction term
    NonlinearitySpec nl = cfg.nonlinearity.resolve(lambda1);
    nl.validate(cfg.kernel.critical_exponent());
    vs.push_back(gradient_check(gram, nl, 20, cfg.verify.seed));

    {
        Energy quadratic(gram, NonlinearitySpec::zero());
        Field zero(space, Eigen::VectorXd::Zero(space->num_dofs()));
        for (BallNorm norm : {BallNorm::X, BallNorm::C0Delta}) {
            ProbeOptions opt;
            opt.norm = norm;
            opt.radius = 0.1;
            opt.samples = cfg.verify.probe_samples;
            opt.seed = cfg.verify.seed;
            auto v = local_min_probe(quadratic, zero, s, opt);
            v.name += " (zero reaction at 0)";
            vs.push_back(v);
        }
    }

    if (nl.kind() == NonlinearitySpec::Kind::Model) {
        nl.validate_below(lambda1);
        MountainPassOptions mp;
        mp.iter_cap = cfg.solver.mp_iter_cap;
        mp.path_nodes = cfg.solver.path_nodes;
        mp.tol = cfg.solver.tol;
        SolveReport rep = solve_three(gram, mass, nl, s, cfg.solver.tol, mp);
        for (auto& v : rep.verdicts) {
            vs.push_back(std::move(v));
        }
    }

    io::write_json(join(dir, "verdicts.json"), cfg.hash, "verdicts", io::to_json(vs));
    for (const auto& v : vs) {
        print(out, v);
    }
    return all_pass(vs) ? 0 : 1;
}

} // namespace

double relative_l2_error(const Field& u, const std::function<double(Point)>& exact, int order,
                         int levels)
{
    const FeSpace& space = *u.space;
    const Eigen::VectorXd values = u.node_values();
    double err = 0.0, ref = 0.0;
    for (int e = 0; e < space.num_elements(); ++e) {
        const auto& el = space.elements()[e];
        for_each_graded_point(space, e, order, levels,
                              [&](Point x, const std::array<double, 3>& b, double w) {
                                  double uh = 0.0;
                                  for (int k = 0; k < space.vertices_per_element(); ++k) {
                                      uh += b[k] * values[el[k]];
                                  }
                                  double ue = exact(x);
                                  err += w * (uh - ue) * (uh - ue);
                                  ref += w * ue * ue;
                              });
    }
    return std::sqrt(err / ref);
}

TorsionBenchmark torsion_benchmark(const RunConfig& cfg, int levels)
{
    const Domain& d = cfg.domain;
    if (d.kind() != Domain::Kind::Interval || d.lo() != -1.0 || d.hi() != 1.0) {
        throw ConfigError("torsion: the benchmark needs the unit ball, i.e. the interval [-1, 1]");
    }
    if (levels < 2) {
        throw ConfigError("torsion: need at least two refinement levels");
    }
    const double s = cfg.kernel.order();
    TorsionBenchmark tb;
    quad::Estimate ct = torsion_constant(cfg.kernel, cfg.op);
    tb.c_t = ct.value;
    tb.c_t_error = ct.error;
    // <u, v>_X counts each pair twice, so Gram u = load(1) solves 2 L_K u = 1
    const double scale = 1.0 / (2.0 * tb.c_t);
    auto exact = [s, scale](Point x) { return scale * std::pow(std::max(0.0, 1.0 - x.x * x.x), s); };
    for (int l = 0; l < levels; ++l) {
        SpacePtr space = cfg.mesh(l);
        GramMatrix gram = assemble_gram(space, cfg.kernel, cfg.quadrature);
        Eigen::VectorXd load = assemble_load(*space, [](Point) { return 1.0; });
        Field u(space, gram.matrix.llt().solve(load));
        tb.levels.push_back({space->mesh_size(), relative_l2_error(u, exact),
                             hopf_quotient_min(u, s), holder_seminorm(u, s)});
    }
    double worst_ratio = 0.0, hopf_ratio_lo = 1.0, hopf_ratio_hi = 1.0, holder_ratio = 0.0;
    bool hopf_positive = true;
    for (std::size_t k = 0; k < tb.levels.size(); ++k) {
        hopf_positive = hopf_positive && tb.levels[k].hopf_min > 0.0;
        if (k == 0) {
            continue;
        }
        const auto &a = tb.levels[k - 1], &b = tb.levels[k];
        worst_ratio = std::max(worst_ratio, b.l2_rel / a.l2_rel);
        double hr = b.hopf_min / a.hopf_min;
        hopf_ratio_lo = std::min(hopf_ratio_lo, hr);
        hopf_ratio_hi = std::max(hopf_ratio_hi, hr);
        holder_ratio = std::max(holder_ratio, b.holder / a.holder);
    }
    std::ostringstream ctx;
    ctx << levels << " nested meshes, s=" << s << ", c_T=" << io::format(tb.c_t);
    tb.verdicts.push_back(verdict("torsion L2 error ratio per refinement", worst_ratio <= 0.8,
                                  worst_ratio, 0.8, ctx.str()));
    const double spread = std::max(hopf_ratio_hi, 1.0 / hopf_ratio_lo);
    tb.verdicts.push_back(verdict("torsion Hopf quotient positive and stable within x2",
                                  hopf_positive && spread <= 2.0, spread, 2.0, ctx.str()));
    tb.verdicts.push_back(verdict("torsion C^s seminorm ratio per refinement", holder_ratio <= 1.5,
                                  holder_ratio, 1.5, ctx.str()));
    return tb;
}

PropertyVerdict gradient_check(const GramMatrix& gram, const NonlinearitySpec& nl, int pairs,
                               std::uint64_t seed, double tol)
{
    Energy energy(gram, nl);
    const Eigen::Index n = gram.matrix.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
        Eigen::VectorXd u(n), v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            u[i] = 0.5 * normal(rng);
            v[i] = normal(rng);
        }
        const double eps = 1e-6;
        const double fd = (energy.value(u + eps * v) - energy.value(u - eps * v)) / (2.0 * eps);
        const double an = functional_gradient(gram, nl, Field(gram.space, u)).dot(v);
        worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(an), std::abs(fd), 1e-300}));
    }
    std::ostringstream ctx;
    ctx << pairs << " seeded pairs, seed=" << seed << ", central step 1e-6";
    return verdict("functional gradient matches finite differences", worst <= tol, worst, tol,
                   ctx.str());
}

int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
            throw ConfigError("unknown command '" + command + "'");
        }
        const std::string dir = io::make_dir(cfg.output_dir);
        if (command == "assemble") {
            return cmd_assemble(cfg, dir, out);
        }
        if (command == "eigs") {
            return cmd_eigs(cfg, dir, out);
        }
        if (command == "solve-linear") {
            return cmd_solve_linear(cfg, dir, out);
        }
        if (command == "solve-multi") {
            return cmd_solve_multi(cfg, dir, out);
        }
        if (command == "operator-eval") {
            return cmd_operator_eval(cfg, dir, out);
        }
        if (command == "torsion") {
            return cmd_torsion(cfg, dir, out);
        }
        return cmd_verify(cfg, dir, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << command << " failed: " << e.what() << '\n';
        return 1;
    }
}

} // namespace anisokernel
