#include "anisokernel/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "anisokernel/error.hpp"

namespace anisokernel {

namespace {

using nlohmann::json;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

Point parse_point(const json& j, int n)
{
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw ConfigError("point " + j.dump() + " must have " + std::to_string(n) + " coordinates");
    }
    return n == 1 ? Point{j[0].get<double>(), 0.0} : Point{j[0].get<double>(), j[1].get<double>()};
}

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw ConfigError(what);
    }
}

Domain parse_domain(const json& j, int n)
{
    std::string kind = get_or<std::string>(j, "kind", n == 1 ? "interval" : "polygon");
    if (kind == "interval") {
        require(n == 1, "domain: an interval needs n = 1");
        return Domain::interval(get_or(j, "lo", -1.0), get_or(j, "hi", 1.0));
    }
    if (kind == "polygon") {
        require(n == 2, "domain: a polygon needs n = 2");
        require(j.contains("vertices"), "domain: polygon needs 'vertices'");
        std::vector<Point> v;
        for (const auto& p : j.at("vertices")) {
            v.push_back(parse_point(p, 2));
        }
        return Domain::polygon(std::move(v));
    }
    throw ConfigError("domain: unknown kind '" + kind + "'");
}

NonlinearityConfig parse_nonlinearity(const json& j)
{
    NonlinearityConfig c;
    c.kind = get_or<std::string>(j, "kind", "zero");
    if (c.kind == "zero") {
        return c;
    }
    if (c.kind == "linear") {
        c.lambda = get_or(j, "lambda", 0.0);
        return c;
    }
    if (c.kind == "model") {
        c.model.r = get_or(j, "r", 1.5);
        c.model.q = get_or(j, "q", 3.0);
        if (j.contains("beta1_over_lambda1")) {
            c.beta1_over_lambda1 = j.at("beta1_over_lambda1").get<double>();
            c.b_fraction = get_or(j, "b_fraction", 0.5);
            require(*c.beta1_over_lambda1 > 0.0, "nonlinearity: beta1_over_lambda1 must be positive");
            require(c.b_fraction > 0.0 && c.b_fraction < 1.0,
                    "nonlinearity: b_fraction must lie in (0, 1)");
        } else {
            c.model.beta1 = get_or(j, "beta1", 0.0);
            c.model.b = get_or(j, "b", 0.5 * c.model.beta1);
            c.model.a1 = get_or(j, "a1", c.model.beta1 - c.model.b);
        }
        return c;
    }
    if (c.kind == "tabulated") {
        c.t = get_or<std::vector<double>>(j, "t", {});
        c.f = get_or<std::vector<double>>(j, "f", {});
        return c;
    }
    throw ConfigError("nonlinearity: unknown kind '" + c.kind + "'");
}

} // namespace

NonlinearitySpec NonlinearityConfig::resolve(double lambda1) const
{
    if (kind == "linear") {
        return NonlinearitySpec::linear(lambda);
    }
    if (kind == "tabulated") {
        return NonlinearitySpec::tabulated(t, f);
    }
    if (kind == "model") {
        NonlinearitySpec::ModelParams p = model;
        if (beta1_over_lambda1) {
            p.beta1 = *beta1_over_lambda1 * lambda1;
            p.b = b_fraction * p.beta1;
            p.a1 = p.beta1 - p.b;
        }
        return NonlinearitySpec::model(p);
    }
    return NonlinearitySpec::zero();
}

SpacePtr RunConfig::mesh(int extra_refinements) const
{
    SpacePtr space = build_mesh(domain, target_h);
    const int levels = refine + extra_refinements;
    return levels > 0 ? anisokernel::refine(*space, levels) : space;
}

std::uint64_t config_hash(const nlohmann::json& j)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_string(std::uint64_t h)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

AngularDensity parse_density(const json& j)
{
    if (j.is_number()) {
        return AngularDensity::constant(j.get<double>());
    }
    std::string kind = get_or<std::string>(j, "kind", "constant");
    const bool even = get_or(j, "even", true);
    const json data = j.contains("data") ? j.at("data") : json(1.0);
    if (kind == "constant") {
        return AngularDensity::constant(data.get<double>());
    }
    if (kind == "sectors") {
        return AngularDensity::sectors(data.at("starts").get<std::vector<double>>(),
                                       data.at("values").get<std::vector<double>>(), even);
    }
    if (kind == "samples") {
        return AngularDensity::samples(data.get<std::vector<double>>(), even);
    }
    if (kind == "cosine") {
        // mean + amplitude cos(frequency theta), tabulated
        double mean = get_or(data, "mean", 1.0);
        double amp = get_or(data, "amplitude", 0.0);
        int freq = get_or(data, "frequency", 2);
        int count = get_or(data, "count", 720);
        require(freq % 2 == 0 || !even, "density: an odd cosine frequency is not even");
        return AngularDensity::tabulate(
            [=](double t) { return mean + amp * std::cos(freq * t); }, count, even);
    }
    throw ConfigError("density: unknown kind '" + kind + "'");
}

ClosedFormFunction parse_function(const json& j, int n)
{
    std::string kind = get_or<std::string>(j, "kind", "gaussian");
    if (kind == "constant") {
        return ClosedFormFunction::constant(get_or(j, "value", 1.0));
    }
    if (kind == "gaussian") {
        Point c = j.contains("center") ? parse_point(j.at("center"), n) : Point{};
        return ClosedFormFunction::gaussian(c, get_or(j, "width", 1.0), get_or(j, "amplitude", 1.0));
    }
    if (kind == "torsion") {
        return ClosedFormFunction::torsion(get_or(j, "exponent", 0.5), get_or(j, "radius", 1.0));
    }
    if (kind == "polynomial_cutoff") {
        auto c = get_or<std::vector<double>>(j, "coeffs", {1.0});
        require(c.size() <= 6, "function: at most 6 polynomial coefficients");
        std::array<double, 6> coeffs{};
        std::copy(c.begin(), c.end(), coeffs.begin());
        Point center = j.contains("center") ? parse_point(j.at("center"), n) : Point{};
        return ClosedFormFunction::polynomial_cutoff(coeffs, center, get_or(j, "radius", 1.0));
    }
    if (kind == "combination") {
        std::vector<double> w;
        std::vector<ClosedFormFunction> terms;
        for (const auto& t : j.at("terms")) {
            w.push_back(get_or(t, "weight", 1.0));
            terms.push_back(parse_function(t.at("function"), n));
        }
        return ClosedFormFunction::combination(std::move(w), std::move(terms));
    }
    throw ConfigError("function: unknown kind '" + kind + "'");
}

ExteriorTrace parse_exterior(const json& j, int n)
{
    std::string kind = get_or<std::string>(j, "kind", "zero");
    if (kind == "zero") {
        return ExteriorTrace::zero();
    }
    const double width = get_or(j, "width", 0.0);
    if (kind == "constant") {
        return ExteriorTrace::constant(get_or(j, "value", 0.0), width);
    }
    if (kind == "gaussian") {
        Point c = j.contains("center") ? parse_point(j.at("center"), n) : Point{};
        return ExteriorTrace::gaussian(get_or(j, "amplitude", 1.0), c, get_or(j, "length", 1.0),
                                       width);
    }
    if (kind == "sampled") {
        return ExteriorTrace::sampled(get_or<std::vector<double>>(j, "samples", {}), width);
    }
    throw ConfigError("exterior: unknown kind '" + kind + "'");
}

RunConfig parse_config(const json& j)
{
    require(j.is_object(), "config must be a JSON object");
    RunConfig cfg;
    cfg.source = j;
    cfg.hash = config_hash(j);

    require(j.contains("kernel"), "config: missing 'kernel'");
    const json& k = j.at("kernel");
    const int n = get_or(k, "n", 1);
    const double s = get_or(k, "s", 0.25);
    require(n == 1 || n == 2, "kernel: n must be 1 or 2, got " + std::to_string(n));
    require(s > 0.0 && s < 1.0, "kernel: s must lie in (0, 1), got " + num(s));
    require(n > 2.0 * s,
            "kernel: n > 2s violated (n = " + std::to_string(n) + ", 2s = " + num(2.0 * s) + ")");
    AngularDensity a = parse_density(k.contains("a") ? k.at("a") : json(1.0));
    cfg.kernel = KernelSpec(n, s, std::move(a));

    cfg.domain = j.contains("domain") ? parse_domain(j.at("domain"), n)
                 : n == 1 ? Domain::interval(-1.0, 1.0)
                          : throw ConfigError("config: missing 'domain' for n = 2");

    if (j.contains("mesh")) {
        const json& m = j.at("mesh");
        cfg.target_h = get_or(m, "target_h", cfg.target_h);
        cfg.refine = get_or(m, "refine", 0);
    }
    require(cfg.target_h > 0.0, "mesh: target_h must be positive");
    require(cfg.refine >= 0, "mesh: refine must be nonnegative");

    if (j.contains("quadrature")) {
        const json& q = j.at("quadrature");
        auto& c = cfg.quadrature;
        c.touching = get_or(q, "touching", c.touching);
        c.disjoint_min = get_or(q, "disjoint_min", c.disjoint_min);
        c.disjoint_max = get_or(q, "disjoint_max", c.disjoint_max);
        c.angular = get_or(q, "angular", c.angular);
        c.element = get_or(q, "element", c.element);
        c.boundary_levels_1d = get_or(q, "boundary_levels_1d", c.boundary_levels_1d);
        c.boundary_levels_2d = get_or(q, "boundary_levels_2d", c.boundary_levels_2d);
        cfg.op.angular_order = get_or(q, "operator_angular", cfg.op.angular_order);
        cfg.op.rel_tol = get_or(q, "operator_rel_tol", cfg.op.rel_tol);
    }
    require(cfg.quadrature.touching >= kMinTouchingOrder,
            "quadrature: touching order below the minimum " + std::to_string(kMinTouchingOrder));
    require(cfg.quadrature.disjoint_min >= 1 &&
                cfg.quadrature.disjoint_max >= cfg.quadrature.disjoint_min,
            "quadrature: need 1 <= disjoint_min <= disjoint_max");
    require(cfg.quadrature.angular >= 1 && cfg.quadrature.element >= 1,
            "quadrature: angular and element orders must be positive");

    if (j.contains("nonlinearity")) {
        cfg.nonlinearity = parse_nonlinearity(j.at("nonlinearity"));
    }
    // structural checks; a relative beta1 is checked with lambda1 = 1
    cfg.nonlinearity.resolve(1.0).validate(cfg.kernel.critical_exponent());

    if (j.contains("solver")) {
        const json& v = j.at("solver");
        auto& c = cfg.solver;
        c.tol = get_or(v, "tol", c.tol);
        c.iter_cap = get_or(v, "iter_cap", c.iter_cap);
        c.mp_iter_cap = get_or(v, "mp_iter_cap", c.mp_iter_cap);
        c.path_nodes = get_or(v, "path_nodes", c.path_nodes);
        c.eigen_count = get_or(v, "eigen_count", c.eigen_count);
        c.eigen_tol = get_or(v, "eigen_tol", c.eigen_tol);
    }
    require(cfg.solver.tol > 0.0 && cfg.solver.eigen_tol > 0.0, "solver: tolerances must be positive");
    require(cfg.solver.iter_cap > 0 && cfg.solver.mp_iter_cap > 0, "solver: iteration caps must be positive");
    require(cfg.solver.path_nodes >= 3, "solver: path_nodes must be at least 3");
    require(cfg.solver.eigen_count >= 2, "solver: eigen_count must be at least 2");

    if (j.contains("linear")) {
        const json& l = j.at("linear");
        cfg.linear.g = get_or(l, "g", 1.0);
        cfg.linear.c = get_or(l, "c", 0.0);
        if (l.contains("exterior")) {
            cfg.linear.h = parse_exterior(l.at("exterior"), n);
        }
    }

    if (j.contains("operator_eval")) {
        const json& o = j.at("operator_eval");
        if (o.contains("function")) {
            cfg.operator_eval.function = parse_function(o.at("function"), n);
        }
        for (const auto& p : get_or(o, "points", json::array())) {
            cfg.operator_eval.points.push_back(parse_point(p, n));
        }
    }
    if (cfg.operator_eval.points.empty()) {
        cfg.operator_eval.points.push_back(Point{});
    }

    if (j.contains("verify")) {
        const json& v = j.at("verify");
        cfg.verify.seed = get_or<std::uint64_t>(v, "seed", cfg.verify.seed);
        cfg.verify.random_loads = get_or(v, "random_loads", cfg.verify.random_loads);
        cfg.verify.probe_samples = get_or(v, "probe_samples", cfg.verify.probe_samples);
    }
    require(cfg.verify.random_loads >= 0 && cfg.verify.probe_samples > 0,
            "verify: random_loads >= 0 and probe_samples > 0 required");

    cfg.output_dir = get_or<std::string>(j, "output", cfg.output_dir);
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

} // namespace anisokernel
