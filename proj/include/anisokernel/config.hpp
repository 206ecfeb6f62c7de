#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anisokernel/assembly.hpp"
#include "anisokernel/kernel.hpp"
#include "anisokernel/operator.hpp"
#include "anisokernel/variational.hpp"

namespace anisokernel {

/// Reaction term as written in the config. For the model, beta1 may be given
/// as a multiple of lambda1, in which case b and a1 default to beta1 / 2.
struct NonlinearityConfig {
    std::string kind = "zero"; // zero | linear | model | tabulated
    double lambda = 0.0;
    NonlinearitySpec::ModelParams model;
    std::optional<double> beta1_over_lambda1;
    double b_fraction = 0.5; // b = b_fraction * beta1 when beta1 is relative
    std::vector<double> t, f;

    bool needs_lambda1() const { return kind == "model" && beta1_over_lambda1.has_value(); }
    NonlinearitySpec resolve(double lambda1 = 0.0) const;
};

struct SolverConfig {
    double tol = 1e-8;
    int iter_cap = 20000;
    int mp_iter_cap = 4000;
    int path_nodes = 21;
    int eigen_count = 4;
    double eigen_tol = 1e-8;
};

struct LinearProblemConfig {
    double g = 1.0;
    ExteriorTrace h;
    double c = 0.0;
};

struct OperatorEvalConfig {
    ClosedFormFunction function = ClosedFormFunction::gaussian(Point{}, 1.0);
    std::vector<Point> points;
};

struct VerifyConfig {
    std::uint64_t seed = 1;
    int random_loads = 5;
    int probe_samples = 64;
};

struct RunConfig {
    nlohmann::json source;
    std::uint64_t hash = 0;

    KernelSpec kernel{1, 0.25, AngularDensity::constant(1.0)};
    Domain domain = Domain::interval(-1.0, 1.0);
    double target_h = 1.0 / 64.0;
    int refine = 0;
    QuadratureConfig quadrature;
    OperatorConfig op;
    NonlinearityConfig nonlinearity;
    SolverConfig solver;
    LinearProblemConfig linear;
    OperatorEvalConfig operator_eval;
    VerifyConfig verify;
    std::string output_dir = "out";

    SpacePtr mesh(int extra_refinements = 0) const;
};

/// FNV-1a over the compact dump of the config.
std::uint64_t config_hash(const nlohmann::json& j);
std::string hash_string(std::uint64_t h);

/// Throws ConfigError naming the violated constraint.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

AngularDensity parse_density(const nlohmann::json& j);
ClosedFormFunction parse_function(const nlohmann::json& j, int n);
ExteriorTrace parse_exterior(const nlohmann::json& j, int n);

} // namespace anisokernel
