#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "anisokernel/config.hpp"
#include "anisokernel/error.hpp"
#include "anisokernel/run.hpp"

int main(int argc, char** argv)
{
    using namespace anisokernel;

    CLI::App app{"Anisotropic nonlocal operator toolkit"};
    std::string command;
    std::string config_path;
    std::string out_dir;
    int refine = -1;
    app.add_option("command", command, "assemble | eigs | solve-linear | solve-multi | "
                                       "operator-eval | verify | torsion")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--refine", refine, "uniform refinements of the configured mesh")
        ->check(CLI::NonNegativeNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }
    if (refine >= 0) {
        cfg.refine = refine;
    }
    return run(command, cfg, std::cout, std::cerr);
}
