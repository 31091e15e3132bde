#include <CLI11.hpp>
#include <iostream>

#include "specwave/pipeline.hpp"

using namespace specwave;

int main(int argc, char** argv) {
    CLI::App app{"specwave: spectral-Galerkin verification harness for the semilinear "
                 "damped wave equation and its parabolic limit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
    auto* seed_opt = app.add_option("--seed", seed, "run seed (overrides the scenario)");
    app.add_option("--config", config_path, "scenario config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads for ensembles and sweeps");

    auto* c_hyp = app.add_subcommand("verify-hypotheses",
                                     "check the structural hypotheses and norm ladder");
    auto* c_dec = app.add_subcommand("decay", "certify linearized exponential decay");
    auto* c_reg = app.add_subcommand("regularity",
                                     "variation-of-constants bootstrap and epsilon sweep");
    auto* c_att = app.add_subcommand("attractor-sweep",
                                     "attractor clouds and upper-semicontinuity curve");
    auto* c_rep = app.add_subcommand("report", "summarize emitted reports");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_rep->parsed()) return cmd_report(out_dir);
        if (config_path.empty()) throw ConfigError("--config is required");
        PipelineContext ctx;
        ctx.scenario = load_scenario(config_path);
        if (seed_opt->count() > 0) ctx.scenario.seed = seed;
        ctx.out_dir = out_dir;
        ctx.threads = threads;
        if (c_hyp->parsed()) return cmd_verify_hypotheses(ctx);
        if (c_dec->parsed()) return cmd_decay(ctx);
        if (c_reg->parsed()) return cmd_regularity(ctx);
        if (c_att->parsed()) return cmd_attractor_sweep(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
