// trawlsim: command-line front end for the experiment runner.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trawl/experiment.hpp"

namespace ex = trawl::experiment;

int main(int argc, char** argv) {
    CLI::App app{"Simulation and exponent diagnostics for integrated trawl processes"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    bool force = false;
    std::string ensemble_path;

    app.add_option("--config", config_path, "Experiment config (JSON)");
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--threads", threads, "Worker threads (fallback: TRAWLSIM_THREADS)");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_option("--format", format, "Ensemble file format")->check(CLI::IsMember({"csv", "bin"}));
    app.add_flag("--force", force, "Overwrite a non-empty output directory");

    auto* classify = app.add_subcommand("classify", "Classify the limit regime and print it as JSON");
    auto* verify = app.add_subcommand("verify-exponent", "Write the exponent convergence CSV");
    auto* simulate = app.add_subcommand("simulate", "Simulate an ensemble of Y_T paths");
    auto* limit = app.add_subcommand("limit-process", "Simulate an ensemble of limit-process paths");
    auto* estimate = app.add_subcommand("estimate", "Estimate an index from an ensemble file");
    auto* figures = app.add_subcommand("figures-data", "Write the CSV inputs for the plotting scripts");
    estimate->add_option("ensemble", ensemble_path, "Ensemble file (csv or bin)")->required();
    for (auto* sub : {classify, verify, simulate, limit, estimate, figures}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ex::exit_config;
    }

    try {
        ex::RunContext ctx;
        if (!config_path.empty())
            ctx.config = ex::load_config(config_path, seed);
        else if (estimate->parsed() || figures->parsed())
            ctx.config = ex::parse_config(ex::json::object(), seed);
        else
            throw ex::ConfigError("--config", "required for this command");
        ctx.out_dir = out_dir;
        ctx.format = format;
        ctx.force = force;
        ctx.threads = trawl::resolve_threads(threads);

        if (classify->parsed()) return ex::run_classify(ctx);
        if (verify->parsed()) return ex::run_verify(ctx);
        if (simulate->parsed()) return ex::run_simulate(ctx);
        if (limit->parsed()) return ex::run_limit_process(ctx);
        if (estimate->parsed()) return ex::run_estimate(ctx, ensemble_path);
        if (figures->parsed()) return ex::run_figures_data(ctx);
    } catch (const trawl::AccuracyError& e) {
        std::cerr << "accuracy budget exceeded: " << e.what() << "\n";
        return ex::exit_accuracy;
    } catch (const trawl::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return ex::exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ex::exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ex::exit_config;
    }
    return ex::exit_config;
}
