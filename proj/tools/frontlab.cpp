// Command line front end: every subcommand reads a JSON config, writes its
// results under --out, and prints the summary JSON to stdout.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "frontlab/config.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/experiment.hpp"

namespace {

struct cli_args {
    std::string config_path;
    std::string out_dir = "out";
    std::size_t workers = 1;
    bool seedless = false;
};

void add_common(CLI::App* cmd, cli_args& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--workers", args.workers, "worker threads for sweep cells")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--seedless", args.seedless,
                  "omit timestamps so reruns are byte identical");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal free boundary laboratory"};
    app.require_subcommand(1);

    cli_args args;
    const char* names[] = {"simulate",  "eigen",       "critical-length",
                           "speed",     "semiwave",    "critical-mu",
                           "sweep",     "compare"};
    const char* blurbs[] = {
        "advance the two species system and track the fronts",
        "principal eigenvalue across a list of habitat lengths",
        "habitat length where the principal eigenvalue changes sign",
        "minimal wave speed from the dispersion relation",
        "semi-wave profile and front speed for a given mu",
        "bisect for the mu separating vanishing from spreading",
        "re-run the simulation across a list of parameter values",
        "evolve nested initial data and check the order is kept"};
    for (std::size_t k = 0; k < 8; ++k) {
        add_common(app.add_subcommand(names[k], blurbs[k]), args);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        const auto cfg = frontlab::load_config_file(args.config_path);
        frontlab::run_context ctx;
        ctx.out_dir = args.out_dir;
        ctx.workers = args.workers;
        ctx.seedless = args.seedless;

        frontlab::json summary;
        if (sub == "simulate") summary = frontlab::run_simulate(cfg, ctx);
        else if (sub == "eigen") summary = frontlab::run_eigen(cfg, ctx);
        else if (sub == "critical-length") summary = frontlab::run_critical_length(cfg, ctx);
        else if (sub == "speed") summary = frontlab::run_speed(cfg, ctx);
        else if (sub == "semiwave") summary = frontlab::run_semiwave(cfg, ctx);
        else if (sub == "critical-mu") summary = frontlab::run_critical_mu(cfg, ctx);
        else if (sub == "sweep") summary = frontlab::run_sweep(cfg, ctx);
        else summary = frontlab::run_compare(cfg, ctx);

        std::fputs(summary.dump(2).c_str(), stdout);
        std::fputc('\n', stdout);
        return 0;
    } catch (const frontlab::error& e) {
        frontlab::json err{{"error", frontlab::errc_name(e.code())},
                           {"code", static_cast<int>(e.code())},
                           {"message", e.what()}};
        std::fputs(err.dump(2).c_str(), stderr);
        std::fputc('\n', stderr);
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\n  \"error\": \"unhandled\",\n  \"message\": \"%s\"\n}\n",
                     e.what());
        return 1;
    }
}
