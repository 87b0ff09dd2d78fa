#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv)
{
    using namespace kgconc::app;

    CLI::App app{"Concentrating Klein-Gordon charges: rest states, boosts, accelerated construction, diagnostics"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "kgconc_out", format = "both";
    bool assert_mode = false;
    std::size_t threads = 0;
    app.add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--format", format, "artifact format")->check(CLI::IsMember({"csv", "json", "both"}));
    app.add_flag("--assert", assert_mode, "exit with status 4 when a reported threshold fails");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.fallthrough();

    const char* help[] = {"rest-state: radial rest states of the configured family",
                          "boost: boosted rest state, densities, totals and conservation residuals",
                          "accelerate: single-zeta construction along the configured trajectory",
                          "sweep: convergence sweep over the zeta list",
                          "verify: conservation residuals of a field export",
                          "check-family: concentration checks on a synthetic family"};
    for (std::size_t i = 0; i < command_names().size(); ++i) app.add_subcommand(command_names()[i], help[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const kgconc::Error& e) {
        std::cerr << "error (config): " << e.what() << '\n';
        return exit_config;
    }

    const auto pool = kgconc::limit_threads(threads);
    OutputOptions out;
    out.dir = out_dir;
    out.csv = format != "json";
    out.json = format != "csv";
    out.assert_mode = assert_mode;
    return run_command(app.get_subcommands().front()->get_name(), cfg, out, std::cout);
}
