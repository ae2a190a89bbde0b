// Command-line front end: `run <config> [--force] [--jobs N]`, `render <report.json>`.
#include <iostream>

#include <CLI11.hpp>

#include "dwt/linalg.hpp"
#include "dwt/sweep.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Damped-wave resolvent and decay toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("dwt ") + dwt::kToolkitVersion);

    std::string config_path;
    dwt::RunOptions opt;
    auto* run = app.add_subcommand("run", "Execute the sweeps and checks of a config file");
    run->add_option("config", config_path, "Config file")->required();
    run->add_flag("--force", opt.force, "Recompute even if the cache has this config");
    run->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string report_path;
    auto* render = app.add_subcommand("render", "Write plot data and SVG plots for a report");
    render->add_option("report", report_path, "report.json of a finished run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const dwt::RunReport r = dwt::run(std::filesystem::path(config_path), opt);
            bool all = true;
            for (const auto& [name, fit] : r.fits)
                std::cout << "fit   " << name << ": slope " << dwt::format_double(fit.slope) << " (R^2 "
                          << dwt::format_double(fit.r_squared) << ")\n";
            for (const auto& [name, c] : r.checks) {
                std::cout << "check " << name << ": " << (c.pass ? "pass" : "FAIL") << '\n';
                all = all && c.pass;
            }
            std::cout << "report " << r.config_hash << " (cache " << r.provenance.at("cache") << ")\n";
            return all ? 0 : 1;
        }
        for (const auto& p : dwt::report_render(report_path)) std::cout << p.string() << '\n';
        return 0;
    } catch (const dwt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dwt::UnknownNameError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const dwt::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
