// coherent_flux CLI — runs scenarios, parameter sweeps, and the identity
// verification suite from JSON configurations.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cflux/scenario.hpp"

namespace {

using cflux::scenario::AuditSummary;
using cflux::scenario::ScenarioConfig;

std::vector<double> parse_values(const std::string& csv_list) {
    std::vector<double> values;
    std::stringstream ss(csv_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) {
            throw cflux::ConfigError("sweep: cannot parse value '" + item + "'");
        }
        values.push_back(v);
    }
    return values;
}

void print_summary(const AuditSummary& summary) {
    for (const auto& [name, ok] : summary.pass) {
        const auto it = summary.max_identity_residuals.find(name);
        const double residual =
            it != summary.max_identity_residuals.end() ? it->second
                                                       : summary.max_first_law_residual;
        std::cout << (ok ? "PASS" : "FAIL") << ' ' << name << " (residual " << residual << ")\n";
    }
    if (summary.max_q_dot) {
        std::cout << "  max |Qdot| = " << *summary.max_q_dot << '\n';
    }
    if (summary.tau_max) {
        std::cout << "  max tau    = " << *summary.tau_max << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coherence-resolved heat and work fluxes for driven quantum systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir, param, values_list;
    double tol = -1.0, hbar = -1.0;

    CLI::App* run = app.add_subcommand("run", "execute one scenario from a JSON config");
    run->add_option("config", config_path, "path to config.json")->required();
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--tol", tol, "audit tolerance override");
    run->add_option("--hbar", hbar, "hbar override for reported energies");

    CLI::App* sweep = app.add_subcommand("sweep", "run one scenario per parameter value");
    sweep->add_option("config", config_path, "path to config.json")->required();
    sweep->add_option("--param", param, "model parameter to sweep")->required();
    sweep->add_option("--values", values_list, "comma-separated values")->required();
    sweep->add_option("--out", out_dir, "output directory override");
    sweep->add_option("--tol", tol, "audit tolerance override");
    sweep->add_option("--hbar", hbar, "hbar override for reported energies");

    CLI::App* verify = app.add_subcommand("verify", "run the identity suite with defaults");
    verify->add_option("--out", out_dir, "output directory override");
    verify->add_option("--tol", tol, "audit tolerance override");
    verify->add_option("--hbar", hbar, "hbar override for reported energies");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ScenarioConfig config = ScenarioConfig::from_file(config_path);
            cflux::scenario::apply_cli_overrides(config, out_dir, tol, hbar);
            const auto result = cflux::scenario::run_scenario(config);
            print_summary(result.summary);
            std::cout << "wrote " << result.csv_path << " and " << result.summary_path << '\n';
            return result.summary.all_pass() ? 0 : 1;
        }
        if (sweep->parsed()) {
            ScenarioConfig config = ScenarioConfig::from_file(config_path);
            cflux::scenario::apply_cli_overrides(config, out_dir, tol, hbar);
            const auto result = cflux::scenario::run_sweep(config, param, parse_values(values_list));
            std::cout << "wrote " << result.summary_csv_path << " (" << result.rows.size()
                      << " rows)\n";
            return result.all_pass() ? 0 : 1;
        }
        // verify
        ScenarioConfig config;
        config.kind = cflux::scenario::ScenarioKind::identity_suite;
        config.grid.t_end = 15.0;
        config.grid.samples = 2001;
        cflux::scenario::apply_cli_overrides(config, out_dir, tol, hbar);
        const auto result = cflux::scenario::run_scenario(config);
        print_summary(result.summary);
        return result.summary.all_pass() ? 0 : 1;
    } catch (const cflux::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
