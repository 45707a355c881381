// scenario.hpp — Declarative scenario runner: JSON configuration in, CSV time
// series and a machine-readable audit summary out.

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cflux/thermo.hpp"

namespace cflux::scenario {

enum class ScenarioKind {
    two_level_exact,
    two_level_numeric,
    high_spin_exact,
    high_spin_numeric,
    isochoric,
    isothermal,
    identity_suite,
};

ScenarioKind scenario_kind_from_string(const std::string& name);
std::string to_string(ScenarioKind kind);

struct GridSpec {
    double t_start = 0.0;
    double t_end = 1.0;
    int samples = 101;
};

struct ToleranceSpec {
    double integrator_tol = 1e-10;
    double audit_tol = 1e-8;
};

// Model parameters are a flat bag; each scenario kind reads the fields it
// needs. Half-integers travel as twice-values.
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::two_level_exact;

    // two-level family
    double omega1 = 1.0;
    double omega = 0.6;
    double alpha = M_PI / 3.0;

    // high-spin family
    int twice_j = 4;
    double gamma_b0 = 1.0;
    double theta = M_PI / 4.0;
    int twice_m = 4;

    // isochoric / isothermal
    double temperature = 1.0;
    double base_rate = 0.5;
    std::string init_kind = "excited"; // "excited" | "gibbs"
    double init_temperature = 0.2;
    double omega1_final = 2.0;

    // identity suite
    int max_twice_j = 12;

    GridSpec grid;
    ToleranceSpec tolerances;
    std::string output_path = "out";
    double hbar = 1.0;

    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_file(const std::string& path);
    std::string to_json_text() const;

    // Named-parameter mutation used by sweeps; unknown names raise ConfigError.
    void set_parameter(const std::string& name, double value);
};

struct AuditSummary {
    double max_first_law_residual = 0.0;
    std::optional<double> max_q_dot; // unitary runs only
    std::optional<double> tau_max;
    std::map<std::string, double> max_identity_residuals;
    std::map<std::string, bool> pass;

    bool all_pass() const;
};

struct ScenarioResult {
    AuditSummary summary;
    std::string csv_path;
    std::string summary_path;
};

// Executes the configured scenario, writes <out>/<kind>.csv and
// <out>/<kind>_summary.json, and returns the summary. Float serialization uses
// 17 significant digits; identical configs produce byte-identical files.
ScenarioResult run_scenario(const ScenarioConfig& config);

struct SweepResult {
    std::vector<AuditSummary> rows;
    std::string summary_csv_path;
    bool all_pass() const;
};

// One independent scenario run per value of the named parameter; per-run
// outputs land in <out>/sweep_<param>_<index>/ and the aggregate table in
// <out>/sweep_<param>.csv.
SweepResult run_sweep(const ScenarioConfig& base, const std::string& parameter,
                      const std::vector<double>& values);

// CLI-level overrides. Output directory precedence: --out flag, then the
// COHERENT_FLUX_OUT environment variable, then the config file.
void apply_cli_overrides(ScenarioConfig& config, const std::string& out_flag,
                         double tol_flag, double hbar_flag);

} // namespace cflux::scenario
