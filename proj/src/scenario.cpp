#include "cflux/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cflux/angular.hpp"
#include "cflux/models.hpp"

namespace cflux::scenario {

namespace {

using nlohmann::ordered_json;

std::vector<double> linspace(double t0, double t1, int n) {
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / (n - 1);
    }
    out.back() = t1;
    return out;
}

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// ------------------------------- configuration -------------------------------

const std::map<std::string, ScenarioKind> kKindNames = {
    {"two_level_exact", ScenarioKind::two_level_exact},
    {"two_level_numeric", ScenarioKind::two_level_numeric},
    {"high_spin_exact", ScenarioKind::high_spin_exact},
    {"high_spin_numeric", ScenarioKind::high_spin_numeric},
    {"isochoric", ScenarioKind::isochoric},
    {"isothermal", ScenarioKind::isothermal},
    {"identity_suite", ScenarioKind::identity_suite},
};

void read_double(const ordered_json& j, const char* key, double& out) {
    if (j.contains(key)) {
        if (!j.at(key).is_number()) {
            throw ConfigError(std::string("config: field '") + key + "' must be a number");
        }
        out = j.at(key).get<double>();
    }
}

void read_int(const ordered_json& j, const char* key, int& out) {
    if (j.contains(key)) {
        if (!j.at(key).is_number_integer()) {
            throw ConfigError(std::string("config: field '") + key + "' must be an integer");
        }
        out = j.at(key).get<int>();
    }
}

} // namespace

ScenarioKind scenario_kind_from_string(const std::string& name) {
    const auto it = kKindNames.find(name);
    if (it == kKindNames.end()) {
        throw ConfigError("config: unknown scenario_kind '" + name + "'");
    }
    return it->second;
}

std::string to_string(ScenarioKind kind) {
    for (const auto& [name, k] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    ScenarioConfig c;
    if (!j.contains("scenario_kind") || !j.at("scenario_kind").is_string()) {
        throw ConfigError("config: missing string field 'scenario_kind'");
    }
    c.kind = scenario_kind_from_string(j.at("scenario_kind").get<std::string>());

    static const std::vector<std::string> kModelKeys = {
        "omega1", "omega", "alpha", "twice_j", "gamma_b0", "theta", "twice_m",
        "temperature", "base_rate", "init_kind", "init_temperature", "omega1_final",
        "max_twice_j"};
    if (j.contains("model_params")) {
        const auto& mp = j.at("model_params");
        if (!mp.is_object()) throw ConfigError("config: 'model_params' must be an object");
        for (const auto& [key, _] : mp.items()) {
            if (std::find(kModelKeys.begin(), kModelKeys.end(), key) == kModelKeys.end()) {
                throw ConfigError("config: unknown model_params field '" + key + "'");
            }
        }
        read_double(mp, "omega1", c.omega1);
        read_double(mp, "omega", c.omega);
        read_double(mp, "alpha", c.alpha);
        read_int(mp, "twice_j", c.twice_j);
        read_double(mp, "gamma_b0", c.gamma_b0);
        read_double(mp, "theta", c.theta);
        read_int(mp, "twice_m", c.twice_m);
        read_double(mp, "temperature", c.temperature);
        read_double(mp, "base_rate", c.base_rate);
        read_double(mp, "init_temperature", c.init_temperature);
        read_double(mp, "omega1_final", c.omega1_final);
        read_int(mp, "max_twice_j", c.max_twice_j);
        if (mp.contains("init_kind")) {
            c.init_kind = mp.at("init_kind").get<std::string>();
            if (c.init_kind != "excited" && c.init_kind != "gibbs") {
                throw ConfigError("config: init_kind must be 'excited' or 'gibbs'");
            }
        }
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        read_double(g, "t_start", c.grid.t_start);
        read_double(g, "t_end", c.grid.t_end);
        read_int(g, "samples", c.grid.samples);
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        read_double(t, "integrator_tol", c.tolerances.integrator_tol);
        read_double(t, "audit_tol", c.tolerances.audit_tol);
    }
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
    read_double(j, "hbar", c.hbar);

    if (!(c.grid.t_end > c.grid.t_start)) {
        throw ConfigError("config: grid.t_end must exceed grid.t_start");
    }
    if (c.grid.samples < 3) {
        throw ConfigError("config: grid.samples must be >= 3");
    }
    if (!(c.tolerances.integrator_tol > 0.0) || !(c.tolerances.audit_tol > 0.0)) {
        throw ConfigError("config: tolerances must be positive");
    }
    if (!(c.hbar > 0.0)) {
        throw ConfigError("config: hbar must be positive");
    }
    return c;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string ScenarioConfig::to_json_text() const {
    ordered_json j;
    j["scenario_kind"] = to_string(kind);
    j["model_params"] = {
        {"omega1", omega1}, {"omega", omega}, {"alpha", alpha},
        {"twice_j", twice_j}, {"gamma_b0", gamma_b0}, {"theta", theta}, {"twice_m", twice_m},
        {"temperature", temperature}, {"base_rate", base_rate},
        {"init_kind", init_kind}, {"init_temperature", init_temperature},
        {"omega1_final", omega1_final}, {"max_twice_j", max_twice_j}};
    j["grid"] = {{"t_start", grid.t_start}, {"t_end", grid.t_end}, {"samples", grid.samples}};
    j["tolerances"] = {{"integrator_tol", tolerances.integrator_tol},
                       {"audit_tol", tolerances.audit_tol}};
    j["output_path"] = output_path;
    j["hbar"] = hbar;
    return j.dump(2) + "\n";
}

void ScenarioConfig::set_parameter(const std::string& name, double value) {
    if (name == "omega1") omega1 = value;
    else if (name == "omega") omega = value;
    else if (name == "alpha") alpha = value;
    else if (name == "gamma_b0") gamma_b0 = value;
    else if (name == "theta") theta = value;
    else if (name == "lambda0") omega = value * gamma_b0; // ω = λ₀·γB₀
    else if (name == "temperature") temperature = value;
    else if (name == "base_rate") base_rate = value;
    else if (name == "init_temperature") init_temperature = value;
    else if (name == "omega1_final") omega1_final = value;
    else throw ConfigError("sweep: unknown parameter name '" + name + "'");
}

bool AuditSummary::all_pass() const {
    for (const auto& [_, ok] : pass) {
        if (!ok) return false;
    }
    return true;
}

// ----------------------------------- runners ---------------------------------

namespace {

struct CsvRow {
    thermo::FluxSample s;
    double u = 0.0;
    double state_purity = 1.0;
};

struct RunnerOutput {
    std::vector<CsvRow> rows;
    AuditSummary summary;
};

void add_check(AuditSummary& summary, const std::string& name, double residual, double tol) {
    summary.max_identity_residuals[name] = residual;
    summary.pass[name] = residual < tol;
}

std::vector<CsvRow> rows_from_trajectory(const dynamics::Trajectory& traj,
                                         const dynamics::DriveProtocol& drive,
                                         const thermo::EnergyLedger& ledger) {
    std::vector<CsvRow> rows;
    rows.reserve(ledger.samples.size());
    for (size_t i = 0; i < ledger.samples.size(); ++i) {
        CsvRow row;
        row.s = ledger.samples[i];
        row.u = expectation(traj.states[i], drive.hamiltonian_at(traj.times[i]));
        row.state_purity = purity(traj.states[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

void summarize_ledger(AuditSummary& summary, const thermo::EnergyLedger& ledger, double tol) {
    summary.max_first_law_residual =
        std::abs(ledger.delta_u() - ledger.Q - ledger.W) / (1.0 + std::abs(ledger.delta_u()));
    summary.pass["first_law"] = summary.max_first_law_residual < tol;
    add_check(summary, "heat_trace_identity", ledger.max_heat_trace_residual, tol);
    add_check(summary, "work_trace_identity", ledger.max_work_trace_residual, tol);

    double max_q = 0.0, tau = 0.0;
    bool has_tau = false;
    for (const auto& s : ledger.samples) {
        max_q = std::max(max_q, std::abs(s.q_dot));
        if (s.tau_adiabatic) {
            tau = std::max(tau, *s.tau_adiabatic);
            has_tau = true;
        }
    }
    summary.max_q_dot = max_q;
    if (has_tau) summary.tau_max = tau;
}

dynamics::Trajectory exact_two_level_trajectory(const models::TwoLevelParams& p,
                                                const dynamics::DriveProtocol& drive,
                                                const std::vector<double>& times) {
    dynamics::Trajectory traj;
    traj.unitary = true;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.frames.reserve(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        traj.states.push_back(pure_state_density(models::two_level_exact_state(p, times[i])));
        traj.frames.push_back(spectra::diagonalize_instantaneous(
            drive.hamiltonian_at(times[i]), times[i], i ? &traj.frames.back() : nullptr));
    }
    return traj;
}

dynamics::Trajectory exact_highspin_trajectory(const models::HighSpinParams& p,
                                               const dynamics::DriveProtocol& drive,
                                               const std::vector<double>& times) {
    dynamics::Trajectory traj;
    traj.unitary = true;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.frames.reserve(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        traj.states.push_back(pure_state_density(models::highspin_exact_state(p, times[i])));
        traj.frames.push_back(spectra::diagonalize_instantaneous(
            drive.hamiltonian_at(times[i]), times[i], i ? &traj.frames.back() : nullptr));
    }
    return traj;
}

// Density elements as printed in the all-β Wigner quadruple sum; reported
// against the direct inner-product route.
ComplexMatrix highspin_density_printed(const models::HighSpinParams& p, double t) {
    const models::RotatingFrameParams rf = models::rotating_frame_params(p);
    const angular::WignerDMatrix d = angular::wigner_small_d(p.j, rf.beta);
    const int tj = p.j.twice();
    const int dim = p.j.dimension();

    ComplexVector amp(dim);
    for (int row = 0; row < dim; ++row) {
        const int tn = p.j.twice_m_at(row);
        Complex sum(0.0, 0.0);
        for (int tm = tj; tm >= -tj; tm -= 2) {
            sum += std::exp(Complex(0.0, -0.5 * tm * rf.omega0 * t))
                 * d.at(tm, p.twice_M) * d.at(tm, tn);
        }
        amp(row) = sum;
    }
    return amp * amp.adjoint();
}

RunnerOutput run_two_level(const ScenarioConfig& c, bool numeric) {
    const models::TwoLevelParams p(c.omega1, c.omega, c.alpha);
    const dynamics::DriveProtocol drive = models::two_level_drive(p);
    const std::vector<double> times = linspace(c.grid.t_start, c.grid.t_end, c.grid.samples);

    dynamics::Trajectory traj =
        numeric ? dynamics::propagate_unitary(
                      drive, pure_state_density(models::two_level_exact_state(p, times.front())),
                      times, c.tolerances.integrator_tol)
                : exact_two_level_trajectory(p, drive, times);

    const thermo::EnergyLedger ledger = thermo::audit_trajectory(traj, drive);

    RunnerOutput out;
    summarize_ledger(out.summary, ledger, c.tolerances.audit_tol);
    add_check(out.summary, "population_flux_identity", *out.summary.max_q_dot, c.tolerances.audit_tol);

    // Closed forms of ẇ and the naive q̇ on this model.
    double w_resid = 0.0, naive_resid = 0.0;
    for (const auto& s : ledger.samples) {
        const double closed = models::two_level_coherence_flux(p, s.t);
        w_resid = std::max(w_resid, std::abs(s.w_dot - closed));
        naive_resid = std::max(naive_resid, std::abs(s.q_dot_naive - closed));
    }
    add_check(out.summary, "w_dot_closed_form", w_resid, c.tolerances.audit_tol);
    add_check(out.summary, "q_dot_naive_closed_form", naive_resid, c.tolerances.audit_tol);

    if (numeric) {
        double infidelity = 0.0;
        for (size_t i = 0; i < times.size(); ++i) {
            const QuantumState exact = models::two_level_exact_state(p, times[i]);
            const double f = expectation(traj.states[i], exact.amplitudes()
                                                             * exact.amplitudes().adjoint());
            infidelity = std::max(infidelity, 1.0 - f);
        }
        add_check(out.summary, "exact_state_infidelity", infidelity, 1e-6);
    }

    out.rows = rows_from_trajectory(traj, drive, ledger);
    return out;
}

RunnerOutput run_high_spin(const ScenarioConfig& c, bool numeric) {
    const models::HighSpinParams p(angular::SpinQuantumNumber::from_twice(c.twice_j),
                                   c.gamma_b0, c.theta, c.omega, c.twice_m);
    const dynamics::DriveProtocol drive = models::highspin_drive(p);
    const std::vector<double> times = linspace(c.grid.t_start, c.grid.t_end, c.grid.samples);

    dynamics::Trajectory traj =
        numeric ? dynamics::propagate_unitary(
                      drive, pure_state_density(models::highspin_exact_state(p, times.front())),
                      times, c.tolerances.integrator_tol)
                : exact_highspin_trajectory(p, drive, times);

    const thermo::EnergyLedger ledger = thermo::audit_trajectory(traj, drive);

    RunnerOutput out;
    summarize_ledger(out.summary, ledger, c.tolerances.audit_tol);
    add_check(out.summary, "population_flux_identity", *out.summary.max_q_dot, c.tolerances.audit_tol);

    // Printed closed forms against each other and against the numerical route.
    double flux_pair = 0.0, diag_vs_spectra = 0.0, density_printed = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        const double f21 = models::highspin_diag_flux(p, times[i]);
        const double f23 = models::highspin_coherence_flux(p, times[i]);
        flux_pair = std::max(flux_pair, std::abs(f21 - f23));
        diag_vs_spectra = std::max(
            diag_vs_spectra, std::abs(f21 - ledger.samples[i].diag_pop_flux));
        density_printed = std::max(
            density_printed, max_abs(highspin_density_printed(p, times[i])
                                     - models::highspin_density_elements(p, times[i])));
    }
    add_check(out.summary, "highspin_flux_forms_agree", flux_pair, c.tolerances.audit_tol);
    add_check(out.summary, "highspin_closed_form_vs_frames", diag_vs_spectra, c.tolerances.audit_tol);
    add_check(out.summary, "highspin_density_sum_vs_direct", density_printed, c.tolerances.audit_tol);

    out.rows = rows_from_trajectory(traj, drive, ledger);
    return out;
}

RunnerOutput run_isochoric(const ScenarioConfig& c) {
    const ComplexMatrix H = 0.5 * c.omega1 * pauli_z();
    const dynamics::Dissipator diss =
        dynamics::thermal_dissipator(H, c.temperature, c.base_rate);

    DensityMatrix rho0 = [&]() {
        if (c.init_kind == "gibbs") {
            return thermo::gibbs_state(H, c.init_temperature);
        }
        ComplexVector up(2);
        up << 1.0, 0.0; // higher-energy eigenstate of (ω₁/2)σz
        return pure_state_density(QuantumState(up));
    }();

    const ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
    const dynamics::DriveProtocol drive(2, [H](double) { return H; },
                                        [zero](double) { return zero; });
    const std::vector<double> times = linspace(c.grid.t_start, c.grid.t_end, c.grid.samples);
    const dynamics::Trajectory traj =
        dynamics::propagate_lindblad(drive, diss, rho0, times, c.tolerances.integrator_tol);

    thermo::EnergyLedger ledger = thermo::audit_trajectory(traj, drive, &diss);
    ledger.W = 0.0; // Ḣ = 0: every ẇ sample is exactly zero

    RunnerOutput out;
    summarize_ledger(out.summary, ledger, c.tolerances.audit_tol);
    out.summary.max_q_dot = std::nullopt; // heat flows here by design

    add_check(out.summary, "w_zero", std::abs(ledger.W), c.tolerances.audit_tol);
    add_check(out.summary, "q_vs_delta_u", std::abs(ledger.Q - ledger.delta_u()),
              c.tolerances.audit_tol);
    add_check(out.summary, "stationary_vs_gibbs",
              max_abs(traj.states.back().matrix()
                      - thermo::gibbs_state(H, c.temperature).matrix()),
              1e-6);

    out.rows = rows_from_trajectory(traj, drive, ledger);
    return out;
}

RunnerOutput run_isothermal(const ScenarioConfig& c) {
    const double w0 = c.omega1, w1 = c.omega1_final;
    const double t0 = c.grid.t_start, t1 = c.grid.t_end;
    const double slope = (w1 - w0) / (t1 - t0);
    auto gap_at = [=](double t) { return w0 + slope * (t - t0); };

    const dynamics::DriveProtocol drive(
        2, [=](double t) { return ComplexMatrix(0.5 * gap_at(t) * pauli_z()); },
        [=](double) { return ComplexMatrix(0.5 * slope * pauli_z()); });

    const std::vector<double> times = linspace(t0, t1, c.grid.samples);
    const thermo::EnergyLedger ledger =
        thermo::quasistatic_isothermal(drive, c.temperature, times);

    // Two-level partition-function oracles: W = ΔF, Q = TΔS.
    auto free_energy = [&](double gap) {
        const double e = 0.5 * gap;
        return -c.temperature * std::log(std::exp(-e / c.temperature)
                                         + std::exp(e / c.temperature));
    };
    auto entropy = [&](double gap) {
        const double e = 0.5 * gap;
        const double z = std::exp(-e / c.temperature) + std::exp(e / c.temperature);
        const double p_hi = std::exp(-e / c.temperature) / z;
        const double p_lo = 1.0 - p_hi;
        return -(p_hi * std::log(p_hi) + p_lo * std::log(p_lo));
    };
    const double delta_f = free_energy(gap_at(t1)) - free_energy(gap_at(t0));
    const double t_delta_s = c.temperature * (entropy(gap_at(t1)) - entropy(gap_at(t0)));

    RunnerOutput out;
    out.summary.max_first_law_residual =
        std::abs(ledger.delta_u() - ledger.Q - ledger.W) / (1.0 + std::abs(ledger.delta_u()));
    out.summary.pass["first_law"] = out.summary.max_first_law_residual < c.tolerances.audit_tol;
    add_check(out.summary, "w_vs_delta_f", std::abs(ledger.W - delta_f), 1e-6);
    add_check(out.summary, "q_vs_t_delta_s", std::abs(ledger.Q - t_delta_s), 1e-6);

    out.rows.reserve(ledger.samples.size());
    for (const auto& s : ledger.samples) {
        const spectra::SpectralFrame frame =
            spectra::diagonalize_instantaneous(drive.hamiltonian_at(s.t), s.t);
        const DensityMatrix rho = thermo::gibbs_state(drive.hamiltonian_at(s.t), c.temperature);
        CsvRow row;
        row.s = s;
        row.u = expectation(rho, frame.hamiltonian());
        row.state_purity = purity(rho);
        out.rows.push_back(std::move(row));
        if (s.tau_adiabatic) {
            out.summary.tau_max =
                std::max(out.summary.tau_max.value_or(0.0), *s.tau_adiabatic);
        }
    }
    return out;
}

RunnerOutput run_identity_suite(const ScenarioConfig& c) {
    RunnerOutput out;
    const double tol = c.tolerances.audit_tol;
    std::mt19937 gen(20260808u);
    std::uniform_real_distribution<double> beta_draw(0.1, M_PI - 0.1);

    // Wigner identities across all half-integer and integer j up to the cap.
    double recursion_resid = 0.0, invariant_resid = 0.0, vs_expm = 0.0, ortho = 0.0, at_zero = 0.0;
    for (int tj = 1; tj <= c.max_twice_j; ++tj) {
        const auto j = angular::SpinQuantumNumber::from_twice(tj);
        at_zero = std::max(at_zero,
                           max_abs(angular::wigner_small_d(j, 0.0).entries.cast<Complex>()
                                   - ComplexMatrix::Identity(j.dimension(), j.dimension())));
        for (int draw = 0; draw < 25; ++draw) {
            const double beta = beta_draw(gen);
            const angular::WignerDMatrix d = angular::wigner_small_d(j, beta);
            vs_expm = std::max(vs_expm, max_abs(angular::rotation_y(j, beta)
                                                - d.entries.cast<Complex>()));
            ortho = std::max(ortho,
                             max_abs((d.entries * d.entries.transpose()
                                      - RealMatrix::Identity(j.dimension(), j.dimension()))
                                         .cast<Complex>()));
            for (int tm = tj; tm >= -tj; tm -= 2) {
                for (int tn = tj; tn >= -tj; tn -= 2) {
                    recursion_resid = std::max(recursion_resid, angular::d_recursion_residual(j, beta, tm, tn));
                    invariant_resid = std::max(invariant_resid, angular::invariant_sum_residual(j, beta, tm, tn));
                }
            }
        }
    }
    add_check(out.summary, "wigner_recursion", recursion_resid, tol);
    add_check(out.summary, "wigner_invariant_sum", invariant_resid, tol);
    add_check(out.summary, "wigner_vs_expm", vs_expm, tol);
    add_check(out.summary, "wigner_orthogonality", ortho, tol);
    add_check(out.summary, "wigner_identity_beta0", at_zero, tol);

    // Flux identity of the two printed closed forms across spins.
    std::uniform_real_distribution<double> lam_draw(0.1, 2.0);
    std::uniform_real_distribution<double> th_draw(0.05, M_PI - 0.05);
    std::uniform_real_distribution<double> t_draw(0.0, 1.0);
    double flux_forms_resid = 0.0;
    for (int tj = 1; tj <= std::min(c.max_twice_j, 5); ++tj) {
        const auto j = angular::SpinQuantumNumber::from_twice(tj);
        for (int draw = 0; draw < 20; ++draw) {
            const double lam0 = lam_draw(gen);
            const double th = th_draw(gen);
            std::uniform_int_distribution<int> m_draw(0, tj);
            const int tM = tj - 2 * m_draw(gen);
            const models::HighSpinParams p(j, 1.0, th, lam0, tM);
            const models::RotatingFrameParams rf = models::rotating_frame_params(p);
            const double t = t_draw(gen) * 4.0 * M_PI / rf.omega0;
            flux_forms_resid = std::max(flux_forms_resid, std::abs(models::highspin_diag_flux(p, t)
                                                       - models::highspin_coherence_flux(p, t)));
        }
    }
    add_check(out.summary, "highspin_flux_forms_agree", flux_forms_resid, tol);

    // Cross-model reduction at j = 1/2: same geometry, same dynamics.
    {
        const models::TwoLevelParams p2(c.omega1, c.omega, c.alpha);
        const models::HighSpinParams ph(angular::SpinQuantumNumber::from_twice(1),
                                        c.omega1, c.alpha, c.omega, 1);
        double cross = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double t = c.grid.t_start
                             + (c.grid.t_end - c.grid.t_start) * static_cast<double>(i) / 100.0;
            cross = std::max(cross, std::abs(models::highspin_diag_flux(ph, t)
                                             - models::two_level_coherence_flux(p2, t)));
            cross = std::max(cross,
                             max_abs(models::highspin_exact_state(ph, t).amplitudes()
                                     - models::two_level_exact_state(p2, t).amplitudes()));
        }
        add_check(out.summary, "cross_model", cross, tol);
    }

    // Default two-level trajectory provides the flux-identity audits and the CSV.
    RunnerOutput base = run_two_level(c, /*numeric=*/false);
    for (const auto& [name, value] : base.summary.max_identity_residuals) {
        if (name == "population_flux_identity" || name == "heat_trace_identity"
            || name == "work_trace_identity") {
            add_check(out.summary, name, value, tol);
        }
    }
    out.summary.max_first_law_residual = base.summary.max_first_law_residual;
    out.summary.pass["first_law"] = base.summary.pass.at("first_law");
    out.summary.max_q_dot = base.summary.max_q_dot;
    out.summary.tau_max = base.summary.tau_max;
    out.rows = std::move(base.rows);
    return out;
}

// ---------------------------------- emission ---------------------------------

void write_csv(const std::string& path, const std::vector<CsvRow>& rows, double hbar) {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) {
        throw std::runtime_error("run_scenario: cannot write '" + path + "'");
    }
    csv << "t,U,Qdot,Wdot,diag_pop_flux,diag_energy_flux,coherence_flux,"
           "Qdot_naive,Wdot_naive,first_law_residual,tau,purity\n";
    for (const auto& row : rows) {
        const auto& s = row.s;
        csv << fmt17(s.t) << ',' << fmt17(hbar * row.u) << ',' << fmt17(hbar * s.q_dot) << ','
            << fmt17(hbar * s.w_dot) << ',' << fmt17(hbar * s.diag_pop_flux) << ','
            << fmt17(hbar * s.diag_energy_flux) << ',' << fmt17(hbar * s.coherence_flux) << ','
            << fmt17(hbar * s.q_dot_naive) << ',' << fmt17(hbar * s.w_dot_naive) << ','
            << fmt17(hbar * s.first_law_residual) << ','
            << (s.tau_adiabatic ? fmt17(*s.tau_adiabatic) : "nan") << ','
            << fmt17(row.state_purity) << '\n';
    }
}

ordered_json summary_to_json(const ScenarioConfig& c, const AuditSummary& s) {
    ordered_json j;
    j["scenario"] = to_string(c.kind);
    j["audit_tol"] = c.tolerances.audit_tol;
    j["max_first_law_residual"] = s.max_first_law_residual;
    j["max_q_dot"] = s.max_q_dot ? ordered_json(*s.max_q_dot) : ordered_json(nullptr);
    j["tau_max"] = s.tau_max ? ordered_json(*s.tau_max) : ordered_json(nullptr);
    j["max_identity_residuals"] = ordered_json::object();
    for (const auto& [name, value] : s.max_identity_residuals) {
        j["max_identity_residuals"][name] = value;
    }
    j["pass"] = ordered_json::object();
    for (const auto& [name, ok] : s.pass) {
        j["pass"][name] = ok;
    }
    j["all_pass"] = s.all_pass();
    return j;
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
    RunnerOutput out;
    switch (config.kind) {
        case ScenarioKind::two_level_exact: out = run_two_level(config, false); break;
        case ScenarioKind::two_level_numeric: out = run_two_level(config, true); break;
        case ScenarioKind::high_spin_exact: out = run_high_spin(config, false); break;
        case ScenarioKind::high_spin_numeric: out = run_high_spin(config, true); break;
        case ScenarioKind::isochoric: out = run_isochoric(config); break;
        case ScenarioKind::isothermal: out = run_isothermal(config); break;
        case ScenarioKind::identity_suite: out = run_identity_suite(config); break;
    }

    namespace fs = std::filesystem;
    fs::create_directories(config.output_path);
    ScenarioResult result;
    result.summary = out.summary;
    result.csv_path = (fs::path(config.output_path) / (to_string(config.kind) + ".csv")).string();
    result.summary_path =
        (fs::path(config.output_path) / (to_string(config.kind) + "_summary.json")).string();

    write_csv(result.csv_path, out.rows, config.hbar);
    std::ofstream summary(result.summary_path, std::ios::binary);
    if (!summary) {
        throw std::runtime_error("run_scenario: cannot write '" + result.summary_path + "'");
    }
    summary << summary_to_json(config, out.summary).dump(2) << '\n';
    return result;
}

bool SweepResult::all_pass() const {
    for (const auto& row : rows) {
        if (!row.all_pass()) return false;
    }
    return true;
}

void apply_cli_overrides(ScenarioConfig& config, const std::string& out_flag,
                         double tol_flag, double hbar_flag) {
    if (!out_flag.empty()) {
        config.output_path = out_flag;
    } else if (const char* env = std::getenv("COHERENT_FLUX_OUT"); env && *env) {
        config.output_path = env;
    }
    if (tol_flag > 0.0) config.tolerances.audit_tol = tol_flag;
    if (hbar_flag > 0.0) config.hbar = hbar_flag;
}

SweepResult run_sweep(const ScenarioConfig& base, const std::string& parameter,
                      const std::vector<double>& values) {
    {
        ScenarioConfig probe = base;
        probe.set_parameter(parameter, values.empty() ? 1.0 : values.front());
    }

    namespace fs = std::filesystem;
    fs::create_directories(base.output_path);
    SweepResult result;
    result.summary_csv_path =
        (fs::path(base.output_path) / ("sweep_" + parameter + ".csv")).string();

    std::ofstream csv(result.summary_csv_path, std::ios::binary);
    if (!csv) {
        throw std::runtime_error("run_sweep: cannot write '" + result.summary_csv_path + "'");
    }
    csv << "param,value,max_q_dot,tau_max,max_first_law_residual,all_pass\n";

    for (size_t i = 0; i < values.size(); ++i) {
        ScenarioConfig c = base;
        c.set_parameter(parameter, values[i]);
        c.output_path = (fs::path(base.output_path)
                         / ("sweep_" + parameter + "_" + std::to_string(i))).string();
        const ScenarioResult r = run_scenario(c);
        result.rows.push_back(r.summary);
        csv << parameter << ',' << fmt17(values[i]) << ','
            << (r.summary.max_q_dot ? fmt17(*r.summary.max_q_dot) : "nan") << ','
            << (r.summary.tau_max ? fmt17(*r.summary.tau_max) : "nan") << ','
            << fmt17(r.summary.max_first_law_residual) << ','
            << (r.summary.all_pass() ? '1' : '0') << '\n';
    }
    return result;
}

} // namespace cflux::scenario
