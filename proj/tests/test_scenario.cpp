#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cflux/scenario.hpp"

using namespace cflux;
using scenario::ScenarioConfig;
using scenario::ScenarioKind;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("cflux_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ScenarioConfig small_two_level(const std::string& tag) {
    ScenarioConfig c;
    c.kind = ScenarioKind::two_level_exact;
    c.grid = {0.0, 14.414615682913361, 401};
    c.output_path = temp_dir(tag).string();
    return c;
}

// Column extraction from the flux CSV (header checked by the caller).
std::vector<double> csv_column(const std::string& text, int col) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        for (int i = 0; i <= col; ++i) std::getline(row, cell, ',');
        out.push_back(std::strtod(cell.c_str(), nullptr));
    }
    return out;
}

} // namespace

TEST_CASE("config parsing diagnostics") {
    CHECK_THROWS_AS(ScenarioConfig::from_json_text("{not json"), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json_text("{}"), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json_text(R"({"scenario_kind": "bogus"})"),
                    ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json_text(
                        R"({"scenario_kind": "two_level_exact", "model_params": {"omeag": 1}})"),
                    ConfigError);
    CHECK_THROWS_AS(
        ScenarioConfig::from_json_text(
            R"({"scenario_kind": "two_level_exact", "grid": {"t_start": 1, "t_end": 0}})"),
        ConfigError);
    CHECK_THROWS_AS(
        ScenarioConfig::from_json_text(
            R"({"scenario_kind": "two_level_exact", "grid": {"samples": 2}})"),
        ConfigError);
    CHECK_THROWS_AS(
        ScenarioConfig::from_json_text(
            R"({"scenario_kind": "isochoric", "model_params": {"init_kind": "warm"}})"),
        ConfigError);

    const ScenarioConfig c = ScenarioConfig::from_json_text(R"({
        "scenario_kind": "high_spin_exact",
        "model_params": {"twice_j": 4, "gamma_b0": 1.5, "theta": 0.7, "omega": 0.4, "twice_m": 2},
        "grid": {"t_start": 0.0, "t_end": 9.0, "samples": 333},
        "tolerances": {"integrator_tol": 1e-9, "audit_tol": 1e-7},
        "output_path": "somewhere",
        "hbar": 2.0
    })");
    CHECK(c.kind == ScenarioKind::high_spin_exact);
    CHECK(c.twice_j == 4);
    CHECK(c.gamma_b0 == 1.5);
    CHECK(c.grid.samples == 333);
    CHECK(c.tolerances.audit_tol == 1e-7);
    CHECK(c.hbar == 2.0);

    // Round trip through the serializer.
    const ScenarioConfig c2 = ScenarioConfig::from_json_text(c.to_json_text());
    CHECK(c2.theta == c.theta);
    CHECK(c2.output_path == c.output_path);
}

TEST_CASE("identical configs produce byte-identical outputs") {
    ScenarioConfig c = small_two_level("determinism_a");
    const auto r1 = scenario::run_scenario(c);
    const std::string csv1 = slurp(r1.csv_path);
    const std::string sum1 = slurp(r1.summary_path);

    c.output_path = temp_dir("determinism_b").string();
    const auto r2 = scenario::run_scenario(c);
    CHECK(csv1 == slurp(r2.csv_path));
    CHECK(sum1 == slurp(r2.summary_path));
}

TEST_CASE("flux CSV carries the pinned header and passes its own audits") {
    const ScenarioConfig c = small_two_level("csv_shape");
    const auto r = scenario::run_scenario(c);
    CHECK(r.summary.all_pass());

    const std::string text = slurp(r.csv_path);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,U,Qdot,Wdot,diag_pop_flux,diag_energy_flux,coherence_flux,"
                    "Qdot_naive,Wdot_naive,first_law_residual,tau,purity");

    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == c.grid.samples);

    // The headline columns: Qdot pinned to zero, naive heat visibly nonzero.
    const auto qdot = csv_column(text, 2);
    const auto qnaive = csv_column(text, 7);
    double max_q = 0.0, max_naive = 0.0;
    for (double v : qdot) max_q = std::max(max_q, std::abs(v));
    for (double v : qnaive) max_naive = std::max(max_naive, std::abs(v));
    CHECK(max_q < 1e-8);
    CHECK(max_naive > 0.1);
}

TEST_CASE("hbar rescales reported energies but not tau or purity") {
    ScenarioConfig c = small_two_level("hbar_one");
    const std::string csv1 = slurp(scenario::run_scenario(c).csv_path);

    c.output_path = temp_dir("hbar_two").string();
    c.hbar = 2.0;
    const std::string csv2 = slurp(scenario::run_scenario(c).csv_path);

    const auto u1 = csv_column(csv1, 1), u2 = csv_column(csv2, 1);
    const auto w1 = csv_column(csv1, 3), w2 = csv_column(csv2, 3);
    const auto tau1 = csv_column(csv1, 10), tau2 = csv_column(csv2, 10);
    for (size_t i = 0; i < u1.size(); ++i) {
        CHECK(u2[i] == doctest::Approx(2.0 * u1[i]).epsilon(1e-14));
        CHECK(w2[i] == doctest::Approx(2.0 * w1[i]).epsilon(1e-14));
        CHECK(tau2[i] == doctest::Approx(tau1[i]).epsilon(1e-14));
    }
}

TEST_CASE("every scenario kind runs clean end to end") {
    for (const auto kind : {ScenarioKind::two_level_exact, ScenarioKind::two_level_numeric,
                            ScenarioKind::high_spin_exact, ScenarioKind::high_spin_numeric}) {
        ScenarioConfig c;
        c.kind = kind;
        c.grid = {0.0, 12.0, 801};
        c.twice_j = 3;
        c.twice_m = 1;
        c.theta = 0.9;
        c.omega = 0.5;
        c.output_path = temp_dir("kind_" + scenario::to_string(kind)).string();
        const auto r = scenario::run_scenario(c);
        CHECK_MESSAGE(r.summary.all_pass(), scenario::to_string(kind));
    }
    {
        ScenarioConfig c;
        c.kind = ScenarioKind::isochoric;
        c.grid = {0.0, 30.0, 2001};
        c.output_path = temp_dir("kind_isochoric").string();
        CHECK(scenario::run_scenario(c).summary.all_pass());
    }
    {
        ScenarioConfig c;
        c.kind = ScenarioKind::isothermal;
        c.grid = {0.0, 10.0, 101};
        c.output_path = temp_dir("kind_isothermal").string();
        CHECK(scenario::run_scenario(c).summary.all_pass());
    }
    {
        ScenarioConfig c;
        c.kind = ScenarioKind::identity_suite;
        c.max_twice_j = 6; // keep the unit run quick; acceptance covers j ≤ 6
        c.grid = {0.0, 14.414615682913361, 401};
        c.output_path = temp_dir("kind_identity").string();
        CHECK(scenario::run_scenario(c).summary.all_pass());
    }
}

TEST_CASE("sweeps") {
    ScenarioConfig base = small_two_level("sweep_base");
    base.grid.samples = 201;

    SUBCASE("unknown parameter is rejected") {
        CHECK_THROWS_AS(scenario::run_sweep(base, "coupling_strength", {1.0}), ConfigError);
    }

    SUBCASE("empty value list produces an empty summary and succeeds") {
        const auto r = scenario::run_sweep(base, "omega", {});
        CHECK(r.rows.empty());
        CHECK(r.all_pass());
        const std::string text = slurp(r.summary_csv_path);
        CHECK(text == "param,value,max_q_dot,tau_max,max_first_law_residual,all_pass\n");
    }

    SUBCASE("omega sweep keeps heat at zero while tau crosses one") {
        const auto r = scenario::run_sweep(base, "omega", {0.01, 0.1, 0.6, 1.0, 2.0});
        REQUIRE(r.rows.size() == 5);
        CHECK(r.all_pass());
        for (const auto& row : r.rows) {
            REQUIRE(row.max_q_dot.has_value());
            CHECK(*row.max_q_dot < 1e-8);
        }
        CHECK(*r.rows.front().tau_max < 0.05);
        CHECK(*r.rows.back().tau_max > 0.5);
    }

    SUBCASE("alpha sweep scales the peak work flux as sin^2") {
        const std::vector<double> alphas = {0.0, M_PI / 6.0, M_PI / 4.0, M_PI / 3.0, M_PI / 2.0};
        const auto r = scenario::run_sweep(base, "alpha", alphas);
        REQUIRE(r.rows.size() == alphas.size());

        // Peak |Wdot| per run, read back from the per-value CSV files. The
        // window covers a couple of λ-periods, so the sampled peak sits close
        // to the amplitude (ω₁/2λ)ω²sin²α.
        std::vector<double> peaks;
        for (size_t i = 0; i < alphas.size(); ++i) {
            const std::string csv = slurp(
                (fs::path(base.output_path) / ("sweep_alpha_" + std::to_string(i))
                 / "two_level_exact.csv").string());
            double peak = 0.0;
            for (double w : csv_column(csv, 3)) peak = std::max(peak, std::abs(w));
            peaks.push_back(peak);
        }
        CHECK(peaks.front() < 1e-12); // sin(0) = 0
        for (size_t i = 1; i < alphas.size(); ++i) {
            const double lam_i = std::sqrt(base.omega * base.omega + 1.0
                                           - 2.0 * base.omega * std::cos(alphas[i]));
            const double expected = 0.5 / lam_i * base.omega * base.omega
                                    * std::pow(std::sin(alphas[i]), 2);
            CHECK(peaks[i] == doctest::Approx(expected).epsilon(0.01));
        }
    }
}

TEST_CASE("output directory override precedence") {
    ScenarioConfig c = small_two_level("override_config");
    const std::string from_env = temp_dir("override_env").string();
    const std::string from_flag = temp_dir("override_flag").string();

    setenv("COHERENT_FLUX_OUT", from_env.c_str(), 1);
    ScenarioConfig env_wins = c;
    scenario::apply_cli_overrides(env_wins, "", -1.0, -1.0);
    CHECK(env_wins.output_path == from_env);

    ScenarioConfig flag_wins = c;
    scenario::apply_cli_overrides(flag_wins, from_flag, 1e-7, 3.0);
    CHECK(flag_wins.output_path == from_flag);
    CHECK(flag_wins.tolerances.audit_tol == 1e-7);
    CHECK(flag_wins.hbar == 3.0);
    unsetenv("COHERENT_FLUX_OUT");

    ScenarioConfig config_wins = c;
    scenario::apply_cli_overrides(config_wins, "", -1.0, -1.0);
    CHECK(config_wins.output_path == c.output_path);
}
