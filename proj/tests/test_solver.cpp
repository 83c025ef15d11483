#include <catch2/catch_amalgamated.hpp>

#include "cbge/fixtures.hpp"
#include "cbge/policy/solver.hpp"
#include "support/levels_oracle.hpp"

using namespace cbge;

namespace {

PolicyScenario off_scenario() {
    PolicyScenario s;
    s.name = "off";
    return s;
}

PolicyScenario tariff_scenario(double rate) {
    PolicyScenario s;
    s.name = "tariff";
    s.tariff_overrides.push_back({2, 1, 1, 1, rate});
    return s;
}

void check_closure(const HatSolution& sol) {
    REQUIRE(sol.converged);
    CHECK(sol.residuals.at("goods_market") < 1e-9);
    CHECK(sol.residuals.at("labor_market") < 1e-8);
    CHECK(sol.residuals.at("emission_market") < 1e-8);
    CHECK(sol.residuals.at("budget") < 1e-9);
    CHECK(sol.residuals.at("walras") < 1e-8);
    CHECK(sol.residuals.at("numeraire") < 1e-8);
}

} // namespace

TEST_CASE("off scenario reproduces the steady state in one outer iteration") {
    WorldEconomy econ = fixtures::three_by_two();
    HatSolution sol = solve(econ, off_scenario());
    REQUIRE(sol.converged);
    CHECK(sol.iterations <= 2);
    CHECK((sol.w_hat.array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK((sol.t_hat.array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK((sol.e_hat.array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK((sol.mc_hat.array() - 1.0).abs().maxCoeff() < 1e-10);
    for (const auto& [name, value] : sol.residuals) {
        INFO(name);
        CHECK(value < 1e-10);
    }
}

TEST_CASE("hat solution invariants hold at a converged tariff counterfactual") {
    WorldEconomy econ = fixtures::two_by_two();
    HatSolution sol = solve(econ, tariff_scenario(0.10));
    check_closure(sol);

    CHECK(sol.w_hat.minCoeff() > 0.0);
    CHECK(sol.t_hat.minCoeff() > 0.0);
    CHECK(sol.mc_hat.minCoeff() > 0.0);
    for (int d = 0; d < econ.cells(); ++d)
        CHECK(std::abs(sol.omega_tilde_prime.col(d).sum() - 1.0) < 1e-12);
    for (int i = 0; i < econ.dims.n_countries; ++i) {
        if (is_priced(econ.carbon_regime[i])) CHECK(sol.t_hat[i] == 1.0);
        if (is_capped(econ.carbon_regime[i])) CHECK(sol.e_hat[i] == 1.0);
    }
}

TEST_CASE("tariff counterfactual matches the independent levels solver") {
    WorldEconomy econ = fixtures::two_by_two();
    const double rate = 0.10;
    HatSolution sol = solve(econ, tariff_scenario(rate));
    check_closure(sol);

    Mat tau = Mat::Ones(econ.cells(), econ.cells());
    tau(econ.dims.flat(2, 1), econ.dims.flat(1, 1)) += rate;
    oracle::LevelsSolution lv = oracle::solve_levels(
        econ, tau, Vec::Ones(2), Vec::Ones(econ.cells()));

    SteadyStateAccounts base = steady_state_accounts(econ);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-12, std::abs(b)); };
    for (int i = 0; i < 2; ++i) {
        CHECK(rel(sol.w_hat[i], lv.wage[i]) < 1e-6);
        CHECK(rel(sol.t_hat[i], lv.carbon_price[i]) < 1e-6);
        CHECK(rel(sol.income_prime[i], lv.income[i]) < 1e-6);
    }
    for (int f = 0; f < econ.cells(); ++f) {
        CHECK(rel(sol.mc_hat[f], lv.mc[f]) < 1e-6);
        CHECK(rel(sol.P_hat[f], lv.price_index[f]) < 1e-6);
        CHECK(rel(sol.sales_prime[f], lv.sales[f]) < 1e-6);
        // Emission values: rho * sales equal t * e in both solutions.
        CHECK(rel(econ.rho[f] * sol.sales_prime[f], econ.rho[f] * lv.sales[f]) < 1e-6);
    }
    for (int o = 0; o < econ.cells(); ++o)
        for (int d = 0; d < econ.cells(); ++d)
            CHECK(std::abs(sol.omega_tilde_prime(o, d) - lv.omega_tilde(o, d)) < 1e-6);
}

TEST_CASE("exogenous CBAM matches the levels solver under the frozen wedge") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen;
    scen.name = "cbam_exog";
    scen.cbam_mode = CbamMode::FullExogenous;
    HatSolution sol = solve(econ, scen);
    check_closure(sol);

    // Frozen wedge priced at the pre-CBAM equilibrium (all hats one):
    // importer AAA (obs 50), exporter BBB (obs 10), ETS sector 1 only.
    const double nu = 50.0 / 10.0;
    Mat tau = Mat::Ones(4, 4);
    const int origin = econ.dims.flat(2, 1);
    for (int dj = 1; dj <= 2; ++dj)
        tau(origin, econ.dims.flat(1, dj)) += econ.rho[origin] * nu;
    CHECK((sol.tau_tilde_prime - tau).cwiseAbs().maxCoeff() < 1e-12);

    oracle::LevelsSolution lv =
        oracle::solve_levels(econ, tau, Vec::Ones(2), Vec::Ones(4));
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-12, std::abs(b)); };
    for (int i = 0; i < 2; ++i) CHECK(rel(sol.w_hat[i], lv.wage[i]) < 1e-6);
    for (int f = 0; f < 4; ++f) CHECK(rel(sol.sales_prime[f], lv.sales[f]) < 1e-6);
}

TEST_CASE("endogenous CBAM matches the levels solver with a price-responsive wedge") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen;
    scen.name = "cbam_endog";
    scen.cbam_mode = CbamMode::FullEndogenous;
    HatSolution sol = solve(econ, scen);
    check_closure(sol);

    const int origin = econ.dims.flat(2, 1);
    const double rho = econ.rho[origin];
    auto wedge_fn = [&](const Vec& t) {
        Mat tau = Mat::Ones(4, 4);
        const double nu = 50.0 / 10.0;
        if (t[0] * nu > t[1])
            for (int dj = 1; dj <= 2; ++dj)
                tau(origin, econ.dims.flat(1, dj)) += rho * (t[0] / t[1]) * nu;
        return tau;
    };
    oracle::LevelsSolution lv = oracle::solve_levels(econ, Mat(), Vec::Ones(2),
                                                     Vec::Ones(4), wedge_fn);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-12, std::abs(b)); };
    for (int i = 0; i < 2; ++i) {
        CHECK(rel(sol.w_hat[i], lv.wage[i]) < 1e-6);
        CHECK(rel(sol.t_hat[i], lv.carbon_price[i]) < 1e-6);
    }
    for (int f = 0; f < 4; ++f) CHECK(rel(sol.sales_prime[f], lv.sales[f]) < 1e-6);
}

TEST_CASE("fixed point verification is independent of the iteration path") {
    WorldEconomy econ = fixtures::four_by_three();
    PolicyScenario scen;
    scen.cbam_mode = CbamMode::FullEndogenous;
    HatSolution sol = solve(econ, scen);
    check_closure(sol);
    std::map<std::string, double> res = verify_solution(econ, scen, sol);
    for (const auto& [name, value] : res) {
        INFO(name);
        CHECK(value < scen.tolerance * 10);
    }
    // Tampering with the solution must show up in the residuals.
    HatSolution bad = sol;
    bad.w_hat[0] *= 1.01;
    std::map<std::string, double> res_bad = verify_solution(econ, scen, bad);
    CHECK(res_bad.at("input_cost") > 1e-4);
}

TEST_CASE("scaling the initial guess does not move the converged allocation") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen = tariff_scenario(0.10);
    HatSolution base = solve(econ, scen);
    for (double c : {0.5, 2.0, 10.0}) {
        HatSolution warm;
        warm.w_hat = Vec::Constant(2, c);
        warm.t_hat = Vec::Constant(2, c);
        warm.mc_hat = Vec::Ones(4);
        HatSolution sol = solve(econ, scen, warm);
        REQUIRE(sol.converged);
        CHECK((sol.w_hat - base.w_hat).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((sol.sales_prime - base.sales_prime).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((sol.omega_tilde_prime - base.omega_tilde_prime).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("halving the damping leaves the converged solution unchanged") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen = tariff_scenario(0.10);
    HatSolution a = solve(econ, scen);
    scen.damping = 0.05;
    HatSolution b = solve(econ, scen);
    CHECK((a.w_hat - b.w_hat).cwiseAbs().maxCoeff() < 2 * scen.tolerance);
    CHECK((a.t_hat - b.t_hat).cwiseAbs().maxCoeff() < 2 * scen.tolerance);
    CHECK((a.sales_prime - b.sales_prime).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("exogenous wedges are frozen across iterations") {
    WorldEconomy econ = fixtures::four_by_three();
    PolicyScenario scen;
    scen.cbam_mode = CbamMode::FullExogenous;
    HatSolution sol = solve(econ, scen);
    REQUIRE(sol.converged);
    detail::SolverContext ctx = detail::make_context(econ, scen);
    Mat frozen = (1.0 + detail::cbam_matrix(ctx, Vec::Ones(4)).array()).matrix();
    CHECK((sol.tau_tilde_prime - frozen).cwiseAbs().maxCoeff() == 0.0);

    // The endogenous twin re-prices: its wedge differs from the frozen one.
    PolicyScenario endog = scen;
    endog.cbam_mode = CbamMode::FullEndogenous;
    HatSolution sol_en = solve(econ, endog);
    CHECK((sol_en.tau_tilde_prime - frozen).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("warm starts shorten the path to the same fixed point") {
    WorldEconomy econ = fixtures::four_by_three();
    PolicyScenario scen;
    scen.cbam_mode = CbamMode::FullEndogenous;
    HatSolution cold = solve(econ, scen);
    HatSolution warm = solve(econ, scen, cold);
    REQUIRE(warm.converged);
    CHECK(warm.iterations < cold.iterations);
    CHECK((warm.w_hat - cold.w_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("random economies satisfy closure under random tariff shocks") {
    for (unsigned seed : {5u, 17u, 99u}) {
        WorldEconomy econ = fixtures::random_economy(seed, 3, 2);
        std::mt19937_64 rng(seed * 7 + 1);
        std::uniform_real_distribution<double> unif(0.02, 0.25);
        PolicyScenario scen;
        scen.tariff_overrides.push_back({3, 1, 1, 1, unif(rng)});
        scen.tariff_overrides.push_back({2, 2, 1, 2, unif(rng)});
        HatSolution sol = solve(econ, scen);
        check_closure(sol);
    }
}

TEST_CASE("solver errors carry diagnostics") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen = tariff_scenario(0.10);
    scen.max_iterations = 3;
    try {
        solve(econ, scen);
        FAIL("expected SolveError");
    } catch (const SolveError& err) {
        CHECK(err.iterations == 3);
        CHECK(err.residuals.count("update_gap") == 1);
        CHECK(err.residuals.at("update_gap") > scen.tolerance);
    }
}

TEST_CASE("scenario validation catches inconsistent requests") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen;
    scen.cbam_mode = CbamMode::ReducedEndogenous;
    scen.sector_set = {2};  // sector 2 is outside the ETS
    CHECK_THROWS_AS(solve(econ, scen), ArgumentError);

    PolicyScenario no_importer;
    no_importer.cbam_mode = CbamMode::FullEndogenous;
    WorldEconomy no_eu = econ;
    no_eu.eu_mask = {false, false};
    CHECK_THROWS_AS(solve(no_eu, no_importer), ArgumentError);

    PolicyScenario bad_damping;
    bad_damping.damping = 0.0;
    CHECK_THROWS_AS(solve(econ, bad_damping), ArgumentError);
}

TEST_CASE("solve refuses an economy that fails the steady-state check") {
    WorldEconomy econ = fixtures::two_by_two();
    econ.labor[0] *= 1.5;  // breaks labor-market clearing at unit prices
    CHECK_THROWS_AS(solve(econ, off_scenario()), InvalidStateError);
}

TEST_CASE("baseline income shares are usable for sensitivity at moderate tolerance") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario cf = tariff_scenario(0.01);
    HatSolution sol_cf = solve(econ, cf);

    PolicyScenario bl = cf;
    bl.income_share_mode = IncomeShareMode::Baseline;
    bl.tolerance = 1e-4;  // the printed income equation leaks revenue at O(wedge^2)
    bl.max_iterations = 5000;
    HatSolution sol_bl = solve(econ, bl);
    REQUIRE(sol_bl.converged);

    double gap = (sol_cf.w_hat - sol_bl.w_hat).cwiseAbs().maxCoeff();
    CHECK(gap > 0.0);
    CHECK(gap < 1e-3);  // the closure choice is a second-order effect
}
