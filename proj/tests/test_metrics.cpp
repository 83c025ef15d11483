#include <catch2/catch_amalgamated.hpp>

#include "cbge/fixtures.hpp"
#include "cbge/metrics/emissions.hpp"
#include "cbge/metrics/trade.hpp"
#include "cbge/metrics/welfare.hpp"
#include "cbge/policy/endogenous_gap.hpp"
#include "cbge/policy/solver.hpp"
#include "support/levels_oracle.hpp"

using namespace cbge;

namespace {

HatSolution solve_off(const WorldEconomy& econ) {
    PolicyScenario scen;
    scen.name = "off";
    return solve(econ, scen);
}

HatSolution solve_cbam(const WorldEconomy& econ, CbamMode mode) {
    PolicyScenario scen;
    scen.name = to_string(mode);
    scen.cbam_mode = mode;
    return solve(econ, scen);
}

} // namespace

TEST_CASE("EEI vanishes without trade into the importer area") {
    // Two countries, one sector, no cross-border intermediate flows.
    fixtures::EconomySpec s;
    s.dims = Dimensions(2, 1);
    s.iota = Mat::Identity(2, 2);
    s.beta = Vec::Constant(2, 0.5);
    s.phys_intensity = Vec::Constant(2, 0.001);
    s.chi = Mat::Ones(2, 1);
    s.gne = Vec::Constant(2, 1.0);
    s.observed_price = Vec::Constant(2, 10.0);
    s.capped = {true, false};
    s.eu = {true, false};
    s.taxonomy.ets_flag = {true};
    s.taxonomy.cbam_reduced_flag = {true};
    s.free_alloc = Vec::Zero(2);
    s.country_names = {"EUR", "XXX"};
    s.sector_names = {"S1"};
    WorldEconomy econ = fixtures::build(s);
    HatSolution sol = solve_off(econ);
    CHECK(eei(econ, sol, true).cwiseAbs().maxCoeff() == 0.0);
    CHECK(eei(econ, sol, false).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("direct EEI of a single export link is intensity times value") {
    WorldEconomy econ = fixtures::two_by_two();
    HatSolution sol = solve_off(econ);
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec direct = eei(econ, sol, true);
    for (int k = 1; k <= 2; ++k) {
        const int origin = econ.dims.flat(2, k);
        double flow = 0.0;  // exports from (BBB,k) into AAA destinations
        for (int jj = 1; jj <= 2; ++jj) {
            const int d = econ.dims.flat(1, jj);
            flow += econ.gamma(d) * econ.iota(origin, d) * acc.sales[d];
        }
        double intensity = econ.emissions_tons[origin] / acc.sales[origin];
        CHECK(direct[origin] == Catch::Approx(intensity * flow).epsilon(1e-12));
    }
    // Origins inside the area never enter the aggregates.
    CHECK(direct[econ.dims.flat(1, 1)] == 0.0);
}

TEST_CASE("total EEI matches a truncated supply-chain path expansion") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution sol = solve_cbam(econ, CbamMode::FullEndogenous);
    Vec total = eei(econ, sol, false);

    detail::EeiState st = detail::eei_state(econ, sol);
    Vec demand = st.x_eu.rowwise().sum();
    Vec acc = demand;
    Mat power = Mat::Identity(12, 12);
    for (int m = 1; m <= 40; ++m) {
        power = power * st.omega;
        acc += power * demand;
    }
    Vec oracle_total = st.rho_tilde.asDiagonal() * acc;
    CHECK((total - oracle_total).cwiseAbs().maxCoeff() < 1e-9);
    // Upstream content only adds emissions.
    Vec direct = eei(econ, sol, true);
    CHECK(((total - direct).array() >= -1e-15).all());
}

TEST_CASE("leakage is zero when nothing changes and signed components add up") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution off = solve_off(econ);
    LeakageResult l0 = leakage(econ, off);
    REQUIRE(l0.defined);
    CHECK(std::abs(l0.pct_change) < 1e-9);

    HatSolution cbam = solve_cbam(econ, CbamMode::FullEndogenous);
    LeakageResult l1 = leakage(econ, cbam);
    REQUIRE(l1.defined);
    CHECK(l1.pct_change != 0.0);

    // Decompose by country: the aggregate is the tons-weighted sum.
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec e_hat = detail::emission_hats(econ, cbam, acc.sales);
    double base = 0.0, change = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (!is_priced(econ.carbon_regime[i])) continue;
        for (int jj = 0; jj < 3; ++jj) {
            const int f = i * 3 + jj;
            base += econ.emissions_tons[f];
            change += econ.emissions_tons[f] * (e_hat[f] - 1.0);
        }
    }
    CHECK(l1.pct_change == Catch::Approx(100.0 * change / base).epsilon(1e-12));

    // The clean exporter prices carbon above the importer, so the wedge
    // exempts it; diverted demand raises its emissions while the dirty
    // exporter's fall, and the aggregate nets out negative.
    double cln = 0.0, drt = 0.0;
    for (int jj = 0; jj < 3; ++jj) {
        cln += econ.emissions_tons[2 * 3 + jj] * (e_hat[2 * 3 + jj] - 1.0);
        drt += econ.emissions_tons[1 * 3 + jj] * (e_hat[1 * 3 + jj] - 1.0);
    }
    CHECK(cln > 0.0);
    CHECK(drt < 0.0);
    CHECK(l1.pct_change < 0.0);
}

TEST_CASE("leakage is flagged undefined without exogenous-price countries") {
    WorldEconomy econ = fixtures::two_by_two();
    econ.carbon_regime[1] = Capped{steady_state_accounts(econ).emission_value[1]};
    HatSolution sol = solve_off(econ);
    CHECK_FALSE(leakage(econ, sol).defined);
}

TEST_CASE("purchase share changes are zero in the off scenario") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution off = solve_off(econ);
    for (auto origin : {OriginFilter::Foreign, OriginFilter::Domestic})
        for (auto tax : {TaxonomyFilter::All, TaxonomyFilter::Clean, TaxonomyFilter::Dirty}) {
            ShareStats st = purchase_shares(econ, off, origin, tax);
            CHECK(std::abs(st.mean_pct) < 1e-8);
            CHECK(st.observations > 0);
        }
}

TEST_CASE("CBAM pushes the importer toward domestic and cleaner foreign inputs") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution sol = solve_cbam(econ, CbamMode::FullEndogenous);
    ShareStats dirty_foreign = purchase_shares(econ, sol, OriginFilter::Foreign,
                                               TaxonomyFilter::Dirty);
    ShareStats domestic = purchase_shares(econ, sol, OriginFilter::Domestic,
                                          TaxonomyFilter::All);
    CHECK(dirty_foreign.mean_pct < 0.0);
    CHECK(domestic.mean_pct > 0.0);
    CHECK(dirty_foreign.stdev_pct > 0.0);

    // Trade weighting changes the estimate but not the direction here.
    ShareStats weighted = purchase_shares(econ, sol, OriginFilter::Foreign,
                                          TaxonomyFilter::Dirty, true);
    CHECK(weighted.mean_pct < 0.0);
}

TEST_CASE("empty purchase-share filters are an argument error") {
    WorldEconomy econ = fixtures::two_by_two();
    HatSolution off = solve_off(econ);
    // Sector 2 is clean; domestic+dirty picks only (AAA, S1)... make it empty
    // by asking for clean dirty-only cells of a taxonomy with no clean sector.
    WorldEconomy all_dirty = econ;
    all_dirty.taxonomy.ets_flag = {true, true};
    HatSolution sol = solve_off(all_dirty);
    CHECK_THROWS_AS(purchase_shares(all_dirty, sol, OriginFilter::Foreign,
                                    TaxonomyFilter::Clean),
                    ArgumentError);
}

TEST_CASE("welfare deflation identities") {
    WorldEconomy econ = fixtures::two_by_two();
    HatSolution off = solve_off(econ);

    // Uniform price change: real change is the nominal one deflated by it.
    HatSolution scaled = off;
    scaled.p_hat = Vec::Constant(4, 1.25);
    scaled.income_prime = off.income_prime * 1.10;
    WelfareReport rep = welfare(econ, scaled);
    for (int i = 0; i < 2; ++i) {
        CHECK(rep.consumption_price_index_hat[i] == Catch::Approx(1.25).epsilon(1e-12));
        CHECK(rep.gne_real_change[i] == Catch::Approx(100.0 * (1.10 / 1.25 - 1.0)).epsilon(1e-10));
        // log real = log nominal - log price index, exactly as computed
        double lhs = std::log(1.0 + rep.gne_real_change[i] / 100.0);
        double rhs = std::log(1.0 + rep.gne_nominal_change[i] / 100.0) -
                     std::log(rep.consumption_price_index_hat[i]);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("welfare matches direct utility evaluation from the levels oracle") {
    WorldEconomy econ = fixtures::two_by_two();
    PolicyScenario scen;
    scen.tariff_overrides.push_back({2, 1, 1, 1, 0.10});
    HatSolution sol = solve(econ, scen);
    WelfareReport rep = welfare(econ, sol);

    Mat tau = Mat::Ones(4, 4);
    tau(econ.dims.flat(2, 1), econ.dims.flat(1, 1)) += 0.10;
    oracle::LevelsSolution lv = oracle::solve_levels(econ, tau, Vec::Ones(2), Vec::Ones(4));
    SteadyStateAccounts acc = steady_state_accounts(econ);
    for (int i = 0; i < 2; ++i) {
        Vec base_consumption(4);
        for (int jj = 0; jj < 2; ++jj)
            base_consumption[i * 2 + jj] = econ.chi(i, jj) * acc.income[i];
        double u_hat = oracle::utility(econ, i, lv.consumption) /
                       oracle::utility(econ, i, base_consumption);
        CHECK(rep.gne_real_change[i] == Catch::Approx(100.0 * (u_hat - 1.0)).margin(1e-6));
    }
}

TEST_CASE("EEI decomposition closes and isolates its two margins") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution base = solve_off(econ);
    HatSolution cbam = solve_cbam(econ, CbamMode::FullEndogenous);

    SECTION("identical solutions give all zeros") {
        auto dec = decompose_eei(econ, base, base);
        for (const auto& [name, d] : dec) {
            CHECK(d.total == 0.0);
            CHECK(d.technology == 0.0);
            CHECK(d.reallocation == 0.0);
            CHECK(d.cross_residual == 0.0);
        }
    }
    SECTION("closure holds exactly by construction") {
        auto dec = decompose_eei(econ, base, cbam);
        for (const auto& [name, d] : dec) {
            CHECK(std::abs(d.total - (d.technology + d.reallocation + d.cross_residual)) <
                  1e-12 * std::max(1.0, std::abs(d.total)));
        }
    }
    SECTION("intensity-only changes leave reallocation at zero") {
        HatSolution tweaked = base;
        tweaked.t_hat[3] = 1.2;  // moves an exporter's rho-tilde, network fixed
        auto dec = decompose_eei(econ, base, tweaked);
        CHECK(dec.at("total").reallocation == 0.0);
        CHECK(dec.at("total").technology != 0.0);
    }
    SECTION("mismatched solutions are rejected") {
        HatSolution other = cbam;
        other.importer_mask = BoolVec{false, true, false, false};
        CHECK_THROWS_AS(decompose_eei(econ, base, other), ArgumentError);
    }
}

TEST_CASE("attenuation: upstream substitution dampens the total EEI response") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution base = solve_off(econ);
    HatSolution cbam = solve_cbam(econ, CbamMode::FullEndogenous);
    EmissionsReport rep = make_emissions_report(econ, base, cbam);
    CHECK(rep.direct_pct_change.at("total") < 0.0);
    CHECK(std::abs(rep.total_pct_change.at("total")) <=
          std::abs(rep.direct_pct_change.at("total")));
}

TEST_CASE("zero-trade origins contribute nothing to any EEI aggregate") {
    // CLN sells nothing into EUR: zero out those cells and renormalize.
    WorldEconomy base = fixtures::four_by_three();
    fixtures::EconomySpec s;
    s.dims = base.dims;
    s.iota = base.iota;
    for (int jj = 0; jj < 3; ++jj)          // CLN origin cells
        for (int d = 0; d < 3; ++d)          // EUR destination cells
            s.iota(2 * 3 + jj, d) = 0.0;
    s.beta = base.beta;
    s.phys_intensity = (base.emissions_tons.array() /
                        steady_state_accounts(base).sales.array()).matrix();
    s.chi = base.chi;
    s.gne = Vec::Constant(4, 1.5);
    s.observed_price = base.observed_carbon_price;
    s.capped = {true, false, false, true};
    s.eu = base.eu_mask;
    s.taxonomy = base.taxonomy;
    s.free_alloc = base.free_alloc;
    s.country_names = base.country_names;
    s.sector_names = base.sector_names;
    WorldEconomy econ = fixtures::build(s);
    HatSolution sol = solve_cbam(econ, CbamMode::FullEndogenous);
    Vec direct = eei(econ, sol, true);
    for (int jj = 0; jj < 3; ++jj) CHECK(direct[2 * 3 + jj] == 0.0);
}

TEST_CASE("endogenous adjustment amplifies the exogenous effect") {
    WorldEconomy econ = fixtures::four_by_three();
    HatSolution base = solve_off(econ);
    PolicyScenario en, ex;
    en.cbam_mode = CbamMode::FullEndogenous;
    ex.cbam_mode = CbamMode::FullExogenous;
    HatSolution sol_en = solve(econ, en);
    HatSolution sol_ex = solve(econ, ex);

    SECTION("identical solutions give zero gaps") {
        auto gaps = endogenous_gap(econ, en, sol_en, ex, sol_en, base);
        for (const auto& [k, v] : gaps) CHECK(std::abs(v) < 1e-12);
    }
    SECTION("the dirty-exporter fixture shows a sign-consistent amplification") {
        auto gaps = endogenous_gap(econ, en, sol_en, ex, sol_ex, base);
        // Dirty foreign purchases fall more under the endogenous wedge.
        ShareStats f_en = purchase_shares(econ, sol_en, OriginFilter::Foreign,
                                          TaxonomyFilter::Dirty);
        ShareStats f_ex = purchase_shares(econ, sol_ex, OriginFilter::Foreign,
                                          TaxonomyFilter::Dirty);
        CHECK(f_en.mean_pct < 0.0);
        CHECK(std::abs(f_en.mean_pct) >= std::abs(f_ex.mean_pct));
        CHECK(gaps.at("foreign_share_dirty") < 0.0);  // more negative than exogenous
        CHECK(gaps.count("eei_direct_pct") == 1);
    }
    SECTION("mismatched pairs are rejected") {
        PolicyScenario wrong = ex;
        wrong.cbam_mode = CbamMode::ReducedExogenous;
        HatSolution sol_wrong = solve(econ, wrong);
        CHECK_THROWS_AS(endogenous_gap(econ, en, sol_en, wrong, sol_wrong, base),
                        ArgumentError);
    }
}
