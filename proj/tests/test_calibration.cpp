#include <catch2/catch_amalgamated.hpp>
#include <filesystem>

#include "cbge/calib/ingest.hpp"
#include "cbge/fixtures.hpp"
#include "cbge/policy/solver.hpp"
#include "support/levels_oracle.hpp"

using namespace cbge;
namespace fs = std::filesystem;

namespace {

/// Hand-built symmetric raw tables: every intermediate flow equal, every
/// final flow equal, identical margins everywhere.
CalibrationInput symmetric_input() {
    CalibrationInput in;
    in.dims = Dimensions(2, 2);
    in.io.intermediate_flows = Mat::Constant(4, 4, 0.25);
    in.io.final_flows = Mat::Constant(4, 2, 0.5);
    in.io.gross_output = Vec::Constant(4, 4.0);
    in.io.value_added = Vec::Constant(4, 2.0);
    in.emissions.scope1_emissions = Vec::Constant(4, 0.001);
    in.emissions.effective_carbon_rate = Vec::Constant(2, 20.0);
    in.emissions.free_allowance_share = Vec::Zero(4);
    in.taxonomy.ets_flag = {true, false};
    in.taxonomy.cbam_reduced_flag = {true, false};
    in.countries = {{"AAA", true, true}, {"BBB", false, false}};
    in.sector_names = {"S1", "S2"};
    return in;
}

} // namespace

TEST_CASE("symmetric tables calibrate to uniform shares") {
    CalibrationInput in = symmetric_input();
    IngestStats stats;
    WorldEconomy econ = ingest(in, &stats);
    CHECK((econ.iota.array() - 0.25).abs().maxCoeff() < 1e-15);
    CHECK((econ.beta.array() - 0.5).abs().maxCoeff() < 1e-15);
    CHECK((econ.chi.array() - 0.5).abs().maxCoeff() < 1e-15);
    CHECK((econ.rho.array() - 20.0 * 0.001 / 4.0).abs().maxCoeff() < 1e-15);
    CHECK(stats.zero_output_imputed == 0);
    CHECK(steady_state_check(econ).pass());
}

TEST_CASE("zero gross output is imputed to one currency unit") {
    CalibrationInput in = symmetric_input();
    in.io.gross_output[2] = 0.0;
    in.io.value_added[2] = 0.0;
    IngestStats stats;
    WorldEconomy econ = ingest(in, &stats);
    CHECK(stats.zero_output_imputed == 1);
    // rho for the imputed cell uses the unit denominator
    CHECK(econ.rho[2] == Catch::Approx(20.0 * 0.001 / 1.0));
    CHECK(stats.beta_clipped >= 1);  // VA/GO = 0 clips up
}

TEST_CASE("oversized carbon payments are clipped with a count") {
    CalibrationInput in = symmetric_input();
    in.emissions.scope1_emissions[0] = 10.0;  // rho would be 20*10/4 = 50
    IngestStats stats;
    WorldEconomy econ = ingest(in, &stats);
    CHECK(stats.rho_clipped == 1);
    CHECK(econ.rho[0] == Catch::Approx(1.0 - 1e-6));
}

TEST_CASE("zero-emission data reduces to an emissions-free economy") {
    CalibrationInput in = symmetric_input();
    in.emissions.scope1_emissions = Vec::Zero(4);
    WorldEconomy econ = ingest(in);
    CHECK(econ.rho.cwiseAbs().maxCoeff() == 0.0);
    CHECK(steady_state_check(econ).pass());

    // The hat solver on this economy must match the levels oracle with the
    // emissions margin absent.
    PolicyScenario scen;
    scen.tariff_overrides.push_back({2, 1, 1, 1, 0.1});
    HatSolution sol = solve(econ, scen);
    Mat tau = Mat::Ones(4, 4);
    tau(econ.dims.flat(2, 1), econ.dims.flat(1, 1)) += 0.1;
    oracle::LevelsSolution lv = oracle::solve_levels(econ, tau, Vec::Ones(2), Vec::Ones(4));
    for (int i = 0; i < 2; ++i)
        CHECK(std::abs(sol.w_hat[i] - lv.wage[i]) < 1e-6);
    for (int f = 0; f < 4; ++f)
        CHECK(std::abs(sol.sales_prime[f] - lv.sales[f]) / lv.sales[f] < 1e-6);
}

TEST_CASE("a destination with no intermediate purchases is a calibration error") {
    CalibrationInput in = symmetric_input();
    in.io.intermediate_flows.col(1).setZero();
    try {
        ingest(in);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& err) {
        std::string msg = err.what();
        CHECK(msg.find("AAA") != std::string::npos);
        CHECK(msg.find("S2") != std::string::npos);
    }
}

TEST_CASE("de-meaned deficits sum to zero") {
    CalibrationInput in = symmetric_input();
    in.io.final_flows(0, 0) = 0.8;  // break symmetry
    WorldEconomy econ = ingest(in);
    CHECK(std::abs(compensated_sum(econ.deficits)) <=
          1e-15 * std::max(1.0, econ.deficits.cwiseAbs().sum()));
}

TEST_CASE("export and re-ingest reproduce the calibration") {
    fs::path dir = fs::temp_directory_path() / "cbge_roundtrip";
    fs::remove_all(dir);
    for (const WorldEconomy& econ :
         {fixtures::two_by_two(), fixtures::four_by_three(), fixtures::random_economy(42, 4, 3)}) {
        export_economy(econ, dir);
        CalibrationInput in = load_calibration(dir / "manifest.json");
        WorldEconomy back = ingest(in);

        REQUIRE(back.dims == econ.dims);
        for (int d = 0; d < econ.cells(); ++d)
            for (int o = 0; o < econ.cells(); ++o)
                CHECK(std::abs(back.iota(o, d) - econ.iota(o, d)) <=
                      1e-15 * std::max(1.0, std::abs(econ.iota(o, d))));
        CHECK((back.chi - econ.chi).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((back.beta - econ.beta).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((back.rho - econ.rho).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((back.labor - econ.labor).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((back.deficits - econ.deficits).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((back.emissions_tons - econ.emissions_tons).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(back.eu_mask == econ.eu_mask);
        for (int i = 0; i < econ.dims.n_countries; ++i) {
            CHECK(is_capped(back.carbon_regime[i]) == is_capped(econ.carbon_regime[i]));
            if (const auto* cap = std::get_if<Capped>(&econ.carbon_regime[i]))
                CHECK(std::get<Capped>(back.carbon_regime[i]).emission_supply ==
                      Catch::Approx(cap->emission_supply).margin(1e-12));
        }
        CHECK(steady_state_check(back).pass());
    }
    fs::remove_all(dir);
}

TEST_CASE("manifest errors are reported with the missing piece") {
    fs::path dir = fs::temp_directory_path() / "cbge_manifest_err";
    fs::remove_all(dir);
    export_economy(fixtures::two_by_two(), dir);

    SECTION("missing data file") {
        fs::remove(dir / "emissions.csv");
        try {
            load_calibration(dir / "manifest.json");
            FAIL("expected CalibrationError");
        } catch (const CalibrationError& err) {
            CHECK(std::string(err.what()).find("emissions.csv not found") != std::string::npos);
        }
    }
    SECTION("dimension metadata mismatch") {
        json manifest = detail::read_json_file(dir / "manifest.json");
        manifest["dimensions"]["countries"] = 5;
        std::ofstream(dir / "manifest.json") << manifest.dump(2);
        CHECK_THROWS_AS(load_calibration(dir / "manifest.json"), CalibrationError);
    }
    SECTION("missing manifest") {
        CHECK_THROWS_AS(load_calibration(dir / "nope.json"), CalibrationError);
    }
    fs::remove_all(dir);
}
