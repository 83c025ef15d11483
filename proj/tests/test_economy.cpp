#include <catch2/catch_amalgamated.hpp>

#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/fixtures.hpp"

using namespace cbge;

TEST_CASE("leontief inverse of an empty network is the identity") {
    ShareMatrices s;
    s.omega = Mat::Zero(4, 4);
    s.omega_tilde = Mat::Zero(4, 4);
    s.gamma = Vec::Zero(4);
    Mat psi = leontief_inverse(s);
    CHECK((psi - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("one-cell economy reproduces the geometric series") {
    ShareMatrices s;
    s.omega = Mat::Constant(1, 1, 0.5);
    s.omega_tilde = Mat::Constant(1, 1, 1.0);
    s.gamma = Vec::Constant(1, 0.5);
    Mat psi = leontief_inverse(s);
    CHECK(psi(0, 0) == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("leontief inverse matches a truncated Neumann series") {
    ShareMatrices s;
    s.omega = Mat(2, 2);
    s.omega << 0.2, 0.1,
               0.3, 0.4;
    s.omega_tilde = s.omega;
    s.gamma = Vec::Zero(2);
    Mat psi = leontief_inverse(s);

    Mat series = Mat::Identity(2, 2);
    Mat power = Mat::Identity(2, 2);
    for (int m = 1; m <= 60; ++m) {
        power = power * s.omega;
        series += power;
    }
    CHECK((psi - series).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((psi * (Mat::Identity(2, 2) - s.omega) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK(psi.minCoeff() >= 0.0);
}

TEST_CASE("divergent networks are refused with the offending column named") {
    ShareMatrices s;
    s.omega = Mat(2, 2);
    s.omega << 0.9, 0.8,
               0.4, 0.6;
    s.omega_tilde = s.omega;
    s.gamma = Vec::Zero(2);
    CHECK_THROWS_AS(leontief_inverse(s), ModelIllPosedError);
    try {
        leontief_inverse(s);
    } catch (const ModelIllPosedError& err) {
        CHECK(std::string(err.what()).find("column") != std::string::npos);
    }
}

TEST_CASE("domar weights") {
    Vec sales = Vec::Constant(6, 2.0);
    Vec lambda = domar_weights(sales, 12.0);
    CHECK((lambda.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-15);

    sales[3] = 0.0;
    CHECK(domar_weights(sales, 12.0)[3] == 0.0);
    CHECK_THROWS_AS(domar_weights(sales, 0.0), InvalidStateError);
    CHECK_THROWS_AS(domar_weights(sales, -1.0), InvalidStateError);
}

TEST_CASE("domar weights satisfy the accounting identity on a solved steady state") {
    WorldEconomy econ = fixtures::three_by_two();
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec lambda = domar_weights(acc.sales, acc.world_gne);

    // lambda must solve lambda = Psi * (consumption expenditure / GNE).
    ShareMatrices shares = make_share_matrices(econ);
    Mat psi = leontief_inverse(shares);
    Vec final_share(econ.cells());
    for (int i = 1; i <= econ.dims.n_countries; ++i)
        for (int j = 1; j <= econ.dims.n_sectors; ++j)
            final_share[econ.dims.flat(i, j)] =
                econ.chi(i - 1, j - 1) * acc.income[i - 1] / acc.world_gne;
    CHECK((lambda - psi * final_share).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fixture economies validate and sit at an exact steady state") {
    for (const WorldEconomy& econ :
         {fixtures::two_by_two(), fixtures::three_by_two(), fixtures::four_by_three()}) {
        REQUIRE_NOTHROW(econ.validate());
        SteadyStateReport rep = steady_state_check(econ);
        INFO("max residual " << rep.max_residual());
        CHECK(rep.pass());
    }
}

TEST_CASE("random economies sit at an exact steady state") {
    for (unsigned seed : {1u, 2u, 3u, 7u, 11u, 23u, 101u, 2024u}) {
        WorldEconomy econ = fixtures::random_economy(seed, 3 + seed % 3, 1 + seed % 4);
        SteadyStateReport rep = steady_state_check(econ);
        INFO("seed " << seed << " max residual " << rep.max_residual());
        CHECK(rep.pass());

        ShareMatrices shares = make_share_matrices(econ);
        for (int d = 0; d < econ.cells(); ++d) {
            CHECK(std::abs(shares.omega_tilde.col(d).sum() - 1.0) < 1e-12);
            CHECK(std::abs(shares.omega.col(d).sum() - shares.gamma[d]) < 1e-12);
        }
        Mat psi = leontief_inverse(shares);
        CHECK((psi * (Mat::Identity(econ.cells(), econ.cells()) - shares.omega) -
               Mat::Identity(econ.cells(), econ.cells()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }
}

TEST_CASE("validation rejects a consumption row that does not sum to one") {
    WorldEconomy econ = fixtures::two_by_two();
    econ.chi(0, 0) = 0.4;  // row now sums to 0.85
    CHECK_THROWS_AS(econ.validate(), InvalidStateError);
    CHECK_THROWS_AS(steady_state_check(econ), InvalidStateError);
}

TEST_CASE("validation rejects malformed taxonomies and parameters") {
    WorldEconomy econ = fixtures::two_by_two();
    SECTION("reduced-CBAM flag outside the ETS set") {
        econ.taxonomy.cbam_reduced_flag = {false, true};
        CHECK_THROWS_AS(econ.validate(), InvalidStateError);
    }
    SECTION("iota column defect") {
        econ.iota(0, 1) += 0.01;
        CHECK_THROWS_AS(econ.validate(), InvalidStateError);
    }
    SECTION("theta at or below one") {
        econ.theta = 1.0;
        CHECK_THROWS_AS(econ.validate(), InvalidStateError);
    }
    SECTION("unbalanced deficits") {
        econ.deficits[0] += 1e-3;
        CHECK_THROWS_AS(econ.validate(), InvalidStateError);
    }
    SECTION("rho at one") {
        econ.rho[0] = 1.0;
        CHECK_THROWS_AS(econ.validate(), InvalidStateError);
    }
}
