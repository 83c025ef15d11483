#pragma once

#include <random>
#include <string>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"
#include "cbge/core/steady_state.hpp"

namespace cbge::fixtures {

/// Primitive description of a synthetic economy. Sales, endowments, and
/// deficits are derived so the result is an exact steady state: sales solve
/// the goods-market system at the target incomes, and factor endowments are
/// read off the solved sales.
struct EconomySpec {
    Dimensions dims;
    Mat iota;            ///< column-stochastic input weights
    Vec beta;            ///< labor shares per cell
    Vec phys_intensity;  ///< tons of CO2e per unit of output value
    Mat chi;             ///< consumption weights, rows sum to one
    Vec gne;             ///< target income per country
    Vec observed_price;  ///< currency per ton
    BoolVec capped;
    BoolVec eu;
    SectorTaxonomy taxonomy;
    Vec free_alloc;
    double theta = 4.0;
    double sigma = 4.0;
    std::vector<std::string> country_names;
    std::vector<std::string> sector_names;
};

inline WorldEconomy build(const EconomySpec& spec) {
    const int n = spec.dims.n_countries;
    const int j = spec.dims.n_sectors;
    const int nj = spec.dims.size();

    WorldEconomy econ;
    econ.dims = spec.dims;
    econ.iota = spec.iota;
    for (int d = 0; d < nj; ++d) econ.iota.col(d) /= econ.iota.col(d).sum();
    econ.beta = spec.beta;
    econ.rho = Vec(nj);
    for (int f = 0; f < nj; ++f) {
        const int country = f / j;
        econ.rho[f] = std::min(spec.phys_intensity[f] * spec.observed_price[country], 1.0 - 1e-6);
    }
    econ.chi = spec.chi;
    for (int i = 0; i < n; ++i) econ.chi.row(i) /= econ.chi.row(i).sum();
    econ.free_alloc = spec.free_alloc;
    econ.observed_carbon_price = spec.observed_price;
    econ.theta = spec.theta;
    econ.sigma = spec.sigma;
    econ.taxonomy = spec.taxonomy;
    econ.eu_mask = spec.eu;
    econ.country_names = spec.country_names;
    econ.sector_names = spec.sector_names;

    // Goods-market solve at unit prices with income pinned at the target GNE.
    Mat omega = econ.iota * econ.gamma_vec().asDiagonal();
    Vec b(nj);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            b[spec.dims.flat(i, jj)] = econ.chi(i - 1, jj - 1) * spec.gne[i - 1];
    Vec sales = detail::solve_linear(Mat::Identity(nj, nj) - omega, b);
    if ((sales.array() <= 0.0).any())
        throw InvalidStateError("fixture build: nonpositive steady-state sales; "
                                "spec is economically inconsistent");

    econ.labor = Vec::Zero(n);
    Vec emission_value = Vec::Zero(n);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj) {
            const int f = spec.dims.flat(i, jj);
            econ.labor[i - 1] += econ.beta[f] * (1.0 - econ.rho[f]) * sales[f];
            emission_value[i - 1] += econ.rho[f] * sales[f];
        }
    econ.deficits = spec.gne - econ.labor - emission_value;
    econ.deficits.array() -= compensated_sum(econ.deficits) / n;
    econ.deficits.array() -= compensated_sum(econ.deficits) / n;

    econ.carbon_regime.resize(n);
    for (int i = 0; i < n; ++i) {
        if (spec.capped[i])
            econ.carbon_regime[i] = Capped{emission_value[i]};
        else
            econ.carbon_regime[i] = Priced{spec.observed_price[i]};
    }
    econ.emissions_tons = (spec.phys_intensity.array() * sales.array()).matrix();

    econ.validate();
    return econ;
}

/// Two countries, two sectors; country A runs a carbon market and belongs to
/// the ETS area. Used for levels-oracle comparisons.
inline WorldEconomy two_by_two() {
    EconomySpec s;
    s.dims = Dimensions(2, 2);
    s.iota = Mat(4, 4);
    s.iota << 0.35, 0.30, 0.20, 0.15,
              0.25, 0.30, 0.20, 0.25,
              0.25, 0.20, 0.35, 0.25,
              0.15, 0.20, 0.25, 0.35;
    s.beta = Vec(4);
    s.beta << 0.45, 0.55, 0.40, 0.50;
    s.phys_intensity = Vec(4);
    s.phys_intensity << 0.0008, 0.0003, 0.0030, 0.0010;
    s.chi = Mat(2, 2);
    s.chi << 0.55, 0.45,
             0.50, 0.50;
    s.gne = Vec(2);
    s.gne << 1.2, 1.0;
    s.observed_price = Vec(2);
    s.observed_price << 50.0, 10.0;
    s.capped = {true, false};
    s.eu = {true, false};
    s.taxonomy.ets_flag = {true, false};
    s.taxonomy.cbam_reduced_flag = {true, false};
    s.free_alloc = Vec(4);
    s.free_alloc << 0.30, 0.0, 0.0, 0.0;
    s.country_names = {"AAA", "BBB"};
    s.sector_names = {"HVY", "SRV"};
    return build(s);
}

/// Three countries, two sectors, mixed regimes. Used for comparative-statics
/// validation against the nonlinear solver.
inline WorldEconomy three_by_two() {
    EconomySpec s;
    s.dims = Dimensions(3, 2);
    s.iota = Mat(6, 6);
    s.iota << 0.30, 0.22, 0.12, 0.10, 0.10, 0.08,
              0.20, 0.30, 0.10, 0.12, 0.08, 0.12,
              0.15, 0.12, 0.32, 0.20, 0.12, 0.10,
              0.10, 0.14, 0.20, 0.32, 0.10, 0.12,
              0.15, 0.10, 0.14, 0.12, 0.35, 0.23,
              0.10, 0.12, 0.12, 0.14, 0.25, 0.35;
    s.beta = Vec(6);
    s.beta << 0.45, 0.55, 0.42, 0.52, 0.38, 0.50;
    s.phys_intensity = Vec(6);
    s.phys_intensity << 0.0005, 0.0001, 0.0012, 0.0002, 0.0040, 0.0008;
    s.chi = Mat(3, 2);
    s.chi << 0.50, 0.50,
             0.55, 0.45,
             0.60, 0.40;
    s.gne = Vec(3);
    s.gne << 1.4, 1.2, 1.0;
    s.observed_price = Vec(3);
    s.observed_price << 60.0, 25.0, 5.0;
    s.capped = {true, false, false};
    s.eu = {true, false, false};
    s.taxonomy.ets_flag = {true, false};
    s.taxonomy.cbam_reduced_flag = {true, false};
    s.free_alloc = Vec(6);
    s.free_alloc << 0.25, 0.0, 0.0, 0.0, 0.0, 0.0;
    s.country_names = {"EUR", "USA", "CHN"};
    s.sector_names = {"HVY", "SRV"};
    return build(s);
}

/// Four countries, three sectors: an ETS-area importer, a dirty low-price
/// exporter, a cleaner high-price exporter, and a third country with its own
/// carbon market. Used for the qualitative sign suite and the scenario suite.
inline WorldEconomy four_by_three() {
    EconomySpec s;
    s.dims = Dimensions(4, 3);
    const int nj = 12;
    s.iota = Mat::Zero(nj, nj);
    // Column blocks by destination country; entries by origin cell.
    // Home bias plus heavier reliance of heavy industry on foreign heavy inputs.
    auto col = [&](int dest, std::initializer_list<double> weights) {
        int o = 0;
        for (double w : weights) s.iota(o++, dest) = w;
    };
    //            EUR.H EUR.M EUR.S DRT.H DRT.M DRT.S CLN.H CLN.M CLN.S OTH.H OTH.M OTH.S
    col(0,  {0.30, 0.12, 0.15, 0.07, 0.02, 0.01, 0.10, 0.03, 0.01, 0.12, 0.04, 0.03});  // -> EUR HVY
    col(1,  {0.12, 0.30, 0.13, 0.05, 0.04, 0.01, 0.09, 0.04, 0.01, 0.09, 0.09, 0.03});  // -> EUR MFG
    col(2,  {0.06, 0.08, 0.46, 0.03, 0.03, 0.04, 0.03, 0.03, 0.04, 0.04, 0.04, 0.12});  // -> EUR SRV
    col(3,  {0.03, 0.02, 0.03, 0.33, 0.13, 0.13, 0.06, 0.04, 0.02, 0.06, 0.05, 0.10});  // -> DRT HVY
    col(4,  {0.02, 0.03, 0.03, 0.17, 0.29, 0.12, 0.05, 0.05, 0.02, 0.05, 0.07, 0.10});  // -> DRT MFG
    col(5,  {0.02, 0.02, 0.05, 0.12, 0.11, 0.38, 0.03, 0.03, 0.04, 0.04, 0.04, 0.12});  // -> DRT SRV
    col(6,  {0.03, 0.03, 0.03, 0.10, 0.05, 0.02, 0.30, 0.14, 0.10, 0.06, 0.05, 0.09});  // -> CLN HVY
    col(7,  {0.02, 0.03, 0.03, 0.07, 0.07, 0.02, 0.15, 0.30, 0.10, 0.05, 0.06, 0.10});  // -> CLN MFG
    col(8,  {0.02, 0.02, 0.04, 0.04, 0.04, 0.03, 0.11, 0.11, 0.38, 0.03, 0.04, 0.14});  // -> CLN SRV
    col(9,  {0.03, 0.03, 0.03, 0.10, 0.05, 0.03, 0.06, 0.04, 0.02, 0.31, 0.15, 0.15});  // -> OTH HVY
    col(10, {0.02, 0.03, 0.03, 0.07, 0.07, 0.03, 0.05, 0.05, 0.02, 0.15, 0.32, 0.16});  // -> OTH MFG
    col(11, {0.02, 0.02, 0.04, 0.04, 0.04, 0.04, 0.03, 0.03, 0.04, 0.11, 0.12, 0.47});  // -> OTH SRV

    s.beta = Vec(nj);
    s.beta << 0.40, 0.45, 0.58,
              0.36, 0.42, 0.55,
              0.42, 0.46, 0.58,
              0.40, 0.44, 0.56;
    s.phys_intensity = Vec(nj);
    s.phys_intensity << 0.00180, 0.00050, 0.00008,   // EUR: dirty home heavy industry
                        0.00210, 0.00095, 0.00018,   // DRT: carbon-heavy technology
                        0.00080, 0.00018, 0.00004,   // CLN
                        0.00180, 0.00075, 0.00012;   // OTH
    s.chi = Mat(4, 3);
    s.chi << 0.28, 0.30, 0.42,
             0.32, 0.30, 0.38,
             0.28, 0.30, 0.42,
             0.30, 0.30, 0.40;
    s.gne = Vec(4);
    s.gne << 3.0, 2.0, 2.0, 2.2;
    s.observed_price = Vec(4);
    s.observed_price << 40.0, 8.0, 45.0, 25.0;
    s.capped = {true, false, false, true};
    s.eu = {true, false, false, false};
    s.taxonomy.ets_flag = {true, true, false};
    s.taxonomy.cbam_reduced_flag = {true, false, false};
    s.free_alloc = Vec(nj);
    s.free_alloc << 0.30, 0.20, 0.0,
                    0.0, 0.0, 0.0,
                    0.0, 0.0, 0.0,
                    0.10, 0.05, 0.0;
    s.country_names = {"EUR", "DRT", "CLN", "OTH"};
    s.sector_names = {"HVY", "MFG", "SRV"};
    return build(s);
}

/// Seeded random economy for property-style tests.
inline WorldEconomy random_economy(unsigned seed, int n = 3, int j = 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    EconomySpec s;
    s.dims = Dimensions(n, j);
    const int nj = n * j;
    s.iota = Mat(nj, nj);
    for (int d = 0; d < nj; ++d) {
        for (int o = 0; o < nj; ++o) {
            double w = 0.05 + unif(rng);
            if (o / j == d / j) w += 0.8;  // home bias
            s.iota(o, d) = w;
        }
        s.iota.col(d) /= s.iota.col(d).sum();
    }
    s.beta = Vec(nj);
    s.phys_intensity = Vec(nj);
    for (int f = 0; f < nj; ++f) {
        s.beta[f] = 0.30 + 0.35 * unif(rng);
        s.phys_intensity[f] = 0.0002 + 0.002 * unif(rng);
    }
    s.chi = Mat(n, j);
    for (int i = 0; i < n; ++i) {
        for (int jj = 0; jj < j; ++jj) s.chi(i, jj) = 0.2 + unif(rng);
        s.chi.row(i) /= s.chi.row(i).sum();
    }
    s.gne = Vec(n);
    s.observed_price = Vec(n);
    s.capped.resize(n);
    s.eu.resize(n);
    for (int i = 0; i < n; ++i) {
        s.gne[i] = 0.8 + 1.5 * unif(rng);
        s.observed_price[i] = 5.0 + 60.0 * unif(rng);
        s.capped[i] = unif(rng) < 0.5;
        s.eu[i] = false;
    }
    s.capped[0] = true;   // always at least one carbon market
    s.eu[0] = true;
    s.capped[n - 1] = false;
    s.taxonomy.ets_flag.assign(j, false);
    s.taxonomy.cbam_reduced_flag.assign(j, false);
    s.taxonomy.ets_flag[0] = true;
    s.taxonomy.cbam_reduced_flag[0] = true;
    s.free_alloc = Vec::Zero(nj);
    for (int jj = 0; jj < j; ++jj)
        if (s.taxonomy.ets_flag[jj]) s.free_alloc[jj] = 0.3 * unif(rng);
    s.country_names.resize(n);
    s.sector_names.resize(j);
    for (int i = 0; i < n; ++i) s.country_names[i] = "C" + std::to_string(i + 1);
    for (int jj = 0; jj < j; ++jj) s.sector_names[jj] = "S" + std::to_string(jj + 1);
    return build(s);
}

} // namespace cbge::fixtures
