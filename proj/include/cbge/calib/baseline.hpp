#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

/// Environmental-policy shock used to roll the calibration year forward to
/// the policy baseline: per-country exponential emission-supply decay,
/// a cut in freely allocated allowances for ETS-area members, and a list of
/// countries whose carbon price is treated as exogenous regardless of
/// whether a market exists.
struct BaselineShock {
    Vec annual_reduction_rates;  ///< per country, fraction per year, in [0,1)
    int base_year = 2018;
    int target_year = 2024;
    double free_allowance_cut = 0.0;  ///< fraction of free allowances removed
    std::vector<int> exogenous_price_overrides;  ///< 1-based country indices

    double damping = 0.1;
    double tolerance = 1e-9;
    long max_iterations = 50000;

    void validate(const WorldEconomy& econ) const {
        if (annual_reduction_rates.size() != 0 &&
            annual_reduction_rates.size() != econ.dims.n_countries)
            throw ArgumentError("BaselineShock: reduction-rate length mismatch");
        for (Eigen::Index i = 0; i < annual_reduction_rates.size(); ++i)
            if (!(annual_reduction_rates[i] >= 0.0 && annual_reduction_rates[i] < 1.0))
                throw ArgumentError("BaselineShock: reduction rate out of [0,1) for country " +
                                    std::to_string(i + 1));
        if (base_year >= target_year)
            throw ArgumentError("BaselineShock: base_year must precede target_year");
        if (!(free_allowance_cut >= 0.0 && free_allowance_cut < 1.0))
            throw ArgumentError("BaselineShock: free_allowance_cut out of [0,1)");
        for (int c : exogenous_price_overrides)
            if (c < 1 || c > econ.dims.n_countries)
                throw ArgumentError("BaselineShock: override country out of range");
    }
};

/// Switches the listed countries to the exogenous-price regime at their
/// observed carbon rate. The steady state is unchanged: a country's carbon
/// income at unit prices equals its emission value under either regime.
inline WorldEconomy apply_regime_overrides(const WorldEconomy& econ,
                                           const std::vector<int>& countries) {
    WorldEconomy out = econ;
    for (int c : countries) {
        if (c < 1 || c > econ.dims.n_countries)
            throw ArgumentError("apply_regime_overrides: country out of range");
        out.carbon_regime[c - 1] = Priced{econ.observed_carbon_price[c - 1]};
    }
    return out;
}

/// Per-country emission-supply multipliers implied by the shock's
/// exponential decay, applied to carbon-market countries only.
inline Vec baseline_supply_multipliers(const WorldEconomy& econ, const BaselineShock& shock) {
    const int n = econ.dims.n_countries;
    const int years = shock.target_year - shock.base_year;
    Vec mult = Vec::Ones(n);
    if (shock.annual_reduction_rates.size() == 0) return mult;
    for (int i = 0; i < n; ++i)
        if (is_capped(econ.carbon_regime[i]))
            mult[i] = std::pow(1.0 - shock.annual_reduction_rates[i], years);
    return mult;
}

/// Rolls the calibrated economy forward through the policy shock and
/// re-normalizes the counterfactual equilibrium into a new steady state:
/// cost and consumption shares are re-read from the solved equilibrium,
/// endowments and supplies are re-valued at the new unit prices, observed
/// carbon prices of market countries scale with the solved price change,
/// and the emissions series scales with the solved emission change. The
/// emission elasticity is a technology and is unchanged by construction.
inline WorldEconomy build_baseline(const WorldEconomy& econ, const BaselineShock& shock,
                                   HatSolution* solution_out = nullptr) {
    shock.validate(econ);
    WorldEconomy base = apply_regime_overrides(econ, shock.exogenous_price_overrides);

    PolicyScenario scen;
    scen.name = "baseline_" + std::to_string(shock.target_year);
    scen.damping = shock.damping;
    scen.tolerance = shock.tolerance;
    scen.max_iterations = shock.max_iterations;
    scen.emission_supply_multipliers = baseline_supply_multipliers(base, shock);
    if (shock.free_allowance_cut > 0.0) {
        scen.allowance_cost_hat = Vec::Ones(base.cells());
        for (int f = 0; f < base.cells(); ++f) {
            const int country = f / base.dims.n_sectors;
            if (!base.eu_mask[country]) continue;
            const double eps = base.free_alloc[f];
            scen.allowance_cost_hat[f] = (1.0 - eps * (1.0 - shock.free_allowance_cut)) /
                                         (1.0 - eps);
        }
    }

    HatSolution sol = solve(base, scen);
    if (solution_out) *solution_out = sol;
    SteadyStateAccounts acc = steady_state_accounts(base);

    WorldEconomy next = base;
    next.iota = sol.omega_tilde_prime;
    next.chi = sol.alpha_prime;
    next.labor = (sol.w_hat.array() * base.labor.array()).matrix();
    for (int f = 0; f < base.cells(); ++f) {
        const int country = f / base.dims.n_sectors;
        if (base.eu_mask[country])
            next.free_alloc[f] = base.free_alloc[f] * (1.0 - shock.free_allowance_cut);
        next.emissions_tons[f] = base.emissions_tons[f] *
                                 (sol.sales_prime[f] / acc.sales[f]) / sol.t_hat[country];
    }
    for (int i = 0; i < base.dims.n_countries; ++i) {
        if (const auto* cap = std::get_if<Capped>(&base.carbon_regime[i])) {
            const double mult = scen.emission_supply_multipliers.size()
                                    ? scen.emission_supply_multipliers[i]
                                    : 1.0;
            next.carbon_regime[i] = Capped{sol.t_hat[i] * mult * cap->emission_supply};
            next.observed_carbon_price[i] = sol.t_hat[i] * base.observed_carbon_price[i];
        }
    }
    next.validate();
    return next;
}

} // namespace cbge
