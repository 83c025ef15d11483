#pragma once

#include <cmath>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

/// Per-country welfare block: nominal GNE, the CES consumption price index,
/// and the deflated (real) changes. Changes are percentages of the baseline.
struct WelfareReport {
    Vec gne_nominal_change;           ///< percent
    Vec gne_real_change;              ///< percent
    Vec real_wage_change;             ///< percent
    Vec consumption_price_index_hat;  ///< ratio
};

inline WelfareReport welfare(const WorldEconomy& econ, const HatSolution& sol) {
    if (!sol.converged) throw ArgumentError("welfare: solution has not converged");
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors;
    SteadyStateAccounts acc = steady_state_accounts(econ);

    WelfareReport rep;
    rep.gne_nominal_change = Vec(n);
    rep.gne_real_change = Vec(n);
    rep.real_wage_change = Vec(n);
    rep.consumption_price_index_hat = Vec(n);
    const double one_minus_sigma = 1.0 - econ.sigma;
    for (int i = 1; i <= n; ++i) {
        double idx = 0.0;
        for (int jj = 1; jj <= j; ++jj)
            idx += econ.chi(i - 1, jj - 1) *
                   std::pow(sol.p_hat[econ.dims.flat(i, jj)], one_minus_sigma);
        double p_hat_c = std::pow(idx, 1.0 / one_minus_sigma);
        double income_hat = sol.income_prime[i - 1] / acc.income[i - 1];
        rep.consumption_price_index_hat[i - 1] = p_hat_c;
        rep.gne_nominal_change[i - 1] = 100.0 * (income_hat - 1.0);
        rep.gne_real_change[i - 1] = 100.0 * (income_hat / p_hat_c - 1.0);
        rep.real_wage_change[i - 1] = 100.0 * (sol.w_hat[i - 1] / p_hat_c - 1.0);
    }
    return rep;
}

/// GNE-weighted aggregate of a per-country percent-change vector over a
/// country subset (e.g. the importer area or its complement).
inline double aggregate_change(const WorldEconomy& econ, const Vec& pct_change,
                               const BoolVec& subset, bool inside) {
    SteadyStateAccounts acc = steady_state_accounts(econ);
    double weight = 0.0, total = 0.0;
    for (int i = 0; i < econ.dims.n_countries; ++i) {
        if (subset[i] != inside) continue;
        weight += acc.income[i];
        total += acc.income[i] * pct_change[i];
    }
    return weight > 0.0 ? total / weight : 0.0;
}

} // namespace cbge
