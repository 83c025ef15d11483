#pragma once

#include <cmath>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/metrics/emissions.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

enum class OriginFilter { Foreign, Domestic };

/// Mean and population standard deviation of percentage changes across
/// country-industry observations.
struct ShareStats {
    double mean_pct = 0.0;
    double stdev_pct = 0.0;
    int observations = 0;
};

namespace detail {

inline ShareStats stats_from(const std::vector<double>& changes, const std::vector<double>& weights,
                             bool trade_weighted) {
    ShareStats s;
    s.observations = static_cast<int>(changes.size());
    if (changes.empty()) return s;
    double wsum = 0.0, mean = 0.0;
    for (size_t k = 0; k < changes.size(); ++k) {
        double w = trade_weighted ? weights[k] : 1.0;
        mean += w * changes[k];
        wsum += w;
    }
    mean /= wsum;
    double var = 0.0;
    for (size_t k = 0; k < changes.size(); ++k) {
        double w = trade_weighted ? weights[k] : 1.0;
        var += w * (changes[k] - mean) * (changes[k] - mean);
    }
    s.mean_pct = mean;
    s.stdev_pct = std::sqrt(var / wsum);
    return s;
}

} // namespace detail

/// Change in each origin cell's share of the importer area's total
/// intermediate-input purchases, split by foreign/domestic origin and by the
/// origin good's taxonomy. Means are unweighted across country-industry
/// cells; pass `trade_weighted` for baseline-share weighting.
inline ShareStats purchase_shares(const WorldEconomy& econ, const HatSolution& sol,
                                  OriginFilter origin, TaxonomyFilter taxonomy,
                                  bool trade_weighted = false) {
    if (!sol.converged) throw ArgumentError("purchase_shares: solution has not converged");
    const int j = econ.dims.n_sectors;
    const int nj = econ.cells();
    const BoolVec& area = sol.importer_mask;
    SteadyStateAccounts acc = steady_state_accounts(econ);

    // Materials spend per destination cell, baseline and counterfactual.
    Vec spend_base(nj), spend_cf(nj);
    double total_base = 0.0, total_cf = 0.0;
    for (int d = 0; d < nj; ++d) {
        bool in_area = area[d / j];
        spend_base[d] = in_area ? econ.gamma(d) * acc.sales[d] : 0.0;
        spend_cf[d] = in_area ? econ.gamma(d) * sol.sales_prime[d] : 0.0;
        total_base += spend_base[d];
        total_cf += spend_cf[d];
    }
    if (total_base <= 0.0)
        throw ArgumentError("purchase_shares: importer area has no intermediate purchases");

    std::vector<double> changes, weights;
    for (int o = 0; o < nj; ++o) {
        bool foreign = !area[o / j];
        if ((origin == OriginFilter::Foreign) != foreign) continue;
        if (!taxonomy_matches(econ, o % j, taxonomy)) continue;
        double base_share = 0.0, cf_share = 0.0;
        for (int d = 0; d < nj; ++d) {
            base_share += econ.iota(o, d) * spend_base[d];
            cf_share += sol.omega_tilde_prime(o, d) * spend_cf[d];
        }
        base_share /= total_base;
        cf_share /= total_cf;
        if (base_share <= 0.0) continue;
        changes.push_back(100.0 * (cf_share / base_share - 1.0));
        weights.push_back(base_share);
    }
    if (changes.empty())
        throw ArgumentError("purchase_shares: filter selects no country-industry cells");
    return detail::stats_from(changes, weights, trade_weighted);
}

/// Change in the importer area's Domar weights (sales over world GNE), by
/// sector taxonomy.
inline ShareStats domar_weight_changes(const WorldEconomy& econ, const HatSolution& sol,
                                       TaxonomyFilter taxonomy,
                                       bool trade_weighted = false) {
    if (!sol.converged) throw ArgumentError("domar_weight_changes: solution has not converged");
    const int j = econ.dims.n_sectors;
    const BoolVec& area = sol.importer_mask;
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec lambda_base = domar_weights(acc.sales, acc.world_gne);
    Vec lambda_cf = domar_weights(sol.sales_prime, sol.income_prime.sum());

    std::vector<double> changes, weights;
    for (int f = 0; f < econ.cells(); ++f) {
        if (!area[f / j]) continue;
        if (!taxonomy_matches(econ, f % j, taxonomy)) continue;
        if (lambda_base[f] <= 0.0) continue;
        changes.push_back(100.0 * (lambda_cf[f] / lambda_base[f] - 1.0));
        weights.push_back(lambda_base[f]);
    }
    if (changes.empty())
        throw ArgumentError("domar_weight_changes: filter selects no cells");
    return detail::stats_from(changes, weights, trade_weighted);
}

} // namespace cbge
