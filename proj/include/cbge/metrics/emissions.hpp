#pragma once

#include <map>
#include <string>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

namespace detail {

/// Everything needed to evaluate embodied emissions at one equilibrium:
/// physical emission intensities, revenue shares, and the matrix of flows
/// into the importer area (destinations inside, origins outside).
struct EeiState {
    Vec rho_tilde;  ///< tons per unit of output value, per cell
    Mat omega;      ///< revenue shares
    Mat x_eu;       ///< import flows into the area, intra-area excluded
};

inline Mat mask_import_flows(const WorldEconomy& econ, const Mat& flows, const BoolVec& area) {
    const int j = econ.dims.n_sectors;
    Mat masked = Mat::Zero(flows.rows(), flows.cols());
    for (int d = 0; d < flows.cols(); ++d) {
        if (!area[d / j]) continue;
        for (int o = 0; o < flows.rows(); ++o)
            if (!area[o / j]) masked(o, d) = flows(o, d);
    }
    return masked;
}

/// Emission change per cell, from the cost-minimization identity that
/// carbon payments are a fixed revenue share: e' = rho * sales' / t', so the
/// hat is the sales change deflated by the carbon-price change. The tracked
/// series is permit-priced emissions, matching how the tonnage data is
/// collected.
inline Vec emission_hats(const WorldEconomy& econ, const HatSolution& sol, const Vec& base_sales) {
    const int j = econ.dims.n_sectors;
    Vec e_hat(econ.cells());
    for (int f = 0; f < econ.cells(); ++f) {
        const int country = f / j;
        e_hat[f] = (sol.sales_prime[f] / base_sales[f]) / sol.t_hat[country];
    }
    return e_hat;
}

inline EeiState eei_state_baseline(const WorldEconomy& econ, const BoolVec& area) {
    SteadyStateAccounts acc = steady_state_accounts(econ);
    EeiState st;
    st.rho_tilde = (econ.emissions_tons.array() / acc.sales.array()).matrix();
    st.omega = econ.iota * econ.gamma_vec().asDiagonal();
    Mat flows = econ.iota * (econ.gamma_vec().array() * acc.sales.array()).matrix().asDiagonal();
    st.x_eu = mask_import_flows(econ, flows, area);
    return st;
}

inline EeiState eei_state(const WorldEconomy& econ, const HatSolution& sol) {
    SteadyStateAccounts acc = steady_state_accounts(econ);
    EeiState st;
    Vec e_prime = econ.emissions_tons.array() * emission_hats(econ, sol, acc.sales).array();
    st.rho_tilde = (e_prime.array() / sol.sales_prime.array()).matrix();
    st.omega = (sol.omega_tilde_prime.array() / sol.tau_tilde_prime.array()).matrix() *
               econ.gamma_vec().asDiagonal();
    Mat flows = sol.omega_tilde_prime *
                (econ.gamma_vec().array() * sol.sales_prime.array()).matrix().asDiagonal();
    st.x_eu = mask_import_flows(econ, flows, sol.importer_mask);
    return st;
}

/// EEI by origin cell, in tons: intensity times the gross output required to
/// serve the area's imports. `direct_only` drops all upstream propagation.
inline Vec eei_from_state(const EeiState& st, bool direct_only) {
    Vec import_demand = st.x_eu.rowwise().sum();
    if (direct_only) return st.rho_tilde.asDiagonal() * import_demand;
    ShareMatrices shares;
    shares.omega = st.omega;
    shares.omega_tilde = st.omega;  // unused by the inversion
    shares.gamma = Vec::Zero(st.omega.rows());
    Mat psi = leontief_inverse(shares);
    return st.rho_tilde.asDiagonal() * (psi * import_demand);
}

} // namespace detail

/// Emissions embodied in the importer area's imports, by origin cell (tons).
inline Vec eei(const WorldEconomy& econ, const HatSolution& sol, bool direct_only) {
    if (!sol.converged) throw ArgumentError("eei: solution has not converged");
    return detail::eei_from_state(detail::eei_state(econ, sol), direct_only);
}

/// Baseline EEI with destinations restricted to `area` (defaults to the ETS
/// area when called through the report helpers).
inline Vec eei_baseline(const WorldEconomy& econ, const BoolVec& area, bool direct_only) {
    return detail::eei_from_state(detail::eei_state_baseline(econ, area), direct_only);
}

enum class TaxonomyFilter { All, Clean, Dirty };

inline bool taxonomy_matches(const WorldEconomy& econ, int sector0, TaxonomyFilter f) {
    switch (f) {
        case TaxonomyFilter::All: return true;
        case TaxonomyFilter::Clean: return !econ.taxonomy.ets_flag[sector0];
        case TaxonomyFilter::Dirty: return econ.taxonomy.ets_flag[sector0];
    }
    return true;
}

/// Aggregates an EEI vector over origins outside the importer area,
/// optionally filtered by the origin sector's taxonomy.
inline double eei_aggregate(const WorldEconomy& econ, const Vec& eei_vec, const BoolVec& area,
                            TaxonomyFilter filter = TaxonomyFilter::All) {
    const int j = econ.dims.n_sectors;
    double total = 0.0;
    for (int f = 0; f < econ.cells(); ++f) {
        if (area[f / j]) continue;
        if (!taxonomy_matches(econ, f % j, filter)) continue;
        total += eei_vec[f];
    }
    return total;
}

struct LeakageResult {
    bool defined = false;  ///< false when no country has an exogenous carbon price
    double pct_change = 0.0;
};

/// Change in emissions of countries without a national carbon market, as a
/// percentage of their baseline emissions.
inline LeakageResult leakage(const WorldEconomy& econ, const HatSolution& sol) {
    if (!sol.converged) throw ArgumentError("leakage: solution has not converged");
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec e_hat = detail::emission_hats(econ, sol, acc.sales);
    const int j = econ.dims.n_sectors;
    double base = 0.0, change = 0.0;
    bool any = false;
    for (int i = 0; i < econ.dims.n_countries; ++i) {
        if (!is_priced(econ.carbon_regime[i])) continue;
        any = true;
        for (int jj = 0; jj < j; ++jj) {
            const int f = i * j + jj;
            base += econ.emissions_tons[f];
            change += econ.emissions_tons[f] * (e_hat[f] - 1.0);
        }
    }
    LeakageResult res;
    res.defined = any && base > 0.0;
    if (res.defined) res.pct_change = 100.0 * change / base;
    return res;
}

/// Split of an EEI change into a technology term (emission intensities move,
/// network fixed), a reallocation term (network moves, intensities fixed),
/// and the interaction residual. All terms are in tons and sum to the total
/// change by construction.
struct EeiDecomposition {
    double total = 0.0;
    double technology = 0.0;
    double reallocation = 0.0;
    double cross_residual = 0.0;
};

inline std::map<std::string, EeiDecomposition> decompose_eei(const WorldEconomy& econ,
                                                             const HatSolution& base_sol,
                                                             const HatSolution& cf_sol) {
    if (!base_sol.converged || !cf_sol.converged)
        throw ArgumentError("decompose_eei: both solutions must be converged");
    if (base_sol.importer_mask != cf_sol.importer_mask ||
        base_sol.sales_prime.size() != cf_sol.sales_prime.size())
        throw ArgumentError("decompose_eei: solutions come from mismatched scenarios");

    detail::EeiState base = detail::eei_state(econ, base_sol);
    detail::EeiState cf = detail::eei_state(econ, cf_sol);

    detail::EeiState tech = base;
    tech.rho_tilde = cf.rho_tilde;
    detail::EeiState realloc = cf;
    realloc.rho_tilde = base.rho_tilde;

    const BoolVec& area = base_sol.importer_mask;
    std::map<std::string, EeiDecomposition> out;
    for (auto [name, filter] :
         {std::pair{std::string("total"), TaxonomyFilter::All},
          std::pair{std::string("clean"), TaxonomyFilter::Clean},
          std::pair{std::string("dirty"), TaxonomyFilter::Dirty}}) {
        double e_base = eei_aggregate(econ, detail::eei_from_state(base, false), area, filter);
        double e_cf = eei_aggregate(econ, detail::eei_from_state(cf, false), area, filter);
        double e_tech = eei_aggregate(econ, detail::eei_from_state(tech, false), area, filter);
        double e_realloc =
            eei_aggregate(econ, detail::eei_from_state(realloc, false), area, filter);
        EeiDecomposition d;
        d.total = e_cf - e_base;
        d.technology = e_tech - e_base;
        d.reallocation = e_realloc - e_base;
        d.cross_residual = d.total - d.technology - d.reallocation;
        out[name] = d;
    }
    return out;
}

/// Full emissions block of a counterfactual run: EEI levels by origin,
/// aggregate percentage changes against the baseline, leakage, and the
/// technology/reallocation decomposition against the reference solution.
struct EmissionsReport {
    Vec eei_direct;   ///< counterfactual, tons by origin cell
    Vec eei_total;    ///< counterfactual, tons by origin cell
    std::map<std::string, double> direct_pct_change;  ///< total/clean/dirty
    std::map<std::string, double> total_pct_change;   ///< total/clean/dirty
    LeakageResult leakage_change;
    std::map<std::string, EeiDecomposition> decomposition;
};

inline EmissionsReport make_emissions_report(const WorldEconomy& econ,
                                             const HatSolution& base_sol,
                                             const HatSolution& cf_sol) {
    EmissionsReport rep;
    rep.eei_direct = eei(econ, cf_sol, true);
    rep.eei_total = eei(econ, cf_sol, false);
    Vec base_direct = eei(econ, base_sol, true);
    Vec base_total = eei(econ, base_sol, false);
    const BoolVec& area = cf_sol.importer_mask;
    for (auto [name, filter] :
         {std::pair{std::string("total"), TaxonomyFilter::All},
          std::pair{std::string("clean"), TaxonomyFilter::Clean},
          std::pair{std::string("dirty"), TaxonomyFilter::Dirty}}) {
        double bd = eei_aggregate(econ, base_direct, area, filter);
        double bt = eei_aggregate(econ, base_total, area, filter);
        rep.direct_pct_change[name] =
            bd > 0.0 ? 100.0 * (eei_aggregate(econ, rep.eei_direct, area, filter) / bd - 1.0)
                     : 0.0;
        rep.total_pct_change[name] =
            bt > 0.0 ? 100.0 * (eei_aggregate(econ, rep.eei_total, area, filter) / bt - 1.0)
                     : 0.0;
    }
    rep.leakage_change = leakage(econ, cf_sol);
    rep.decomposition = decompose_eei(econ, base_sol, cf_sol);
    return rep;
}

} // namespace cbge
