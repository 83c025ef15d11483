#pragma once

#include <map>
#include <string>

#include "cbge/metrics/emissions.hpp"
#include "cbge/metrics/trade.hpp"
#include "cbge/metrics/welfare.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

namespace detail {

inline CbamMode exogenous_twin(CbamMode m) {
    switch (m) {
        case CbamMode::ReducedEndogenous: return CbamMode::ReducedExogenous;
        case CbamMode::FullEndogenous: return CbamMode::FullExogenous;
        default: return m;
    }
}

} // namespace detail

/// Registered scalar outcomes compared across solutions: purchase-share
/// means, EEI changes, leakage, and area welfare.
inline std::map<std::string, double> scenario_metrics(const WorldEconomy& econ,
                                                      const HatSolution& base_sol,
                                                      const HatSolution& sol) {
    std::map<std::string, double> m;
    m["foreign_share_total"] =
        purchase_shares(econ, sol, OriginFilter::Foreign, TaxonomyFilter::All).mean_pct;
    m["foreign_share_clean"] =
        purchase_shares(econ, sol, OriginFilter::Foreign, TaxonomyFilter::Clean).mean_pct;
    m["foreign_share_dirty"] =
        purchase_shares(econ, sol, OriginFilter::Foreign, TaxonomyFilter::Dirty).mean_pct;
    m["domestic_share_total"] =
        purchase_shares(econ, sol, OriginFilter::Domestic, TaxonomyFilter::All).mean_pct;
    EmissionsReport em = make_emissions_report(econ, base_sol, sol);
    m["eei_direct_pct"] = em.direct_pct_change.at("total");
    m["eei_total_pct"] = em.total_pct_change.at("total");
    if (em.leakage_change.defined) m["leakage_pct"] = em.leakage_change.pct_change;
    WelfareReport w = welfare(econ, sol);
    m["area_real_gne_pct"] = aggregate_change(econ, w.gne_real_change, sol.importer_mask, true);
    m["extra_area_real_gne_pct"] =
        aggregate_change(econ, w.gne_real_change, sol.importer_mask, false);
    return m;
}

/// Relative differences between an endogenous-CBAM solution and its
/// exogenous twin, metric by metric: (endogenous - exogenous) / |exogenous|.
/// The two scenarios must be identical except for the pricing mode.
inline std::map<std::string, double> endogenous_gap(const WorldEconomy& econ,
                                                    const PolicyScenario& scen_endogenous,
                                                    const HatSolution& sol_endogenous,
                                                    const PolicyScenario& scen_exogenous,
                                                    const HatSolution& sol_exogenous,
                                                    const HatSolution& base_sol) {
    if (!cbam_endogenous(scen_endogenous.cbam_mode) ||
        cbam_endogenous(scen_exogenous.cbam_mode) || !cbam_active(scen_exogenous.cbam_mode))
        throw ArgumentError("endogenous_gap: expected an endogenous/exogenous scenario pair");
    if (detail::exogenous_twin(scen_endogenous.cbam_mode) != scen_exogenous.cbam_mode)
        throw ArgumentError("endogenous_gap: scenarios differ in CBAM scope, not just mode");
    PolicyScenario probe = scen_endogenous;
    probe.cbam_mode = scen_exogenous.cbam_mode;
    probe.name = scen_exogenous.name;
    if (probe.importer_set != scen_exogenous.importer_set ||
        probe.sector_set != scen_exogenous.sector_set ||
        probe.wedge_scale != scen_exogenous.wedge_scale ||
        probe.income_share_mode != scen_exogenous.income_share_mode)
        throw ArgumentError("endogenous_gap: scenarios differ beyond the pricing mode");

    std::map<std::string, double> en = scenario_metrics(econ, base_sol, sol_endogenous);
    std::map<std::string, double> ex = scenario_metrics(econ, base_sol, sol_exogenous);
    std::map<std::string, double> gap;
    for (const auto& [key, ex_value] : ex) {
        if (!en.count(key)) continue;
        double denom = std::abs(ex_value);
        gap[key] = denom > 0.0 ? (en.at(key) - ex_value) / denom : 0.0;
    }
    return gap;
}

} // namespace cbge
