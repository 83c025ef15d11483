#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"

namespace cbge {

/// CBAM coverage and pricing mode. "Reduced" restricts the wedge to the
/// explicitly listed border-adjustment sectors; "Full" extends it to the
/// whole ETS scope. "Endogenous" re-prices the wedge at the counterfactual
/// carbon prices each iteration, "Exogenous" freezes it at the prices that
/// prevailed before the policy.
enum class CbamMode {
    Off,
    ReducedEndogenous,
    ReducedExogenous,
    FullEndogenous,
    FullExogenous,
};

inline bool cbam_active(CbamMode m) { return m != CbamMode::Off; }
inline bool cbam_endogenous(CbamMode m) {
    return m == CbamMode::ReducedEndogenous || m == CbamMode::FullEndogenous;
}
inline bool cbam_reduced(CbamMode m) {
    return m == CbamMode::ReducedEndogenous || m == CbamMode::ReducedExogenous;
}

inline std::string to_string(CbamMode m) {
    switch (m) {
        case CbamMode::Off: return "off";
        case CbamMode::ReducedEndogenous: return "reduced_endogenous";
        case CbamMode::ReducedExogenous: return "reduced_exogenous";
        case CbamMode::FullEndogenous: return "full_endogenous";
        case CbamMode::FullExogenous: return "full_exogenous";
    }
    return "off";
}

inline CbamMode cbam_mode_from_string(const std::string& s) {
    if (s == "off") return CbamMode::Off;
    if (s == "reduced_endogenous") return CbamMode::ReducedEndogenous;
    if (s == "reduced_exogenous") return CbamMode::ReducedExogenous;
    if (s == "full_endogenous") return CbamMode::FullEndogenous;
    if (s == "full_exogenous") return CbamMode::FullExogenous;
    throw ArgumentError("unknown CBAM mode '" + s + "'");
}

/// Which trade shares enter the tariff-revenue term of household income.
/// Counterfactual shares make collected revenue equal the tax rate times the
/// pre-tariff import value, which closes the world budget exactly. Baseline
/// shares are kept for sensitivity analysis: they misstate collections at
/// second order in the wedge, so the attainable solver tolerance is bounded
/// below by that misstatement. Use them with moderate tolerances and treat
/// the gap against the default mode as the sensitivity estimate.
enum class IncomeShareMode { Counterfactual, Baseline };

struct TariffOverride {
    int origin_country = 0;
    int origin_sector = 0;
    int dest_country = 0;
    int dest_sector = 0;
    double rate = 0.0;  ///< ad valorem fraction, > -1
};

/// A counterfactual exercise relative to the calibrated baseline.
struct PolicyScenario {
    std::string name = "scenario";
    CbamMode cbam_mode = CbamMode::Off;

    /// 1-based importer countries; empty means the economy's ETS area.
    std::vector<int> importer_set;
    /// 1-based CBAM sectors; empty means the mode's default scope.
    std::vector<int> sector_set;

    std::vector<TariffOverride> tariff_overrides;

    /// Per-country multipliers on Capped emission supplies; empty means one.
    Vec emission_supply_multipliers;
    /// Per-cell hat of the effective allowance cost (1-eps'): (1-eps)' over
    /// (1-eps); empty means one.
    Vec allowance_cost_hat;

    /// Uniform scale on the CBAM component of the wedge; 1 is the policy as
    /// designed, 0.5 halves the shock (used by curvature diagnostics).
    double wedge_scale = 1.0;

    double damping = 0.1;
    double tolerance = 1e-9;
    long max_iterations = 50000;
    IncomeShareMode income_share_mode = IncomeShareMode::Counterfactual;
};

/// CBAM price wedge on one flow, Eq.-level semantics: exporter carbon price
/// of zero triggers the absolute branch, otherwise the adjustment is the
/// importer/exporter price ratio scaled by the exporter's emission
/// elasticity, and no adjustment applies when the exporter already prices
/// carbon at least as high.
inline double cbam_wedge(double rho_n_k, double t_i_prime, double t_n_prime, double nu_in,
                         bool in_scope) {
    if (rho_n_k < 0.0 || t_i_prime < 0.0 || t_n_prime < 0.0)
        throw ArgumentError("cbam_wedge: negative price or elasticity input");
    if (!(nu_in > 0.0)) throw ArgumentError("cbam_wedge: nu must be positive");
    if (!in_scope) return 0.0;
    if (t_n_prime == 0.0) return rho_n_k * t_i_prime * nu_in;
    if (t_i_prime * nu_in > t_n_prime) return rho_n_k * (t_i_prime / t_n_prime) * nu_in;
    return 0.0;
}

namespace detail {

inline BoolVec resolve_importers(const WorldEconomy& econ, const PolicyScenario& scen) {
    BoolVec importers(econ.dims.n_countries, false);
    if (scen.importer_set.empty()) {
        importers = econ.eu_mask;
    } else {
        for (int c : scen.importer_set) {
            if (c < 1 || c > econ.dims.n_countries)
                throw ArgumentError("scenario: importer country " + std::to_string(c) +
                                    " out of range");
            importers[c - 1] = true;
        }
    }
    return importers;
}

inline BoolVec resolve_cbam_sectors(const WorldEconomy& econ, const PolicyScenario& scen) {
    const int j = econ.dims.n_sectors;
    BoolVec sectors(j, false);
    if (!cbam_active(scen.cbam_mode)) return sectors;
    if (scen.sector_set.empty()) {
        sectors = cbam_reduced(scen.cbam_mode) ? econ.taxonomy.cbam_reduced_flag
                                               : econ.taxonomy.ets_flag;
    } else {
        for (int s : scen.sector_set) {
            if (s < 1 || s > j)
                throw ArgumentError("scenario: sector " + std::to_string(s) + " out of range");
            sectors[s - 1] = true;
        }
    }
    if (cbam_reduced(scen.cbam_mode))
        for (int s = 0; s < j; ++s)
            if (sectors[s] && !econ.taxonomy.ets_flag[s])
                throw ArgumentError("scenario: reduced CBAM sector " + std::to_string(s + 1) +
                                    " is outside the ETS scope");
    return sectors;
}

} // namespace detail

inline void validate_scenario(const WorldEconomy& econ, const PolicyScenario& scen) {
    if (!(scen.damping > 0.0 && scen.damping <= 1.0))
        throw ArgumentError("scenario: damping must lie in (0,1]");
    if (!(scen.tolerance > 0.0)) throw ArgumentError("scenario: tolerance must be positive");
    if (scen.max_iterations < 1) throw ArgumentError("scenario: max_iterations must be positive");
    if (!(scen.wedge_scale >= 0.0)) throw ArgumentError("scenario: wedge_scale must be nonnegative");
    if (cbam_active(scen.cbam_mode)) {
        BoolVec importers = detail::resolve_importers(econ, scen);
        bool any = false;
        for (bool b : importers) any = any || b;
        if (!any) throw ArgumentError("scenario: CBAM requires a nonempty importer set");
        detail::resolve_cbam_sectors(econ, scen);
    }
    if (scen.emission_supply_multipliers.size() != 0) {
        if (scen.emission_supply_multipliers.size() != econ.dims.n_countries)
            throw ArgumentError("scenario: emission_supply_multipliers length mismatch");
        if ((scen.emission_supply_multipliers.array() <= 0.0).any())
            throw ArgumentError("scenario: emission supply multipliers must be positive");
    }
    if (scen.allowance_cost_hat.size() != 0) {
        if (scen.allowance_cost_hat.size() != econ.cells())
            throw ArgumentError("scenario: allowance_cost_hat length mismatch");
        if ((scen.allowance_cost_hat.array() <= 0.0).any())
            throw ArgumentError("scenario: allowance cost hats must be positive");
    }
    for (const auto& ov : scen.tariff_overrides) {
        econ.dims.flat(ov.origin_country, ov.origin_sector);
        econ.dims.flat(ov.dest_country, ov.dest_sector);
        if (!(ov.rate > -1.0))
            throw ArgumentError("scenario: tariff rate must exceed -1");
    }
}

} // namespace cbge
