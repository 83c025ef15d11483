#pragma once

#include <map>
#include <string>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/metrics/emissions.hpp"
#include "cbge/metrics/trade.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

namespace detail {

/// Re-derives a consistent steady state after a technology change: sales are
/// re-solved at unchanged country incomes, endowments are re-read from the
/// new sales, and the emissions series keeps its tons-per-carbon-payment
/// anchor.
inline WorldEconomy rebuild_steady_state(const WorldEconomy& tech, const Vec& old_sales,
                                         const Vec& old_income, const Vec& tons_scale) {
    const int n = tech.dims.n_countries, j = tech.dims.n_sectors, nj = tech.cells();
    WorldEconomy econ = tech;
    Mat omega = econ.iota * econ.gamma_vec().asDiagonal();
    Vec b(nj);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            b[econ.dims.flat(i, jj)] = econ.chi(i - 1, jj - 1) * old_income[i - 1];
    Vec sales = solve_linear(Mat::Identity(nj, nj) - omega, b);

    econ.labor = Vec::Zero(n);
    Vec emission_value = Vec::Zero(n);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj) {
            const int f = econ.dims.flat(i, jj);
            econ.labor[i - 1] += econ.beta[f] * (1.0 - econ.rho[f]) * sales[f];
            emission_value[i - 1] += econ.rho[f] * sales[f];
        }
    econ.deficits = old_income - econ.labor - emission_value;
    econ.deficits.array() -= compensated_sum(econ.deficits) / n;
    econ.deficits.array() -= compensated_sum(econ.deficits) / n;
    for (int i = 0; i < n; ++i)
        if (is_capped(econ.carbon_regime[i])) econ.carbon_regime[i] = Capped{emission_value[i]};
    for (int f = 0; f < nj; ++f)
        econ.emissions_tons[f] *= tons_scale[f] * sales[f] / old_sales[f];
    econ.validate();
    return econ;
}

} // namespace detail

/// How the exponent mass freed by a lower emission elasticity is assigned.
/// Proportional keeps the labor share parameter fixed, so labor and
/// materials absorb the change in proportion to their existing exponents.
enum class IntensityRescale { Proportional, PreserveLaborExponent };

/// Scales every emission elasticity by `factor` and re-derives a consistent
/// steady state. Physical emissions scale with the elasticity.
inline WorldEconomy scale_carbon_intensity(const WorldEconomy& econ, double factor,
                                           IntensityRescale mode = IntensityRescale::Proportional) {
    if (!(factor > 0.0)) throw ArgumentError("scale_carbon_intensity: factor must be positive");
    if (factor * econ.rho.maxCoeff() >= 1.0)
        throw ArgumentError("scale_carbon_intensity: factor " + std::to_string(factor) +
                            " would push an emission elasticity to one or above");
    SteadyStateAccounts acc = steady_state_accounts(econ);
    WorldEconomy tech = econ;
    tech.rho = factor * econ.rho;
    if (mode == IntensityRescale::PreserveLaborExponent)
        for (int f = 0; f < econ.cells(); ++f)
            tech.beta[f] = econ.beta[f] * (1.0 - econ.rho[f]) / (1.0 - tech.rho[f]);
    return detail::rebuild_steady_state(tech, acc.sales, acc.income,
                                        Vec::Constant(econ.cells(), factor));
}

/// Scales the reliance of ETS-area destinations on extra-area inputs by
/// `factor`, renormalizing each affected column so domestic entries absorb
/// the complement. Columns with no intra-area weight stay valid under the
/// renormalization; their indices are reported through `flagged_columns`.
inline WorldEconomy scale_integration(const WorldEconomy& econ, double factor,
                                      std::vector<int>* flagged_columns = nullptr) {
    if (!(factor > 0.0)) throw ArgumentError("scale_integration: factor must be positive");
    const int j = econ.dims.n_sectors;
    SteadyStateAccounts acc = steady_state_accounts(econ);
    WorldEconomy tech = econ;
    for (int d = 0; d < econ.cells(); ++d) {
        if (!econ.eu_mask[d / j]) continue;
        double domestic = 0.0;
        for (int o = 0; o < econ.cells(); ++o) {
            if (econ.eu_mask[o / j]) {
                domestic += tech.iota(o, d);
            } else {
                tech.iota(o, d) *= factor;
            }
        }
        if (domestic == 0.0 && flagged_columns) flagged_columns->push_back(d);
        tech.iota.col(d) /= tech.iota.col(d).sum();
    }
    return detail::rebuild_steady_state(tech, acc.sales, acc.income,
                                        Vec::Ones(econ.cells()));
}

/// A one-axis counterfactual sweep around a base scenario.
struct SweepSpec {
    enum class Axis { CarbonIntensityScale, IntegrationScale, Theta };
    Axis axis = Axis::CarbonIntensityScale;
    std::vector<double> grid;
    PolicyScenario base_scenario;

    void validate() const {
        if (grid.empty()) throw ArgumentError("SweepSpec: empty grid");
        for (double g : grid) {
            if (axis == Axis::CarbonIntensityScale && !(g > 0.0))
                throw ArgumentError("SweepSpec: carbon-intensity factors must be positive");
            if (axis == Axis::IntegrationScale && !(g > 0.0))
                throw ArgumentError("SweepSpec: integration factors must be positive");
            if (axis == Axis::Theta && !(g > 1.0))
                throw ArgumentError("SweepSpec: theta values must exceed one");
        }
    }

    static Axis axis_from_string(const std::string& s) {
        if (s == "carbon_intensity") return Axis::CarbonIntensityScale;
        if (s == "integration") return Axis::IntegrationScale;
        if (s == "theta") return Axis::Theta;
        throw ArgumentError("unknown sweep axis '" + s + "'");
    }
    static std::string axis_to_string(Axis a) {
        switch (a) {
            case Axis::CarbonIntensityScale: return "carbon_intensity";
            case Axis::IntegrationScale: return "integration";
            case Axis::Theta: return "theta";
        }
        return "carbon_intensity";
    }
};

/// Default grid: eleven evenly spaced points across the published range.
inline std::vector<double> default_sweep_grid(SweepSpec::Axis axis) {
    std::vector<double> grid;
    if (axis == SweepSpec::Axis::Theta) return {2.0, 4.0, 8.0};
    for (int k = 0; k <= 10; ++k) grid.push_back(0.5 + 0.1 * k);
    return grid;
}

struct SweepRow {
    double value = 0.0;
    std::map<std::string, double> metrics;
};

/// Solves the base scenario on each transformed economy and reports the EEI
/// response under both normalizations: `*_pct` against that economy's own
/// no-policy baseline, `*_ref_pct` against the untransformed reference
/// economy's no-policy baseline (the published figures' convention).
inline std::vector<SweepRow> run_sweep(const WorldEconomy& econ, const SweepSpec& spec) {
    spec.validate();
    const BoolVec& ref_area = econ.eu_mask;
    const double ref_direct = eei_aggregate(econ, eei_baseline(econ, ref_area, true), ref_area);
    const double ref_total = eei_aggregate(econ, eei_baseline(econ, ref_area, false), ref_area);
    std::vector<SweepRow> rows;
    for (double value : spec.grid) {
        WorldEconomy scaled;
        switch (spec.axis) {
            case SweepSpec::Axis::CarbonIntensityScale:
                scaled = scale_carbon_intensity(econ, value);
                break;
            case SweepSpec::Axis::IntegrationScale:
                scaled = scale_integration(econ, value);
                break;
            case SweepSpec::Axis::Theta:
                scaled = econ.with_theta(value);
                break;
        }
        HatSolution sol = solve(scaled, spec.base_scenario);
        SweepRow row;
        row.value = value;
        const BoolVec& area = sol.importer_mask;
        for (bool direct : {true, false}) {
            double base = eei_aggregate(scaled, eei_baseline(scaled, area, direct), area);
            double cf = eei_aggregate(scaled, eei(scaled, sol, direct), area);
            double ref = direct ? ref_direct : ref_total;
            row.metrics[direct ? "eei_direct_pct" : "eei_total_pct"] =
                base > 0.0 ? 100.0 * (cf / base - 1.0) : 0.0;
            row.metrics[direct ? "eei_direct_ref_pct" : "eei_total_ref_pct"] =
                ref > 0.0 ? 100.0 * (cf - base) / ref : 0.0;
        }
        LeakageResult leak = leakage(scaled, sol);
        if (leak.defined) row.metrics["leakage_pct"] = leak.pct_change;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace cbge
