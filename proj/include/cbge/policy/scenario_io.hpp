#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cbge/calib/baseline.hpp"
#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/policy/scenario.hpp"

namespace cbge {

namespace detail {

inline int country_index(const WorldEconomy& econ, const std::string& name) {
    for (int i = 0; i < econ.dims.n_countries; ++i)
        if (econ.country_names[i] == name) return i + 1;
    throw ArgumentError("unknown country '" + name + "'");
}

inline int sector_index(const WorldEconomy& econ, const std::string& name) {
    for (int j = 0; j < econ.dims.n_sectors; ++j)
        if (econ.sector_names[j] == name) return j + 1;
    throw ArgumentError("unknown sector '" + name + "'");
}

} // namespace detail

/// Builds a scenario from its JSON description. Countries and sectors are
/// referenced by name; the allowance cut, when present, is translated into
/// the per-cell hat of (1 - eps) against the economy's current allowances.
inline PolicyScenario scenario_from_json(const nlohmann::json& doc, const WorldEconomy& econ) {
    PolicyScenario scen;
    scen.name = doc.value("name", std::string("scenario"));
    scen.cbam_mode = cbam_mode_from_string(doc.value("cbam_mode", std::string("off")));
    if (doc.contains("importer_set"))
        for (const auto& c : doc["importer_set"])
            scen.importer_set.push_back(detail::country_index(econ, c.get<std::string>()));
    if (doc.contains("sector_set"))
        for (const auto& s : doc["sector_set"])
            scen.sector_set.push_back(detail::sector_index(econ, s.get<std::string>()));
    if (doc.contains("tariff_overrides"))
        for (const auto& ov : doc["tariff_overrides"])
            scen.tariff_overrides.push_back(
                {detail::country_index(econ, ov.at("origin_country").get<std::string>()),
                 detail::sector_index(econ, ov.at("origin_sector").get<std::string>()),
                 detail::country_index(econ, ov.at("dest_country").get<std::string>()),
                 detail::sector_index(econ, ov.at("dest_sector").get<std::string>()),
                 ov.at("rate").get<double>()});
    if (doc.contains("emission_supply_multipliers")) {
        scen.emission_supply_multipliers = Vec::Ones(econ.dims.n_countries);
        for (const auto& [name, value] : doc["emission_supply_multipliers"].items())
            scen.emission_supply_multipliers[detail::country_index(econ, name) - 1] =
                value.get<double>();
    }
    if (doc.contains("free_allowance_cut")) {
        const double cut = doc["free_allowance_cut"].get<double>();
        if (!(cut >= 0.0 && cut < 1.0))
            throw ArgumentError("scenario: free_allowance_cut out of [0,1)");
        scen.allowance_cost_hat = Vec::Ones(econ.cells());
        for (int f = 0; f < econ.cells(); ++f) {
            if (!econ.eu_mask[f / econ.dims.n_sectors]) continue;
            const double eps = econ.free_alloc[f];
            scen.allowance_cost_hat[f] = (1.0 - eps * (1.0 - cut)) / (1.0 - eps);
        }
    }
    scen.wedge_scale = doc.value("wedge_scale", 1.0);
    scen.damping = doc.value("damping", 0.1);
    scen.tolerance = doc.value("tolerance", 1e-9);
    scen.max_iterations = doc.value("max_iterations", static_cast<long>(50000));
    const std::string mode = doc.value("income_share_mode", std::string("counterfactual"));
    if (mode == "counterfactual")
        scen.income_share_mode = IncomeShareMode::Counterfactual;
    else if (mode == "baseline")
        scen.income_share_mode = IncomeShareMode::Baseline;
    else
        throw ArgumentError("scenario: unknown income_share_mode '" + mode + "'");
    return scen;
}

inline nlohmann::json scenario_to_json(const PolicyScenario& scen, const WorldEconomy& econ) {
    nlohmann::json doc;
    doc["name"] = scen.name;
    doc["cbam_mode"] = to_string(scen.cbam_mode);
    for (int c : scen.importer_set) doc["importer_set"].push_back(econ.country_names[c - 1]);
    for (int s : scen.sector_set) doc["sector_set"].push_back(econ.sector_names[s - 1]);
    for (const auto& ov : scen.tariff_overrides)
        doc["tariff_overrides"].push_back(
            {{"origin_country", econ.country_names[ov.origin_country - 1]},
             {"origin_sector", econ.sector_names[ov.origin_sector - 1]},
             {"dest_country", econ.country_names[ov.dest_country - 1]},
             {"dest_sector", econ.sector_names[ov.dest_sector - 1]},
             {"rate", ov.rate}});
    if (scen.emission_supply_multipliers.size())
        for (int i = 0; i < econ.dims.n_countries; ++i)
            doc["emission_supply_multipliers"][econ.country_names[i]] =
                scen.emission_supply_multipliers[i];
    doc["wedge_scale"] = scen.wedge_scale;
    doc["damping"] = scen.damping;
    doc["tolerance"] = scen.tolerance;
    doc["max_iterations"] = scen.max_iterations;
    doc["income_share_mode"] =
        scen.income_share_mode == IncomeShareMode::Counterfactual ? "counterfactual" : "baseline";
    return doc;
}

inline BaselineShock baseline_shock_from_json(const nlohmann::json& doc,
                                              const WorldEconomy& econ) {
    BaselineShock shock;
    if (doc.contains("annual_reduction_rates")) {
        shock.annual_reduction_rates = Vec::Zero(econ.dims.n_countries);
        for (const auto& [name, value] : doc["annual_reduction_rates"].items())
            shock.annual_reduction_rates[detail::country_index(econ, name) - 1] =
                value.get<double>();
    }
    shock.base_year = doc.value("base_year", 2018);
    shock.target_year = doc.value("target_year", 2024);
    shock.free_allowance_cut = doc.value("free_allowance_cut", 0.0);
    if (doc.contains("exogenous_price_overrides"))
        for (const auto& c : doc["exogenous_price_overrides"])
            shock.exogenous_price_overrides.push_back(
                detail::country_index(econ, c.get<std::string>()));
    if (doc.contains("solver")) {
        shock.damping = doc["solver"].value("damping", 0.1);
        shock.tolerance = doc["solver"].value("tolerance", 1e-9);
        shock.max_iterations = doc["solver"].value("max_iterations", static_cast<long>(50000));
    }
    return shock;
}

} // namespace cbge
