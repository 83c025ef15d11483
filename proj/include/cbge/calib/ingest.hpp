#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "cbge/calib/csv.hpp"
#include "cbge/calib/tables.hpp"
#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/steady_state.hpp"

namespace cbge {

using json = nlohmann::json;

/// Counters reported by ingest for data-quality diagnostics.
struct IngestStats {
    int zero_output_imputed = 0;  ///< gross-output cells imputed to one unit
    int rho_clipped = 0;          ///< emission elasticities clipped below one
    int beta_clipped = 0;         ///< labor shares clipped into (0,1)
};

/// Maps raw tables to a calibrated steady-state economy.
///
/// Cost shares come straight from the flow matrix, consumption weights from
/// final demand, labor shares from the value-added margin, and emission
/// elasticities from carbon payments over gross output. Baseline sales are
/// then re-solved from the goods market at the observed final-demand totals,
/// so endowments and deficits are exactly consistent with the model;
/// deficits are de-meaned to sum to zero.
inline WorldEconomy ingest(const CalibrationInput& input, IngestStats* stats = nullptr) {
    const Dimensions dims = input.dims;
    const int n = dims.n_countries, j = dims.n_sectors, nj = dims.size();
    input.io.validate(dims);
    input.emissions.validate(dims);
    input.taxonomy.validate(j);
    IngestStats local;

    // Zero-output cells break the share mapping; impute one currency unit.
    Vec go = input.io.gross_output;
    for (int f = 0; f < nj; ++f)
        if (go[f] == 0.0) {
            go[f] = 1.0;
            ++local.zero_output_imputed;
        }

    WorldEconomy econ;
    econ.dims = dims;
    econ.theta = input.theta;
    econ.sigma = input.sigma;
    econ.taxonomy = input.taxonomy;
    econ.sector_names = input.sector_names;
    econ.country_names.resize(n);
    econ.eu_mask.resize(n);
    econ.observed_carbon_price = input.emissions.effective_carbon_rate;
    for (int i = 0; i < n; ++i) {
        econ.country_names[i] = input.countries[i].name;
        econ.eu_mask[i] = input.countries[i].eu_ets;
    }

    econ.iota = Mat(nj, nj);
    for (int d = 0; d < nj; ++d) {
        double colsum = compensated_sum(input.io.intermediate_flows.col(d));
        if (!(colsum > 0.0))
            throw CalibrationError(
                "ingest: destination (" + input.countries[d / j].name + ", " +
                input.sector_names[d % j] + ") purchases no intermediate inputs; "
                "cost shares are undefined");
        econ.iota.col(d) = input.io.intermediate_flows.col(d) / colsum;
    }

    econ.beta = Vec(nj);
    econ.rho = Vec(nj);
    for (int f = 0; f < nj; ++f) {
        double beta = input.io.value_added[f] / go[f];
        if (beta < 1e-6 || beta > 1.0 - 1e-6) {
            beta = std::clamp(beta, 1e-6, 1.0 - 1e-6);
            ++local.beta_clipped;
        }
        econ.beta[f] = beta;
        double rho = input.emissions.effective_carbon_rate[f / j] *
                     input.emissions.scope1_emissions[f] / go[f];
        if (rho > 1.0 - 1e-6) {
            rho = 1.0 - 1e-6;
            ++local.rho_clipped;
        }
        econ.rho[f] = rho;
    }
    econ.free_alloc = input.emissions.free_allowance_share;
    econ.emissions_tons = input.emissions.scope1_emissions;

    // Consumption weights and per-country final expenditure.
    econ.chi = Mat(n, j);
    Vec gne(n);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int jj = 0; jj < j; ++jj) {
            double spend = 0.0;
            for (int o = 0; o < nj; ++o)
                if (o % j == jj) spend += input.io.final_flows(o, i);
            econ.chi(i, jj) = spend;
            total += spend;
        }
        if (!(total > 0.0))
            throw CalibrationError("ingest: country " + input.countries[i].name +
                                   " has no final demand");
        econ.chi.row(i) /= total;
        gne[i] = total;
    }

    // Model-consistent baseline sales at the observed expenditure totals.
    Mat omega = econ.iota * econ.gamma_vec().asDiagonal();
    Vec b(nj);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            b[dims.flat(i, jj)] = econ.chi(i - 1, jj - 1) * gne[i - 1];
    Vec sales = detail::solve_linear(Mat::Identity(nj, nj) - omega, b);

    econ.labor = Vec::Zero(n);
    Vec emission_value = Vec::Zero(n);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj) {
            const int f = dims.flat(i, jj);
            econ.labor[i - 1] += econ.beta[f] * (1.0 - econ.rho[f]) * sales[f];
            emission_value[i - 1] += econ.rho[f] * sales[f];
        }

    // Deficits: absorption minus income, de-meaned to sum exactly to zero
    // (second pass clears the rounding of the first).
    econ.deficits = gne - econ.labor - emission_value;
    econ.deficits.array() -= compensated_sum(econ.deficits) / n;
    econ.deficits.array() -= compensated_sum(econ.deficits) / n;

    econ.carbon_regime.resize(n);
    for (int i = 0; i < n; ++i) {
        if (input.countries[i].capped)
            econ.carbon_regime[i] = Capped{emission_value[i]};
        else
            econ.carbon_regime[i] = Priced{input.emissions.effective_carbon_rate[i]};
    }

    econ.validate();
    if (stats) *stats = local;
    return econ;
}

namespace detail {

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationError(path.filename().string() + " not found");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw CalibrationError(path.filename().string() + ": " + err.what());
    }
    return doc;
}

} // namespace detail

/// Loads the calibration manifest and the six delimited files it binds.
inline CalibrationInput load_calibration(const std::filesystem::path& manifest_path) {
    json manifest = detail::read_json_file(manifest_path);
    const auto dir = manifest_path.parent_path();
    auto file = [&](const char* key) -> std::filesystem::path {
        if (!manifest.contains("files") || !manifest["files"].contains(key))
            throw CalibrationError("manifest: missing files." + std::string(key));
        return dir / manifest["files"][key].get<std::string>();
    };

    CalibrationInput input;
    input.theta = manifest.value("elasticities", json::object()).value("theta", 4.0);
    input.sigma = manifest.value("elasticities", json::object()).value("sigma", 4.0);

    // Country order comes from the carbon-price file, sectors from taxonomy.
    csv::Table prices = csv::read_table(file("carbon_prices"));
    const int c_country = prices.column("country");
    const int c_ecr = prices.column("effective_carbon_rate");
    const int c_regime = prices.column("regime");
    const int c_eu = prices.column("eu_ets");
    std::map<std::string, int> country_index;
    std::vector<double> ecr;
    for (const auto& row : prices.rows) {
        CountryRecord rec;
        rec.name = row[c_country];
        if (country_index.count(rec.name))
            throw CalibrationError("carbon_prices.csv: duplicate country " + rec.name);
        const std::string& regime = row[c_regime];
        if (regime == "capped")
            rec.capped = true;
        else if (regime == "priced")
            rec.capped = false;
        else
            throw CalibrationError("carbon_prices.csv: unknown regime '" + regime +
                                   "' for " + rec.name);
        rec.eu_ets = csv::parse_double(prices, row[c_eu]) != 0.0;
        country_index[rec.name] = static_cast<int>(input.countries.size());
        input.countries.push_back(rec);
        ecr.push_back(csv::parse_double(prices, row[c_ecr]));
    }

    csv::Table tax = csv::read_table(file("taxonomy"));
    const int t_sector = tax.column("sector");
    const int t_ets = tax.column("ets");
    const int t_cbam = tax.column("cbam");
    std::map<std::string, int> sector_index;
    for (const auto& row : tax.rows) {
        if (sector_index.count(row[t_sector]))
            throw CalibrationError("taxonomy.csv: duplicate sector " + row[t_sector]);
        sector_index[row[t_sector]] = static_cast<int>(input.sector_names.size());
        input.sector_names.push_back(row[t_sector]);
        input.taxonomy.ets_flag.push_back(csv::parse_double(tax, row[t_ets]) != 0.0);
        input.taxonomy.cbam_reduced_flag.push_back(csv::parse_double(tax, row[t_cbam]) != 0.0);
    }

    const int n = static_cast<int>(input.countries.size());
    const int j = static_cast<int>(input.sector_names.size());
    input.dims = Dimensions(n, j);
    const int nj = input.dims.size();
    if (manifest.contains("dimensions")) {
        int mn = manifest["dimensions"].value("countries", n);
        int mj = manifest["dimensions"].value("sectors", j);
        if (mn != n || mj != j)
            throw CalibrationError("manifest: dimension metadata disagrees with the data files");
    }

    auto cell = [&](const csv::Table& t, const std::string& country,
                    const std::string& sector) -> int {
        auto ci = country_index.find(country);
        if (ci == country_index.end())
            throw CalibrationError(t.path + ": unknown country '" + country + "'");
        auto si = sector_index.find(sector);
        if (si == sector_index.end())
            throw CalibrationError(t.path + ": unknown sector '" + sector + "'");
        return ci->second * j + si->second;
    };

    csv::Table flows = csv::read_table(file("io_flows"));
    {
        const int oc = flows.column("origin_country"), os = flows.column("origin_sector");
        const int dc = flows.column("dest_country"), ds = flows.column("dest_sector");
        const int v = flows.column("value");
        input.io.intermediate_flows = Mat::Zero(nj, nj);
        for (const auto& row : flows.rows)
            input.io.intermediate_flows(cell(flows, row[oc], row[os]),
                                        cell(flows, row[dc], row[ds])) +=
                csv::parse_double(flows, row[v]);
    }
    csv::Table fin = csv::read_table(file("final_demand"));
    {
        const int oc = fin.column("origin_country"), os = fin.column("origin_sector");
        const int dc = fin.column("dest_country");
        const int v = fin.column("value");
        input.io.final_flows = Mat::Zero(nj, n);
        for (const auto& row : fin.rows) {
            auto ci = country_index.find(row[dc]);
            if (ci == country_index.end())
                throw CalibrationError(fin.path + ": unknown country '" + row[dc] + "'");
            input.io.final_flows(cell(fin, row[oc], row[os]), ci->second) +=
                csv::parse_double(fin, row[v]);
        }
    }
    csv::Table ova = csv::read_table(file("output_va"));
    {
        const int c = ova.column("country"), s = ova.column("sector");
        const int g = ova.column("gross_output"), va = ova.column("value_added");
        input.io.gross_output = Vec::Zero(nj);
        input.io.value_added = Vec::Zero(nj);
        for (const auto& row : ova.rows) {
            const int f = cell(ova, row[c], row[s]);
            input.io.gross_output[f] = csv::parse_double(ova, row[g]);
            input.io.value_added[f] = csv::parse_double(ova, row[va]);
        }
    }
    csv::Table em = csv::read_table(file("emissions"));
    {
        const int c = em.column("country"), s = em.column("sector");
        const int e = em.column("scope1_emissions"), fa = em.column("free_allowance_share");
        input.emissions.scope1_emissions = Vec::Zero(nj);
        input.emissions.free_allowance_share = Vec::Zero(nj);
        for (const auto& row : em.rows) {
            const int f = cell(em, row[c], row[s]);
            input.emissions.scope1_emissions[f] = csv::parse_double(em, row[e]);
            input.emissions.free_allowance_share[f] = csv::parse_double(em, row[fa]);
        }
    }
    input.emissions.effective_carbon_rate = Eigen::Map<Vec>(ecr.data(), n);
    return input;
}

/// Writes an economy back to the interchange format: the six delimited files
/// plus a manifest. Ingesting the result reproduces the calibration.
inline void export_economy(const WorldEconomy& econ, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors, nj = econ.cells();
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec gamma = econ.gamma_vec();

    {
        csv::Writer w(dir / "io_flows.csv");
        w.row({"origin_country", "origin_sector", "dest_country", "dest_sector", "value"});
        for (int o = 0; o < nj; ++o)
            for (int d = 0; d < nj; ++d) {
                double flow = gamma[d] * econ.iota(o, d) * acc.sales[d];
                if (flow == 0.0) continue;
                w.row({econ.country_names[o / j], econ.sector_names[o % j],
                       econ.country_names[d / j], econ.sector_names[d % j],
                       csv::format_double(flow)});
            }
    }
    {
        csv::Writer w(dir / "final_demand.csv");
        w.row({"origin_country", "origin_sector", "dest_country", "value"});
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < j; ++jj) {
                double spend = econ.chi(i, jj) * acc.income[i];
                if (spend == 0.0) continue;
                w.row({econ.country_names[i], econ.sector_names[jj], econ.country_names[i],
                       csv::format_double(spend)});
            }
    }
    {
        csv::Writer w(dir / "output_va.csv");
        w.row({"country", "sector", "gross_output", "value_added"});
        for (int f = 0; f < nj; ++f)
            w.row({econ.country_names[f / j], econ.sector_names[f % j],
                   csv::format_double(acc.sales[f]),
                   csv::format_double(econ.beta[f] * acc.sales[f])});
    }
    {
        csv::Writer w(dir / "emissions.csv");
        w.row({"country", "sector", "scope1_emissions", "free_allowance_share"});
        for (int f = 0; f < nj; ++f)
            w.row({econ.country_names[f / j], econ.sector_names[f % j],
                   csv::format_double(econ.emissions_tons[f]),
                   csv::format_double(econ.free_alloc[f])});
    }
    {
        csv::Writer w(dir / "carbon_prices.csv");
        w.row({"country", "effective_carbon_rate", "regime", "eu_ets"});
        for (int i = 0; i < n; ++i)
            w.row({econ.country_names[i], csv::format_double(econ.observed_carbon_price[i]),
                   is_capped(econ.carbon_regime[i]) ? "capped" : "priced",
                   econ.eu_mask[i] ? "1" : "0"});
    }
    {
        csv::Writer w(dir / "taxonomy.csv");
        w.row({"sector", "ets", "cbam"});
        for (int jj = 0; jj < j; ++jj)
            w.row({econ.sector_names[jj], econ.taxonomy.ets_flag[jj] ? "1" : "0",
                   econ.taxonomy.cbam_reduced_flag[jj] ? "1" : "0"});
    }
    json manifest;
    manifest["format"] = "cbge-calibration-v1";
    manifest["dimensions"] = {{"countries", n}, {"sectors", j}};
    manifest["elasticities"] = {{"theta", econ.theta}, {"sigma", econ.sigma}};
    manifest["files"] = {{"io_flows", "io_flows.csv"},
                         {"final_demand", "final_demand.csv"},
                         {"output_va", "output_va.csv"},
                         {"emissions", "emissions.csv"},
                         {"carbon_prices", "carbon_prices.csv"},
                         {"taxonomy", "taxonomy.csv"}};
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

} // namespace cbge
