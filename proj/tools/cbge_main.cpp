// Command-line front end for the counterfactual engine: calibration,
// baseline construction, scenario solves, sweeps, comparative statics, and
// report emission.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cbge/cbge.hpp"

namespace fs = std::filesystem;
using namespace cbge;

namespace {

WorldEconomy load_economy(const fs::path& where) {
    fs::path manifest = fs::is_directory(where) ? where / "manifest.json" : where;
    return ingest(load_calibration(manifest));
}

json read_json(const fs::path& path) { return detail::read_json_file(path); }

int resolve_country(const WorldEconomy& econ, const std::string& token) {
    for (int i = 0; i < econ.dims.n_countries; ++i)
        if (econ.country_names[i] == token) return i + 1;
    return std::stoi(token);
}

int resolve_sector(const WorldEconomy& econ, const std::string& token) {
    for (int j = 0; j < econ.dims.n_sectors; ++j)
        if (econ.sector_names[j] == token) return j + 1;
    return std::stoi(token);
}

void write_steady_state_report(const WorldEconomy& econ, const fs::path& path,
                               const IngestStats* stats = nullptr) {
    SteadyStateReport rep = steady_state_check(econ);
    json doc;
    doc["pass"] = rep.pass();
    doc["tolerance"] = rep.tolerance;
    for (const auto& [k, v] : rep.residuals) doc["residuals"][k] = v;
    if (stats) {
        doc["zero_output_imputed"] = stats->zero_output_imputed;
        doc["rho_clipped"] = stats->rho_clipped;
        doc["beta_clipped"] = stats->beta_clipped;
    }
    write_json_file(path, doc);
}

int default_threads() {
    if (const char* env = std::getenv("CBGE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cbge - carbon-border general-equilibrium counterfactuals"};
    app.require_subcommand(1);

    // calibrate ----------------------------------------------------------
    std::string calib_manifest, out_dir;
    auto* calibrate = app.add_subcommand("calibrate", "map raw tables to a steady-state economy");
    calibrate->add_option("--manifest", calib_manifest, "calibration manifest JSON")->required();
    calibrate->add_option("-o,--output", out_dir, "output directory")->required();

    // baseline -----------------------------------------------------------
    std::string economy_path, shock_path;
    auto* baseline = app.add_subcommand("baseline", "roll the calibration through a policy shock");
    baseline->add_option("--economy", economy_path, "economy directory or manifest")->required();
    baseline->add_option("--shock", shock_path, "baseline shock JSON")->required();
    baseline->add_option("-o,--output", out_dir, "output directory")->required();

    // solve ----------------------------------------------------------------
    std::string scenario_path;
    auto* solve_cmd = app.add_subcommand("solve", "solve a counterfactual scenario");
    solve_cmd->add_option("--economy", economy_path, "economy directory or manifest")->required();
    solve_cmd->add_option("--scenario", scenario_path, "scenario JSON")->required();
    solve_cmd->add_option("-o,--output", out_dir, "output directory")->required();

    // sweep ----------------------------------------------------------------
    std::string sweep_spec_path;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a one-axis counterfactual sweep");
    sweep_cmd->add_option("--spec", sweep_spec_path, "sweep spec JSON")->required();
    sweep_cmd->add_option("-o,--output", out_dir, "output directory")->required();

    // linearize -------------------------------------------------------------
    std::string flow_arg, factor_mode = "fd";
    auto* lin = app.add_subcommand("linearize", "first-order responses to a wedge shock");
    lin->add_option("--economy", economy_path, "economy directory or manifest")->required();
    lin->add_option("--flow", flow_arg,
                    "shocked flow l,s,q,r (origin country, dest country, origin sector, "
                    "dest sector; names or 1-based indices)")
        ->required();
    lin->add_option("--factor-mode", factor_mode, "fd (nonlinear probe) or zero");
    lin->add_option("-o,--output", out_dir, "output directory")->required();

    // report ----------------------------------------------------------------
    std::string run_dir, format = "csv";
    auto* report_cmd = app.add_subcommand("report", "re-emit reports from a completed run");
    report_cmd->add_option("--run", run_dir, "suite output directory")->required();
    report_cmd->add_option("--format", format, "csv or json");

    // suite -----------------------------------------------------------------
    std::string suite_manifest;
    int threads = default_threads();
    auto* suite_cmd = app.add_subcommand("suite", "full calibrate/baseline/scenarios/reports run");
    suite_cmd->add_option("--manifest", suite_manifest, "suite manifest JSON")->required();
    suite_cmd->add_option("-o,--output", out_dir, "output directory")->required();
    suite_cmd->add_option("--threads", threads, "concurrent scenario solves");

    // fixture ---------------------------------------------------------------
    std::string fixture_name = "f4x3";
    unsigned seed = 7;
    int gen_countries = 3, gen_sectors = 2;
    auto* fixture_cmd = app.add_subcommand("fixture", "emit a synthetic dataset");
    fixture_cmd->add_option("--name", fixture_name, "f2x2, f3x2, f4x3, or random");
    fixture_cmd->add_option("--seed", seed, "seed for the random fixture");
    fixture_cmd->add_option("--countries", gen_countries, "countries for the random fixture");
    fixture_cmd->add_option("--sectors", gen_sectors, "sectors for the random fixture");
    fixture_cmd->add_option("-o,--output", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*calibrate) {
            CalibrationInput input = load_calibration(calib_manifest);
            IngestStats stats;
            WorldEconomy econ = ingest(input, &stats);
            export_economy(econ, fs::path(out_dir) / "economy");
            write_steady_state_report(econ, fs::path(out_dir) / "steady_state_report.json",
                                      &stats);
            std::cout << "calibrated " << econ.dims.n_countries << " countries x "
                      << econ.dims.n_sectors << " sectors -> " << out_dir << "\n";
        } else if (*baseline) {
            WorldEconomy econ = load_economy(economy_path);
            BaselineShock shock = baseline_shock_from_json(read_json(shock_path), econ);
            HatSolution sol;
            WorldEconomy next = build_baseline(econ, shock, &sol);
            export_economy(next, fs::path(out_dir) / "economy");
            PolicyScenario tag;
            tag.name = "baseline_shock";
            tag.damping = shock.damping;
            tag.tolerance = shock.tolerance;
            write_solution(fs::path(out_dir) / "solution", econ, tag, sol,
                           hash_file(shock_path));
            write_steady_state_report(next, fs::path(out_dir) / "steady_state_report.json");
            std::cout << "baseline economy written to " << out_dir << " (solver iterations "
                      << sol.iterations << ")\n";
        } else if (*solve_cmd) {
            WorldEconomy econ = load_economy(economy_path);
            PolicyScenario scen = scenario_from_json(read_json(scenario_path), econ);
            HatSolution sol = solve(econ, scen);
            write_solution(fs::path(out_dir), econ, scen, sol, hash_file(scenario_path));
            PolicyScenario off;
            off.name = "off";
            HatSolution base = solve(econ, off);
            write_json_file(fs::path(out_dir) / "metrics.json",
                            metrics_to_json(compute_scenario_metrics(econ, base, sol)));
            std::cout << "scenario '" << scen.name << "' converged in " << sol.iterations
                      << " iterations -> " << out_dir << "\n";
        } else if (*sweep_cmd) {
            json doc = read_json(sweep_spec_path);
            WorldEconomy econ = load_economy(
                fs::path(sweep_spec_path).parent_path() / doc.at("economy").get<std::string>());
            SweepSpec spec;
            spec.axis = SweepSpec::axis_from_string(doc.value("axis", "carbon_intensity"));
            if (doc.contains("grid"))
                for (const auto& g : doc["grid"]) spec.grid.push_back(g.get<double>());
            else
                spec.grid = default_sweep_grid(spec.axis);
            if (doc.contains("scenario")) {
                if (doc["scenario"].is_string())
                    spec.base_scenario = scenario_from_json(
                        read_json(fs::path(sweep_spec_path).parent_path() /
                                  doc["scenario"].get<std::string>()),
                        econ);
                else
                    spec.base_scenario = scenario_from_json(doc["scenario"], econ);
            }
            auto rows = run_sweep(econ, spec);
            fs::create_directories(out_dir);
            csv::Writer w(fs::path(out_dir) / "sweep.csv");
            std::vector<std::string> header = {"value"};
            for (const auto& [k, v] : rows.front().metrics) header.push_back(k);
            w.row(header);
            for (const auto& row : rows) {
                std::vector<std::string> cells = {csv::format_double(row.value)};
                for (const auto& [k, v] : row.metrics) cells.push_back(csv::format_double(v));
                w.row(cells);
            }
            std::cout << "sweep over " << rows.size() << " grid points -> " << out_dir << "\n";
        } else if (*lin) {
            WorldEconomy econ = load_economy(economy_path);
            std::vector<std::string> parts;
            std::stringstream ss(flow_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) parts.push_back(tok);
            if (parts.size() != 4)
                throw ArgumentError("--flow expects l,s,q,r (origin country, dest country, "
                                    "origin sector, dest sector)");
            ShockFlow flow;
            flow.origin_country = resolve_country(econ, parts[0]);
            flow.dest_country = resolve_country(econ, parts[1]);
            flow.origin_sector = resolve_sector(econ, parts[2]);
            flow.dest_sector = resolve_sector(econ, parts[3]);
            FactorDerivatives fd = factor_mode == "zero" ? zero_factor_response(econ)
                                                         : fd_factor_derivatives(econ, flow);
            Vec dlogp = dlog_prices(econ, flow, fd);
            Mat dshare = dlog_cost_shares(econ, flow, fd);
            Vec dW = dlog_welfare(econ, flow, fd);
            fs::create_directories(out_dir);
            {
                csv::Writer w(fs::path(out_dir) / "dlog_prices.csv");
                w.row({"flat_index", "country", "sector", "dlog_price"});
                for (int f = 0; f < econ.cells(); ++f)
                    w.row({std::to_string(f), econ.country_names[f / econ.dims.n_sectors],
                           econ.sector_names[f % econ.dims.n_sectors],
                           csv::format_double(dlogp[f])});
            }
            {
                csv::Writer w(fs::path(out_dir) / "dlog_cost_shares.csv");
                w.row({"origin_flat", "dest_flat", "dlog_cost_share"});
                for (int o = 0; o < econ.cells(); ++o)
                    for (int d = 0; d < econ.cells(); ++d)
                        if (econ.iota(o, d) > 0.0)
                            w.row({std::to_string(o), std::to_string(d),
                                   csv::format_double(dshare(o, d))});
            }
            {
                csv::Writer w(fs::path(out_dir) / "dlog_welfare.csv");
                w.row({"country", "dlog_real_gne"});
                for (int i = 0; i < econ.dims.n_countries; ++i)
                    w.row({econ.country_names[i], csv::format_double(dW[i])});
            }
            json summary;
            summary["flow"] = flow_arg;
            summary["factor_mode"] = factor_mode;
            summary["dlog_eei_total"] = dlog_eei(econ, flow, fd, false);
            summary["dlog_eei_direct"] = dlog_eei(econ, flow, fd, true);
            summary["dcbam"] = dcbam(econ.rho[econ.dims.flat(flow.origin_country,
                                                             flow.origin_sector)],
                                     fd.dlogt[flow.dest_country - 1],
                                     fd.dlogt[flow.origin_country - 1]);
            for (int i = 0; i < econ.dims.n_countries; ++i) {
                summary["factor_derivatives"]["dlogw"][econ.country_names[i]] = fd.dlogw[i];
                summary["factor_derivatives"]["dlogt"][econ.country_names[i]] = fd.dlogt[i];
                summary["factor_derivatives"]["dlogE"][econ.country_names[i]] = fd.dlogE[i];
            }
            write_json_file(fs::path(out_dir) / "summary.json", summary);
            std::cout << "derivative tables -> " << out_dir << "\n";
        } else if (*report_cmd) {
            fs::path reports = fs::path(run_dir) / "reports";
            if (!fs::exists(reports))
                throw ArgumentError("no reports under " + run_dir +
                                    " (run the suite first)");
            if (format == "json") {
                std::ifstream in(reports / "report.json");
                std::cout << in.rdbuf();
            } else if (format == "csv") {
                for (const char* name :
                     {"table1_trade.csv", "table2_emissions.csv", "table3_welfare.csv",
                      "reference_comparison.csv"}) {
                    fs::path p = reports / name;
                    if (!fs::exists(p)) continue;
                    std::cout << "# " << name << "\n";
                    std::ifstream in(p);
                    std::cout << in.rdbuf() << "\n";
                }
            } else {
                throw ArgumentError("unknown format '" + format + "' (csv or json)");
            }
        } else if (*suite_cmd) {
            SuiteOptions options;
            options.threads = threads;
            run_scenario_suite(suite_manifest, out_dir, options);
            std::cout << "suite complete -> " << out_dir << "\n";
        } else if (*fixture_cmd) {
            WorldEconomy econ;
            if (fixture_name == "f2x2")
                econ = fixtures::two_by_two();
            else if (fixture_name == "f3x2")
                econ = fixtures::three_by_two();
            else if (fixture_name == "f4x3")
                econ = fixtures::four_by_three();
            else if (fixture_name == "random")
                econ = fixtures::random_economy(seed, gen_countries, gen_sectors);
            else
                throw ArgumentError("unknown fixture '" + fixture_name + "'");
            export_economy(econ, out_dir);
            // Companion files so the directory is immediately runnable.
            json shock;
            shock["base_year"] = 2018;
            shock["target_year"] = 2024;
            shock["free_allowance_cut"] = 0.40;
            for (int i = 0; i < econ.dims.n_countries; ++i)
                if (is_capped(econ.carbon_regime[i]))
                    shock["annual_reduction_rates"][econ.country_names[i]] =
                        econ.eu_mask[i] ? 0.03 : 0.02;
            write_json_file(fs::path(out_dir) / "baseline_shock.json", shock);
            json suite;
            suite["format"] = "cbge-suite-v1";
            suite["calibration_manifest"] = "manifest.json";
            suite["baseline_shock"] = "baseline_shock.json";
            write_json_file(fs::path(out_dir) / "suite.json", suite);
            json example;
            example["name"] = "tariff_example";
            example["tariff_overrides"] = json::array(
                {{{"origin_country", econ.country_names[1]},
                  {"origin_sector", econ.sector_names[0]},
                  {"dest_country", econ.country_names[0]},
                  {"dest_sector", econ.sector_names[0]},
                  {"rate", 0.10}}});
            write_json_file(fs::path(out_dir) / "scenario_example.json", example);
            std::cout << "fixture '" << fixture_name << "' -> " << out_dir << "\n";
        }
    } catch (const StageError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
