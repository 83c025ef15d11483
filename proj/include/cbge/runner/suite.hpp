#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cbge/calib/baseline.hpp"
#include "cbge/calib/ingest.hpp"
#include "cbge/policy/scenario_io.hpp"
#include "cbge/policy/solver.hpp"
#include "cbge/runner/artifacts.hpp"

namespace cbge {

/// A stage of the scenario suite failed; the message is prefixed with the
/// stage name and carries the underlying diagnostic.
class StageError : public std::runtime_error {
public:
    StageError(const std::string& stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage(stage) {}
    std::string stage;
};

struct SuiteOptions {
    int threads = 1;  ///< concurrent scenario solves; results are identical
};

namespace detail {

inline std::vector<nlohmann::json> default_suite_scenarios() {
    std::vector<nlohmann::json> out;
    for (const char* mode :
         {"reduced_endogenous", "reduced_exogenous", "full_endogenous", "full_exogenous"}) {
        nlohmann::json s;
        s["name"] = mode;
        s["cbam_mode"] = mode;
        out.push_back(s);
    }
    return out;
}

inline void write_table1(const std::filesystem::path& path,
                         const std::vector<std::string>& names,
                         const std::vector<ScenarioMetrics>& metrics) {
    csv::Writer w(path);
    std::vector<std::string> header = {"panel", "split"};
    for (const auto& n : names) {
        header.push_back(n + "_mean");
        header.push_back(n + "_stdev");
    }
    w.row(header);
    auto block = [&](const char* panel,
                     const std::map<std::string, ShareStats> ScenarioMetrics::* field) {
        for (const char* split : {"total", "clean", "dirty"}) {
            std::vector<std::string> row = {panel, split};
            for (const auto& m : metrics) {
                const ShareStats& st = (m.*field).at(split);
                row.push_back(csv::format_double(st.mean_pct));
                row.push_back(csv::format_double(st.stdev_pct));
            }
            w.row(row);
        }
    };
    block("foreign_purchases", &ScenarioMetrics::foreign_shares);
    block("domestic_purchases", &ScenarioMetrics::domestic_shares);
    block("domar_weights", &ScenarioMetrics::domar);
}

inline void write_table2(const std::filesystem::path& path,
                         const std::vector<std::string>& names,
                         const std::vector<ScenarioMetrics>& metrics) {
    csv::Writer w(path);
    std::vector<std::string> header = {"panel", "split"};
    for (const auto& n : names) header.push_back(n);
    w.row(header);
    for (const char* split : {"total", "clean", "dirty"}) {
        std::vector<std::string> row = {"eei_direct", split};
        for (const auto& m : metrics)
            row.push_back(csv::format_double(m.emissions.direct_pct_change.at(split)));
        w.row(row);
    }
    for (const char* split : {"total", "clean", "dirty"}) {
        std::vector<std::string> row = {"eei_total", split};
        for (const auto& m : metrics)
            row.push_back(csv::format_double(m.emissions.total_pct_change.at(split)));
        w.row(row);
    }
    std::vector<std::string> row = {"leakage", "total"};
    for (const auto& m : metrics)
        row.push_back(m.emissions.leakage_change.defined
                          ? csv::format_double(m.emissions.leakage_change.pct_change)
                          : std::string("undefined"));
    w.row(row);
}

inline void write_table3(const std::filesystem::path& path,
                         const std::vector<std::string>& names,
                         const std::vector<ScenarioMetrics>& metrics) {
    csv::Writer w(path);
    std::vector<std::string> header = {"panel", "variable"};
    for (const auto& n : names) header.push_back(n);
    w.row(header);
    auto row4 = [&](const char* panel, const char* variable,
                    double ScenarioMetrics::* field) {
        std::vector<std::string> row = {panel, variable};
        for (const auto& m : metrics) row.push_back(csv::format_double(m.*field));
        w.row(row);
    };
    row4("area", "real_gne_pct", &ScenarioMetrics::area_gne_pct);
    row4("area", "real_wage_pct", &ScenarioMetrics::area_real_wage_pct);
    row4("extra_area", "real_gne_pct", &ScenarioMetrics::extra_area_gne_pct);
    row4("extra_area", "real_wage_pct", &ScenarioMetrics::extra_area_real_wage_pct);
}

} // namespace detail

/// Executes calibrate -> baseline -> scenario solves -> metrics -> reports
/// from a suite manifest, writing a deterministic artifact tree (layout_v1,
/// no timestamps). Any stage failure marks the output directory invalid and
/// raises a StageError naming the stage.
inline void run_scenario_suite(const std::filesystem::path& manifest_path,
                               const std::filesystem::path& out_dir,
                               const SuiteOptions& options = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    nlohmann::json run_manifest;
    run_manifest["layout"] = "layout_v1";

    auto fail = [&](const std::string& stage, const std::string& message) -> StageError {
        std::ofstream marker(out_dir / "INVALID");
        marker << stage << ": " << message << '\n';
        return StageError(stage, message);
    };

    // ---- calibrate ----------------------------------------------------
    WorldEconomy economy;
    nlohmann::json suite;
    fs::path suite_dir;
    try {
        suite = detail::read_json_file(manifest_path);
        suite_dir = manifest_path.parent_path();
        fs::path calib_manifest =
            suite_dir / suite.value("calibration_manifest", std::string("manifest.json"));
        run_manifest["inputs"]["suite_manifest"] = hash_file(manifest_path);
        CalibrationInput input = load_calibration(calib_manifest);
        nlohmann::json calib_doc = detail::read_json_file(calib_manifest);
        for (const auto& [key, file] : calib_doc["files"].items())
            run_manifest["inputs"][file.get<std::string>()] =
                hash_file(calib_manifest.parent_path() / file.get<std::string>());
        IngestStats stats;
        economy = ingest(input, &stats);
        export_economy(economy, out_dir / "calibrate" / "economy");
        SteadyStateReport rep = steady_state_check(economy);
        nlohmann::json rep_doc;
        rep_doc["pass"] = rep.pass();
        rep_doc["tolerance"] = rep.tolerance;
        for (const auto& [k, v] : rep.residuals) rep_doc["residuals"][k] = v;
        rep_doc["zero_output_imputed"] = stats.zero_output_imputed;
        rep_doc["rho_clipped"] = stats.rho_clipped;
        rep_doc["beta_clipped"] = stats.beta_clipped;
        write_json_file(out_dir / "calibrate" / "steady_state_report.json", rep_doc);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& err) {
        throw fail("calibrate", err.what());
    }

    // ---- baseline ------------------------------------------------------
    WorldEconomy baseline = economy;
    try {
        if (suite.contains("baseline_shock")) {
            fs::path shock_path = suite_dir / suite["baseline_shock"].get<std::string>();
            run_manifest["inputs"]["baseline_shock"] = hash_file(shock_path);
            BaselineShock shock =
                baseline_shock_from_json(detail::read_json_file(shock_path), economy);
            HatSolution sol;
            baseline = build_baseline(economy, shock, &sol);
            run_manifest["baseline"] = {{"iterations", sol.iterations},
                                        {"converged", sol.converged}};
        }
        export_economy(baseline, out_dir / "baseline" / "economy");
    } catch (const SolveError& err) {
        nlohmann::json diag;
        for (const auto& [k, v] : err.residuals) diag[k] = v;
        throw fail("baseline", std::string(err.what()) + " " + diag.dump());
    } catch (const std::exception& err) {
        throw fail("baseline", err.what());
    }

    // ---- scenarios -----------------------------------------------------
    std::vector<PolicyScenario> scenarios;
    std::vector<std::string> names;
    std::vector<HatSolution> solutions;
    HatSolution base_solution;
    try {
        std::vector<nlohmann::json> scenario_docs;
        if (suite.contains("scenarios")) {
            for (const auto& entry : suite["scenarios"]) {
                if (entry.is_string())
                    scenario_docs.push_back(
                        detail::read_json_file(suite_dir / entry.get<std::string>()));
                else
                    scenario_docs.push_back(entry);
            }
        } else {
            scenario_docs = detail::default_suite_scenarios();
        }
        PolicyScenario off;
        off.name = "off";
        base_solution = solve(baseline, off);
        for (const auto& doc : scenario_docs) {
            scenarios.push_back(scenario_from_json(doc, baseline));
            names.push_back(scenarios.back().name);
        }
        solutions.resize(scenarios.size());
        const int threads = std::max(1, options.threads);
        if (threads == 1) {
            for (size_t k = 0; k < scenarios.size(); ++k)
                solutions[k] = solve(baseline, scenarios[k]);
        } else {
            std::vector<std::future<HatSolution>> futures;
            for (size_t k = 0; k < scenarios.size(); ++k)
                futures.push_back(std::async(std::launch::async, [&, k] {
                    return solve(baseline, scenarios[k]);
                }));
            for (size_t k = 0; k < scenarios.size(); ++k) solutions[k] = futures[k].get();
        }
        for (size_t k = 0; k < scenarios.size(); ++k) {
            const std::string scenario_hash =
                fnv1a_hex(scenario_to_json(scenarios[k], baseline).dump());
            write_solution(out_dir / "scenarios" / names[k], baseline, scenarios[k],
                           solutions[k], scenario_hash);
            run_manifest["scenarios"][names[k]] = {
                {"iterations", solutions[k].iterations},
                {"converged", solutions[k].converged},
                {"scenario_hash", scenario_hash},
                {"max_residual",
                 std::max_element(solutions[k].residuals.begin(), solutions[k].residuals.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; })
                     ->second}};
        }
    } catch (const SolveError& err) {
        nlohmann::json diag;
        for (const auto& [k, v] : err.residuals) diag[k] = v;
        throw fail("scenarios", std::string(err.what()) + " " + diag.dump());
    } catch (const std::exception& err) {
        throw fail("scenarios", err.what());
    }

    // ---- metrics and reports -------------------------------------------
    try {
        std::vector<ScenarioMetrics> metrics;
        for (size_t k = 0; k < scenarios.size(); ++k)
            metrics.push_back(compute_scenario_metrics(baseline, base_solution, solutions[k]));

        fs::path reports = out_dir / "reports";
        fs::create_directories(reports);
        detail::write_table1(reports / "table1_trade.csv", names, metrics);
        detail::write_table2(reports / "table2_emissions.csv", names, metrics);
        detail::write_table3(reports / "table3_welfare.csv", names, metrics);

        nlohmann::json report;
        for (size_t k = 0; k < scenarios.size(); ++k) {
            report["scenarios"][names[k]] = metrics_to_json(metrics[k]);
            report["scenarios"][names[k]]["provenance"] =
                run_manifest["scenarios"][names[k]];
        }
        // Endogenous-vs-exogenous gaps for any twin pair present.
        for (size_t a = 0; a < scenarios.size(); ++a)
            for (size_t b = 0; b < scenarios.size(); ++b) {
                if (!cbam_endogenous(scenarios[a].cbam_mode)) continue;
                if (detail::exogenous_twin(scenarios[a].cbam_mode) != scenarios[b].cbam_mode)
                    continue;
                auto gaps = endogenous_gap(baseline, scenarios[a], solutions[a], scenarios[b],
                                           solutions[b], base_solution);
                for (const auto& [k, v] : gaps)
                    report["endogenous_gaps"][names[a] + "_vs_" + names[b]][k] = v;
            }
        write_json_file(reports / "report.json", report);

        // Side-by-side comparison against the published headline numbers,
        // for whichever scenario matches the fully phased-in endogenous one.
        for (size_t k = 0; k < scenarios.size(); ++k)
            if (scenarios[k].cbam_mode == CbamMode::FullEndogenous) {
                write_reference_comparison(reports / "reference_comparison.csv", metrics[k]);
                break;
            }
        write_json_file(out_dir / "run_manifest.json", run_manifest);
    } catch (const std::exception& err) {
        throw fail("reports", err.what());
    }
}

} // namespace cbge
