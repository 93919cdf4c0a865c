// impact_did: quantify the research impact of a technical topic from a
// citation corpus via difference-in-differences.
//
// Subcommands: run, compare, simulate, validate. Exit codes: 0 success,
// 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "impactdid/config.hpp"
#include "impactdid/pipeline.hpp"
#include "impactdid/report.hpp"

namespace fs = std::filesystem;
using namespace impactdid;

namespace {

int run_command(const std::string& config_path, const std::string& out_override) {
    AnalysisConfig config = load_analysis_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    RunResult result = cmd_run(config);
    std::cout << render_field_table(result.count_report) << '\n';
    std::cout << render_interfield_table(result.ratio_report) << '\n';
    std::cout << "report written to " << result.out_dir.string() << '\n';
    if (result.parse_error_count > 0)
        std::cout << result.parse_error_count << " input line(s) skipped, see "
                  << (result.out_dir / "parse_errors.txt").string() << '\n';
    return 0;
}

int compare_command(const std::vector<std::string>& csv_paths, const std::string& out_dir) {
    std::vector<fs::path> paths(csv_paths.begin(), csv_paths.end());
    ComparisonReport report = cmd_compare(paths);
    std::cout << render_comparison(report);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream txt(fs::path(out_dir) / "comparison.txt", std::ios::binary);
        txt << render_comparison(report);
        std::ofstream csv(fs::path(out_dir) / "comparison.csv", std::ios::binary);
        write_comparison_csv(csv, report);
        std::cout << "comparison written to " << out_dir << '\n';
    }
    return 0;
}

int simulate_command(const std::string& config_path, const std::string& out_dir,
                     long long seed_override, bool seed_given) {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open scenario config: " + config_path);
    ScenarioConfig scenario = load_scenario_config(in);
    in.clear();
    in.seekg(0);
    ScenarioAnalysisDefaults defaults = load_scenario_analysis_defaults(in);
    if (seed_given) scenario.seed = static_cast<std::uint64_t>(seed_override);
    GeneratedScenario generated = cmd_simulate(scenario, defaults, out_dir);
    std::cout << "generated " << generated.manifest.total_papers << " papers and "
              << generated.manifest.total_edges << " citation edges in " << out_dir << '\n';
    std::cout << "run the analysis with: impact_did run --config " << out_dir << "/analysis.cfg\n";
    return 0;
}

int validate_command(const std::string& config_path) {
    AnalysisConfig config = load_analysis_config(config_path);
    std::size_t errors = cmd_validate(config, std::cout);
    return errors == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal research-impact analysis over citation corpora"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = 0;
    std::vector<std::string> csv_paths;

    CLI::App* run = app.add_subcommand("run", "run the full analysis pipeline");
    run->add_option("--config", config_path, "analysis config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");

    CLI::App* compare = app.add_subcommand("compare", "compare per-topic report CSVs");
    compare->add_option("reports", csv_paths, "did_report.csv files, one per topic")
        ->required()
        ->expected(-2);
    compare->add_option("--out", out_dir, "directory for comparison.txt/csv");

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic corpus");
    simulate->add_option("--config", config_path, "scenario config file")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();
    CLI::Option* seed_opt = simulate->add_option("--seed", seed, "override the scenario seed");

    CLI::App* validate = app.add_subcommand("validate", "lint the configured corpus files");
    validate->add_option("--config", config_path, "analysis config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return run_command(config_path, out_dir);
        if (compare->parsed()) return compare_command(csv_paths, out_dir);
        if (simulate->parsed())
            return simulate_command(config_path, out_dir, seed, seed_opt->count() > 0);
        if (validate->parsed()) return validate_command(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
