#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "impactdid/aggregate.hpp"
#include "impactdid/citenet.hpp"
#include "impactdid/cohort.hpp"
#include "impactdid/config.hpp"
#include "impactdid/corpus.hpp"
#include "impactdid/did.hpp"
#include "impactdid/report.hpp"
#include "impactdid/simgen.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

namespace detail {

inline std::ifstream open_input(const std::string& path, std::string_view what) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + std::string(what) + " file: " + path);
    return in;
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write output file: " + path.string());
    out << contents;
}

}  // namespace detail

// Parsed and validated inputs for one run.
struct LoadedInputs {
    Corpus corpus;
    CohortSpec cohort_spec;
    std::vector<ParseError> errors;  // sorted by (file, line)
};

inline LoadedInputs load_inputs(const AnalysisConfig& config) {
    LoadedInputs inputs;
    auto papers_in = detail::open_input(config.papers_path, "papers");
    PapersParseResult papers = parse_papers(papers_in, config.papers_path);
    auto citations_in = detail::open_input(config.citations_path, "citations");
    CitationsParseResult citations = parse_citations(citations_in, config.citations_path);

    VenueMap vm;
    if (config.venues_path.empty()) {
        vm = default_venue_map();
    } else {
        auto venues_in = detail::open_input(config.venues_path, "venue map");
        VenueMapParseResult venues = load_venue_map(venues_in, config.venues_path);
        inputs.errors.insert(inputs.errors.end(), venues.errors.begin(), venues.errors.end());
        vm = std::move(venues.map);
    }

    auto keywords_in = detail::open_input(config.keywords_path, "keywords");
    inputs.cohort_spec = load_keywords(keywords_in, config.match_mode);
    if (inputs.cohort_spec.keywords.empty())
        throw DataError("keyword file has no keywords: " + config.keywords_path);

    auto built = Corpus::build({std::move(papers)}, {std::move(citations)}, std::move(vm));
    inputs.corpus = std::move(built.corpus);
    inputs.errors.insert(inputs.errors.end(), built.errors.begin(), built.errors.end());
    sort_errors(inputs.errors);
    return inputs;
}

struct RunResult {
    DidReport count_report;  // count measure, field-level cells
    DidReport ratio_report;  // ratio measure, the full origin x dest grid
    std::filesystem::path out_dir;
    std::size_t parse_error_count = 0;
};

// Executes parse -> assign -> network -> aggregate -> trend test -> DID ->
// report. Emits the field-level table, the inter-field table, the DID report
// CSV, the aggregate-cell CSV, and a run summary. The configured mode applies
// to the report matching the configured measure; the companion report uses
// its conventional mode (relative for publication counts, absolute for
// citation ratios). Identical inputs produce byte-identical outputs.
inline RunResult cmd_run(const AnalysisConfig& config) {
    validate(config);
    LoadedInputs inputs = load_inputs(config);
    const Corpus& corpus = inputs.corpus;

    CohortAssignment assignment = assign_groups(corpus, inputs.cohort_spec);
    const std::size_t treatment_size = assignment.group_count(GroupLabel::Treatment);
    const std::size_t control_size = assignment.group_count(GroupLabel::Control);
    if (treatment_size == 0)
        throw DataError("treatment group is empty: no in-scope paper matched the keyword list");

    NetworkResult treatment_net = build_network(corpus, assignment, GroupLabel::Treatment);
    NetworkResult control_net = build_network(corpus, assignment, GroupLabel::Control);
    std::vector<LabeledEdge> edges;
    edges.reserve(treatment_net.edges.size() + control_net.edges.size());
    edges.insert(edges.end(), treatment_net.edges.begin(), treatment_net.edges.end());
    edges.insert(edges.end(), control_net.edges.begin(), control_net.edges.end());

    AnalysisSettings count_settings = config.settings;
    count_settings.measure = Measure::count;
    if (config.settings.measure != Measure::count) count_settings.mode = EffectMode::relative;
    AnalysisSettings ratio_settings = config.settings;
    ratio_settings.measure = Measure::ratio;
    if (config.settings.measure != Measure::ratio) ratio_settings.mode = EffectMode::absolute;

    RunResult result;
    result.count_report = run_analysis(corpus, assignment, edges, count_settings);
    result.ratio_report = run_analysis(corpus, assignment, edges, ratio_settings);
    result.out_dir = config.out_dir;
    result.parse_error_count = inputs.errors.size();

    std::filesystem::create_directories(result.out_dir);
    detail::write_file(result.out_dir / "field_table.txt",
                       render_field_table(result.count_report));
    detail::write_file(result.out_dir / "interfield_table.txt",
                       render_interfield_table(result.ratio_report));

    std::ostringstream did_csv;
    {
        // one CSV holding both analyses; field-level rows have an empty dest
        DidReport combined = result.count_report;
        combined.cells.insert(combined.cells.end(), result.ratio_report.cells.begin(),
                              result.ratio_report.cells.end());
        write_did_csv(did_csv, combined);
    }
    detail::write_file(result.out_dir / "did_report.csv", did_csv.str());

    std::ostringstream agg_csv;
    write_aggregate_csv(agg_csv, result.ratio_report.aggregates);
    detail::write_file(result.out_dir / "aggregate_cells.csv", agg_csv.str());

    if (config.export_assignment) {
        std::ostringstream tsv;
        write_assignment(tsv, corpus, assignment);
        detail::write_file(result.out_dir / "assignment.tsv", tsv.str());
    }
    if (config.export_edges) {
        std::ostringstream tsv;
        write_edges(tsv, corpus, edges);
        detail::write_file(result.out_dir / "edges.tsv", tsv.str());
    }
    if (!inputs.errors.empty()) {
        std::ostringstream txt;
        for (const ParseError& e : inputs.errors)
            txt << e.file << ':' << e.line << ": " << e.message << '\n';
        detail::write_file(result.out_dir / "parse_errors.txt", txt.str());
    }

    std::ostringstream summary;
    summary << "papers = " << corpus.papers().size() << '\n';
    summary << "edges = " << corpus.edges().size() << '\n';
    summary << "resolved_edges = " << corpus.resolved_edge_count() << '\n';
    summary << "dangling_edges = " << corpus.dangling_edge_count() << '\n';
    summary << "treatment_papers = " << treatment_size << '\n';
    summary << "control_papers = " << control_size << '\n';
    summary << "treatment_network_edges = " << treatment_net.edges.size() << '\n';
    summary << "treatment_network_dangling = " << treatment_net.dangling_count << '\n';
    summary << "control_network_edges = " << control_net.edges.size() << '\n';
    summary << "control_network_dangling = " << control_net.dangling_count << '\n';
    summary << "parse_errors = " << inputs.errors.size() << '\n';
    summary << "intervention_year = " << config.intervention_year << '\n';
    summary << "match_mode = " << to_string(config.match_mode) << '\n';
    detail::write_file(result.out_dir / "run_summary.txt", summary.str());
    return result;
}

// Corpus lint: parse everything, report counts and every positional error.
// Returns the number of data errors found.
inline std::size_t cmd_validate(const AnalysisConfig& config, std::ostream& out) {
    LoadedInputs inputs = load_inputs(config);
    out << "papers: " << inputs.corpus.papers().size() << '\n';
    out << "edges: " << inputs.corpus.edges().size() << '\n';
    out << "resolved edges: " << inputs.corpus.resolved_edge_count() << '\n';
    out << "dangling edges: " << inputs.corpus.dangling_edge_count() << '\n';
    out << "venue map entries: " << inputs.corpus.venue_map().size() << '\n';
    out << "keywords: " << inputs.cohort_spec.keywords.size() << '\n';
    out << "errors: " << inputs.errors.size() << '\n';
    for (const ParseError& e : inputs.errors)
        out << e.file << ':' << e.line << ": " << e.message << '\n';
    return inputs.errors.size();
}

// Generates a scenario and writes the corpus files, the keyword list, the
// ground-truth manifest, and a ready-to-run analysis config.
inline GeneratedScenario cmd_simulate(const ScenarioConfig& scenario,
                                      const ScenarioAnalysisDefaults& defaults,
                                      const std::filesystem::path& out_dir) {
    GeneratedScenario generated = generate(scenario);
    std::filesystem::create_directories(out_dir);

    std::ostringstream papers;
    write_papers(papers, generated.corpus);
    detail::write_file(out_dir / "papers.tsv", papers.str());

    std::ostringstream citations;
    write_citations(citations, generated.corpus);
    detail::write_file(out_dir / "citations.tsv", citations.str());

    std::ostringstream venues;
    write_venue_map(venues, generated.corpus.venue_map());
    detail::write_file(out_dir / "venues.csv", venues.str());

    std::ostringstream keywords;
    keywords << "# ground-truth topic keyword\n";
    for (const std::string& k : generated.cohort_spec.keywords) keywords << k << '\n';
    detail::write_file(out_dir / "keywords.txt", keywords.str());

    std::ostringstream manifest;
    write_scenario_manifest(manifest, generated.manifest);
    detail::write_file(out_dir / "manifest.cfg", manifest.str());

    std::ostringstream analysis;
    analysis << "# analysis config generated next to the synthetic corpus\n";
    analysis << "papers = papers.tsv\n";
    analysis << "citations = citations.tsv\n";
    analysis << "venues = venues.csv\n";
    analysis << "keywords = keywords.txt\n";
    analysis << "match_mode = exact-tag\n";
    int intervention = defaults.present ? defaults.intervention_year
                       : scenario.injected ? scenario.injected->from_year
                                           : (scenario.start_year + scenario.end_year) / 2;
    TimeWindow t1 = defaults.present ? defaults.t1 : TimeWindow{scenario.start_year, intervention - 1};
    TimeWindow t2 = defaults.present ? defaults.t2 : TimeWindow{intervention + 1, scenario.end_year};
    TimeWindow pre = defaults.present ? defaults.pre_trend : t1;
    analysis << "intervention_year = " << intervention << '\n';
    analysis << "t1 = " << t1.start_year << ".." << t1.end_year << '\n';
    analysis << "t2 = " << t2.start_year << ".." << t2.end_year << '\n';
    analysis << "pre_trend = " << pre.start_year << ".." << pre.end_year << '\n';
    analysis << "measure = " << (defaults.present ? defaults.measure : "ratio") << '\n';
    analysis << "mode = " << (defaults.present ? defaults.mode : "absolute") << '\n';
    analysis << "alpha = " << detail::format_double(defaults.present ? defaults.alpha : 0.05)
             << '\n';
    analysis << "out_dir = report\n";
    detail::write_file(out_dir / "analysis.cfg", analysis.str());
    return generated;
}

// Reads the topic reports and builds the comparison, naming each topic after
// its file stem.
inline ComparisonReport cmd_compare(const std::vector<std::filesystem::path>& csv_paths) {
    if (csv_paths.size() < 2)
        throw std::invalid_argument("compare: need at least 2 topic report CSVs");
    std::vector<TopicReport> topics;
    topics.reserve(csv_paths.size());
    for (const auto& path : csv_paths) {
        auto in = detail::open_input(path.string(), "topic report");
        topics.push_back(read_topic_report(in, path.stem().string()));
    }
    return compare_topics(std::move(topics));
}

}  // namespace impactdid
