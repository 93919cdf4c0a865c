#include <doctest.h>

#include <cmath>
#include <sstream>

#include "impactdid/pipeline.hpp"
#include "impactdid/simgen.hpp"
#include "test_support.hpp"

using namespace impactdid;

namespace {

ScenarioConfig small_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.start_year = 2006;
    cfg.end_year = 2015;
    cfg.fields = {{FieldLabel::SR, 12, 1}, {FieldLabel::CV, 10, 0}, {FieldLabel::NLP, 8, 0}};
    cfg.cite_prob.assign(3, std::vector<double>(3, 0.25));
    cfg.treatment_share = 0.5;
    cfg.refs_per_paper = 1.5;
    return cfg;
}

std::string serialize(const Corpus& corpus) {
    std::ostringstream out;
    write_papers(out, corpus);
    write_citations(out, corpus);
    write_venue_map(out, corpus.venue_map());
    return out.str();
}

std::vector<LabeledEdge> all_edges(const GeneratedScenario& s) {
    NetworkResult treat = build_network(s.corpus, s.assignment, GroupLabel::Treatment);
    NetworkResult ctrl = build_network(s.corpus, s.assignment, GroupLabel::Control);
    std::vector<LabeledEdge> edges = treat.edges;
    edges.insert(edges.end(), ctrl.edges.begin(), ctrl.edges.end());
    return edges;
}

}  // namespace

TEST_CASE("a fixed seed reproduces the corpus byte for byte") {
    GeneratedScenario a = generate(small_scenario(99));
    GeneratedScenario b = generate(small_scenario(99));
    CHECK(serialize(a.corpus) == serialize(b.corpus));
    CHECK(a.manifest.total_papers == b.manifest.total_papers);
    CHECK(a.manifest.total_edges == b.manifest.total_edges);

    GeneratedScenario c = generate(small_scenario(100));
    CHECK(serialize(a.corpus) != serialize(c.corpus));
}

TEST_CASE("a null scenario has zero configured effect everywhere") {
    GeneratedScenario s = generate(small_scenario(7));
    for (const FieldVolume& o : s.manifest.config.fields)
        for (const FieldVolume& d : s.manifest.config.fields)
            CHECK(s.manifest.true_effect(o.field, d.field) == 0.0);
    CHECK(s.manifest.clamps.empty());
}

TEST_CASE("assign_groups recovers the ground-truth split exactly") {
    GeneratedScenario s = generate(small_scenario(42));
    CohortAssignment recovered = assign_groups(s.corpus, s.cohort_spec);
    CHECK(recovered == s.assignment);
}

TEST_CASE("citation edges always point backward in time") {
    GeneratedScenario s = generate(small_scenario(5));
    CHECK(s.corpus.dangling_edge_count() == 0);
    for (std::size_t e = 0; e < s.corpus.edges().size(); ++e) {
        const PaperRecord& citing = s.corpus.papers()[s.corpus.citing_index(e)];
        const PaperRecord& cited = s.corpus.papers()[s.corpus.cited_index(e)];
        CHECK(cited.year < citing.year);
    }
}

TEST_CASE("probability clamping is reported in the manifest") {
    ScenarioConfig cfg = small_scenario(3);
    cfg.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.9, 2011};
    GeneratedScenario s = generate(cfg);
    REQUIRE(s.manifest.clamps.size() == 1);
    CHECK(s.manifest.clamps[0].requested == doctest::Approx(1.15));
    CHECK(s.manifest.clamps[0].clamped == doctest::Approx(1.0));
    CHECK(s.manifest.true_effect(FieldLabel::SR, FieldLabel::CV) == doctest::Approx(0.75));
}

TEST_CASE("manifest tallies equal the pipeline's measured ratios exactly") {
    ScenarioConfig cfg = small_scenario(21);
    cfg.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.3, 2011};
    GeneratedScenario s = generate(cfg);
    std::vector<LabeledEdge> edges = all_edges(s);

    for (const FieldVolume& o : cfg.fields) {
        for (const FieldVolume& d : cfg.fields) {
            for (GroupLabel g : {GroupLabel::Treatment, GroupLabel::Control}) {
                for (TimeWindow w : {TimeWindow{2006, 2010}, TimeWindow{2011, 2015}}) {
                    auto expected = s.manifest.true_ratio(o.field, g, d.field, w);
                    auto measured =
                        citation_ratio(edges, s.assignment, s.corpus, w, o.field, g, d.field);
                    CHECK(expected.has_value() == measured.has_value());
                    if (expected && measured)
                        CHECK(*expected == doctest::Approx(measured->ratio).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("an injected effect shows up in the realized ratios") {
    ScenarioConfig cfg;
    cfg.seed = 8;
    cfg.start_year = 2005;
    cfg.end_year = 2017;
    cfg.fields = {{FieldLabel::SR, 900, 0}, {FieldLabel::CV, 300, 0}, {FieldLabel::NLP, 300, 0}};
    cfg.cite_prob.assign(3, std::vector<double>(3, 0.05));
    cfg.treatment_share = 0.5;
    cfg.refs_per_paper = 0.2;
    cfg.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.10, 2012};
    GeneratedScenario s = generate(cfg);

    TimeWindow t1{2007, 2011}, t2{2013, 2017};
    auto rise_treat = *s.manifest.true_ratio(FieldLabel::SR, GroupLabel::Treatment, FieldLabel::CV, t2) -
                      *s.manifest.true_ratio(FieldLabel::SR, GroupLabel::Treatment, FieldLabel::CV, t1);
    auto rise_ctrl = *s.manifest.true_ratio(FieldLabel::SR, GroupLabel::Control, FieldLabel::CV, t2) -
                     *s.manifest.true_ratio(FieldLabel::SR, GroupLabel::Control, FieldLabel::CV, t1);
    CHECK(rise_treat - rise_ctrl == doctest::Approx(0.10).epsilon(0.15));

    AnalysisSettings settings;
    settings.t1 = t1;
    settings.t2 = t2;
    settings.pre_trend_years = t1;
    DidReport report = run_analysis(s.corpus, s.assignment, all_edges(s), settings);
    for (const DidCell& cell : report.cells) {
        if (cell.origin == FieldLabel::SR && cell.dest == FieldLabel::CV) {
            REQUIRE(cell.ate.has_value());
            CHECK(std::fabs(*cell.ate - 0.10) < 0.03);
        }
    }
}

TEST_CASE("estimation error shrinks as the corpus grows") {
    auto mean_abs_error = [](double volume_scale) {
        double total = 0.0;
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            ScenarioConfig cfg;
            cfg.seed = seed;
            cfg.start_year = 2005;
            cfg.end_year = 2017;
            cfg.fields = {{FieldLabel::SR, 120 * volume_scale, 0},
                          {FieldLabel::CV, 60 * volume_scale, 0},
                          {FieldLabel::NLP, 60 * volume_scale, 0}};
            cfg.cite_prob.assign(3, std::vector<double>(3, 0.05));
            cfg.treatment_share = 0.5;
            cfg.refs_per_paper = 0.1;
            cfg.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.10, 2012};
            GeneratedScenario s = generate(cfg);
            AnalysisSettings settings;
            settings.t1 = {2007, 2011};
            settings.t2 = {2013, 2017};
            settings.pre_trend_years = {2007, 2011};
            DidReport rep = run_analysis(s.corpus, s.assignment, all_edges(s), settings);
            for (const DidCell& cell : rep.cells)
                if (cell.origin == FieldLabel::SR && cell.dest == FieldLabel::CV)
                    total += std::fabs(*cell.ate - 0.10);
        }
        return total / 6.0;
    };
    double small = mean_abs_error(1.0);
    double large = mean_abs_error(16.0);
    CHECK(large < small);
    CHECK(large < 0.01);
}

TEST_CASE("brute-force oracle and pipeline agree cell by cell") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 14ull, 25ull}) {
        ScenarioConfig cfg = small_scenario(seed);
        if (seed % 2 == 1) cfg.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.2, 2011};
        GeneratedScenario s = generate(cfg);
        std::vector<LabeledEdge> edges = all_edges(s);

        AnalysisSettings settings;
        settings.t1 = {2006, 2010};
        settings.t2 = {2011, 2015};
        settings.pre_trend_years = {2006, 2010};

        for (Measure measure : {Measure::ratio, Measure::count}) {
            for (EffectMode mode : {EffectMode::absolute, EffectMode::relative}) {
                settings.measure = measure;
                settings.mode = mode;
                DidReport report = run_analysis(s.corpus, s.assignment, edges, settings);
                auto oracle = brute_force_did(s.corpus, s.assignment, settings.t1, settings.t2,
                                              measure, mode);
                REQUIRE(report.cells.size() == oracle.size());
                for (std::size_t i = 0; i < oracle.size(); ++i) {
                    CHECK(report.cells[i].origin == oracle[i].origin);
                    CHECK(report.cells[i].dest == oracle[i].dest);
                    for (int k = 0; k < 4; ++k) {
                        double lib = report.cells[i].c_values[k];
                        double ref = oracle[i].c_values[k];
                        CHECK(std::isnan(lib) == std::isnan(ref));
                        if (!std::isnan(lib)) CHECK(std::fabs(lib - ref) <= 1e-12);
                    }
                    CHECK(report.cells[i].ate.has_value() == oracle[i].ate.has_value());
                    if (report.cells[i].ate)
                        CHECK(std::fabs(*report.cells[i].ate - *oracle[i].ate) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("empty treatment yields degenerate markers from both routes") {
    auto built = testsupport::corpus_from_text(
        "p1\t2008\tCVPR\tsvm\n"
        "p2\t2014\tCVPR\tsvm\n"
        "p3\t2008\tACL\tsvm\n"
        "p4\t2014\tACL\tsvm\n",
        "");
    CohortAssignment a = assign_groups(built.corpus, CohortSpec::from_keywords({"nothing"}));
    AnalysisSettings settings;
    settings.t1 = {2007, 2009};
    settings.t2 = {2013, 2015};
    settings.pre_trend_years = {2007, 2009};
    DidReport report = run_analysis(built.corpus, a, {}, settings);
    auto oracle =
        brute_force_did(built.corpus, a, settings.t1, settings.t2, Measure::ratio,
                        EffectMode::absolute);
    REQUIRE(report.cells.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK_FALSE(report.cells[i].ate.has_value());
        CHECK_FALSE(oracle[i].ate.has_value());
    }
}

TEST_CASE("scenario validation rejects bad configurations") {
    ScenarioConfig cfg = small_scenario(1);
    cfg.treatment_share = 1.5;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);

    cfg = small_scenario(1);
    cfg.cite_prob[0][1] = 1.7;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);

    cfg = small_scenario(1);
    cfg.fields.push_back({FieldLabel::SR, 5, 0});  // duplicate
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);

    cfg = small_scenario(1);
    cfg.injected = InjectedEffect{FieldLabel::DM, FieldLabel::CV, 0.1, 2010};  // DM not configured
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}
