// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. argv[1] = impact_did binary, argv[2] =
// repository root. Exits nonzero if any criterion fails.

#include <sys/resource.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "impactdid/aggregate.hpp"
#include "impactdid/citenet.hpp"
#include "impactdid/cohort.hpp"
#include "impactdid/config.hpp"
#include "impactdid/corpus.hpp"
#include "impactdid/did.hpp"
#include "impactdid/pipeline.hpp"
#include "impactdid/report.hpp"
#include "impactdid/simgen.hpp"

namespace fs = std::filesystem;
using namespace impactdid;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::vector<LabeledEdge> both_networks(const Corpus& corpus, const CohortAssignment& assignment) {
    NetworkResult treat = build_network(corpus, assignment, GroupLabel::Treatment);
    NetworkResult ctrl = build_network(corpus, assignment, GroupLabel::Control);
    std::vector<LabeledEdge> edges = std::move(treat.edges);
    edges.insert(edges.end(), ctrl.edges.begin(), ctrl.edges.end());
    return edges;
}

// --- criterion 1: oracle equivalence on 100 small random corpora -------------

void criterion_1() {
    auto start = Clock::now();
    const FieldLabel field_pool[6] = {FieldLabel::ClassicalAI, FieldLabel::ML, FieldLabel::DM,
                                      FieldLabel::CV,          FieldLabel::NLP, FieldLabel::SR};
    std::size_t corpora = 0, cells_checked = 0;
    double max_diff = 0.0;
    bool counts_exact = true, agree = true;
    std::string first_issue;

    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 param_rng(seed * 7919);
        ScenarioConfig cfg;
        cfg.seed = seed;
        cfg.start_year = 2006;
        cfg.end_year = 2013;
        std::size_t nf = 3 + param_rng() % 3;
        // at most 5 fields x 4 papers/year x 8 years = 160 papers
        for (std::size_t i = 0; i < nf; ++i)
            cfg.fields.push_back({field_pool[i], 2.0 + static_cast<double>(param_rng() % 3), 0.0});
        cfg.cite_prob.assign(nf, std::vector<double>(nf, 0.0));
        for (auto& row : cfg.cite_prob)
            for (double& p : row)
                p = 0.05 + 0.3 * (static_cast<double>(param_rng() % 1000) / 1000.0);
        cfg.treatment_share = 0.3 + 0.4 * (static_cast<double>(param_rng() % 1000) / 1000.0);
        cfg.refs_per_paper = 1.0 + static_cast<double>(param_rng() % 3);
        if (seed % 3 == 0)
            cfg.injected = InjectedEffect{cfg.fields[0].field, cfg.fields[1 % nf].field, 0.2, 2010};
        GeneratedScenario s = generate(cfg);
        if (s.corpus.papers().size() > 200) {
            agree = false;
            first_issue = "scenario exceeded 200 papers";
            break;
        }
        ++corpora;
        std::vector<LabeledEdge> edges = both_networks(s.corpus, s.assignment);

        AnalysisSettings settings;
        settings.t1 = {2006, 2009};
        settings.t2 = {2010, 2013};
        settings.pre_trend_years = {2006, 2009};
        for (Measure measure : {Measure::count, Measure::ratio}) {
            for (EffectMode mode : {EffectMode::absolute, EffectMode::relative}) {
                settings.measure = measure;
                settings.mode = mode;
                DidReport rep = run_analysis(s.corpus, s.assignment, edges, settings);
                auto oracle =
                    brute_force_did(s.corpus, s.assignment, settings.t1, settings.t2, measure, mode);
                if (rep.cells.size() != oracle.size()) {
                    agree = false;
                    first_issue = "cell count mismatch";
                    continue;
                }
                for (std::size_t i = 0; i < oracle.size(); ++i) {
                    ++cells_checked;
                    for (int k = 0; k < 4; ++k) {
                        double lib = rep.cells[i].c_values[k];
                        double ref = oracle[i].c_values[k];
                        if (std::isnan(lib) != std::isnan(ref)) {
                            agree = false;
                            first_issue = "defined/undefined mismatch";
                            continue;
                        }
                        if (std::isnan(lib)) continue;
                        if (measure == Measure::count && lib != ref) counts_exact = false;
                        max_diff = std::max(max_diff, std::fabs(lib - ref));
                    }
                    if (rep.cells[i].ate.has_value() != oracle[i].ate.has_value()) {
                        agree = false;
                        first_issue = "degenerate-marker mismatch";
                    } else if (rep.cells[i].ate) {
                        max_diff =
                            std::max(max_diff, std::fabs(*rep.cells[i].ate - *oracle[i].ate));
                    }
                }
            }
        }
    }
    double elapsed = seconds_since(start);
    bool pass = agree && counts_exact && max_diff <= 1e-12 && elapsed < 10.0 && corpora == 100;
    std::ostringstream detail;
    detail << corpora << " corpora, " << cells_checked << " cells, max |diff| = " << max_diff
           << ", " << elapsed << " s";
    if (!first_issue.empty()) detail << ", issue: " << first_issue;
    report(1, "oracle equivalence (counts exact, ratios/ATEs <= 1e-12, < 10 s)", pass,
           detail.str());
}

// --- criterion 2: injected-effect recovery at ~50k papers --------------------

void criterion_2() {
    ScenarioConfig base;
    base.start_year = 2005;
    base.end_year = 2017;
    base.fields = {{FieldLabel::SR, 2400, 0},  {FieldLabel::CV, 400, 0}, {FieldLabel::NLP, 400, 0},
                   {FieldLabel::ML, 400, 0},   {FieldLabel::DM, 400, 0},
                   {FieldLabel::ClassicalAI, 400, 0}};
    base.cite_prob.assign(6, std::vector<double>(6, 0.004));
    base.treatment_share = 0.65;
    base.refs_per_paper = 0.0;
    base.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.10, 2012};

    AnalysisSettings settings;
    settings.t1 = {2007, 2011};
    settings.t2 = {2013, 2017};
    settings.pre_trend_years = {2007, 2011};

    int recovered = 0;
    double worst_injected = 0.0, worst_null = 0.0, worst_seconds = 0.0;
    std::uint64_t papers = 0;
    bool nulls_ok = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto start = Clock::now();
        ScenarioConfig cfg = base;
        cfg.seed = seed;
        GeneratedScenario s = generate(cfg);
        papers = s.manifest.total_papers;
        CohortAssignment assignment = assign_groups(s.corpus, s.cohort_spec);
        std::vector<LabeledEdge> edges = both_networks(s.corpus, assignment);
        DidReport rep = run_analysis(s.corpus, assignment, edges, settings);
        for (const DidCell& cell : rep.cells) {
            if (!cell.ate) {
                nulls_ok = false;
                continue;
            }
            bool is_injected = cell.origin == FieldLabel::SR && cell.dest == FieldLabel::CV;
            if (is_injected) {
                double err = std::fabs(*cell.ate - 0.10);
                worst_injected = std::max(worst_injected, err);
                if (err <= 0.01) ++recovered;
            } else {
                worst_null = std::max(worst_null, std::fabs(*cell.ate));
                if (std::fabs(*cell.ate) > 0.02) nulls_ok = false;
            }
        }
        worst_seconds = std::max(worst_seconds, seconds_since(start));
    }
    bool pass = recovered >= 19 && nulls_ok && worst_seconds < 60.0;
    std::ostringstream detail;
    detail << papers << " papers/seed, " << recovered << "/20 seeds within ±0.01 (worst err "
           << worst_injected << "), worst null |ate| = " << worst_null << ", worst seed "
           << worst_seconds << " s";
    report(2, "injected +0.10 recovery (>=19/20 within ±0.01, nulls within ±0.02, < 60 s/seed)",
           pass, detail.str());
}

// --- criterion 3: null calibration of the trend test --------------------------

void criterion_3() {
    // 2003 is a burn-in year so every tested year has citable candidates
    ScenarioConfig base;
    base.start_year = 2003;
    base.end_year = 2011;
    base.fields = {{FieldLabel::ML, 300, 0}, {FieldLabel::CV, 300, 0}};
    base.cite_prob.assign(2, std::vector<double>(2, 0.2));
    base.treatment_share = 0.5;
    base.refs_per_paper = 0.0;

    int rejections = 0, tests = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        ScenarioConfig cfg = base;
        cfg.seed = seed;
        GeneratedScenario s = generate(cfg);
        std::vector<LabeledEdge> edges = both_networks(s.corpus, s.assignment);
        CitationTallies tallies(s.corpus, s.assignment, edges);
        TimeWindow years{2004, 2011};
        YearlySeries treat =
            tallies.series(FieldLabel::ML, GroupLabel::Treatment, FieldLabel::CV, years,
                           Measure::ratio);
        YearlySeries ctrl = tallies.series(FieldLabel::ML, GroupLabel::Control, FieldLabel::CV,
                                           years, Measure::ratio);
        TrendTestResult t = parallel_trend_test(treat, ctrl, 0.05);
        ++tests;
        if (!t.parallel) ++rejections;
    }
    double rate = static_cast<double>(rejections) / static_cast<double>(tests);
    bool null_ok = rate >= 0.03 && rate <= 0.07;

    // noiseless slope gap of 1.0: must reject every time
    std::mt19937_64 rng(424242);
    int gap_rejected = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        double intercept_a = static_cast<double>(rng() % 1000) / 100.0;
        double intercept_b = static_cast<double>(rng() % 1000) / 100.0;
        double slope = static_cast<double>(rng() % 500) / 100.0;
        YearlySeries a, b;
        a.origin = b.origin = FieldLabel::ML;
        a.group = GroupLabel::Treatment;
        b.group = GroupLabel::Control;
        for (int year = 2004; year <= 2011; ++year) {
            a.points[year] = intercept_a + (slope + 1.0) * (year - 2004);
            b.points[year] = intercept_b + slope * (year - 2004);
        }
        if (!parallel_trend_test(a, b, 0.05).parallel) ++gap_rejected;
    }
    bool pass = null_ok && gap_rejected == 1000;
    std::ostringstream detail;
    detail << "null rejection rate " << rate * 100.0 << "% over " << tests
           << " seeds (target 5% ± 2 p.p.), noiseless gap rejected " << gap_rejected << "/1000";
    report(3, "trend-test calibration at alpha = 0.05", pass, detail.str());
}

// --- criterion 4: formula identities ------------------------------------------

void criterion_4() {
    std::mt19937_64 rng(20240);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        double a = uniform(0.05, 5), b = uniform(0.05, 5), c = uniform(0.05, 5),
               d = uniform(0.05, 5);
        worst = std::max(worst, std::fabs(ate_absolute(a, b, c, d) + ate_absolute(c, d, a, b)));
        worst = std::max(worst, std::fabs(ate_relative(a, b, c, d) + ate_relative(c, d, a, b)));
        double k = uniform(0.1, 10);
        worst = std::max(worst,
                         std::fabs(ate_relative(k * a, k * b, c, d) - ate_relative(a, b, c, d)));
        double delta = uniform(0, 2);
        worst = std::max(worst, std::fabs(ate_absolute(a, a + delta, c, c + delta)));
        double factor = uniform(0.2, 5);
        worst = std::max(worst, std::fabs(ate_relative(a, a * factor, c, c * factor)));
    }
    bool pass = worst <= 1e-12;
    std::ostringstream detail;
    detail << "1000 random 4-tuples, worst identity residual = " << worst;
    report(4, "formula identities to 1e-12", pass, detail.str());
}

// --- criterion 5: paper-fixture arithmetic ------------------------------------

void criterion_5(const fs::path& tmp) {
    auto write_fixture = [&](const std::string& name,
                             const std::array<double, 6>& pct) {
        DidReport rep;
        rep.settings.measure = Measure::count;
        rep.settings.mode = EffectMode::relative;
        const FieldLabel order[6] = {FieldLabel::ClassicalAI, FieldLabel::CV, FieldLabel::DM,
                                     FieldLabel::ML, FieldLabel::NLP, FieldLabel::SR};
        for (int i = 0; i < 6; ++i) {
            DidCell cell;
            cell.origin = order[i];
            cell.mode = EffectMode::relative;
            cell.ate = std::log2(1.0 + pct[i] / 100.0);
            rep.cells.push_back(cell);
        }
        std::ofstream out(tmp / name);
        write_did_csv(out, rep);
        return tmp / name;
    };
    fs::create_directories(tmp);
    fs::path dl = write_fixture("DL.csv", {5.05, 42.15, 3.84, 5.76, 35.31, 6.02});
    fs::path intp = write_fixture("INTP.csv", {1.54, 17.44, 1.91, 1.46, 4.09, 5.14});
    ComparisonReport cmp = cmd_compare({dl, intp});
    double dl_avg = cmp.averages[0];
    double ratio = 0.0;
    for (const auto& row : cmp.ratios)
        if (row.numerator == "DL" && row.denominator == "INTP") ratio = row.ratio;
    bool pass = std::fabs(dl_avg - 16.35) <= 0.0051 && std::fabs(ratio - 3.1) <= 0.05;
    std::ostringstream detail;
    detail << "DL average = " << dl_avg << " (target 16.35), DL/INTP ratio = " << ratio
           << " (target 3.1 ± 0.05)";
    report(5, "paper-fixture arithmetic via cmd_compare", pass, detail.str());
}

// --- criterion 6: end-to-end determinism --------------------------------------

int run_shell(const std::string& cmd) {
    int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_6(const std::string& bin, const fs::path& repo, const fs::path& tmp) {
    const fs::path a = tmp / "demo_a", b = tmp / "demo_b";
    std::string scenario = (repo / "data" / "demo_scenario.cfg").string();
    bool pass = true;
    std::ostringstream detail;
    if (run_shell(bin + " simulate --config " + scenario + " --out " + a.string()) != 0 ||
        run_shell(bin + " simulate --config " + scenario + " --out " + b.string()) != 0 ||
        run_shell(bin + " run --config " + (a / "analysis.cfg").string() + " --out " +
                  (a / "report").string()) != 0 ||
        run_shell(bin + " run --config " + (b / "analysis.cfg").string() + " --out " +
                  (b / "report").string()) != 0) {
        pass = false;
        detail << "pipeline invocation failed";
    } else {
        int files = 0;
        for (const auto& entry : fs::recursive_directory_iterator(a)) {
            if (!entry.is_regular_file()) continue;
            fs::path rel = fs::relative(entry.path(), a);
            ++files;
            if (slurp(entry.path()) != slurp(b / rel)) {
                pass = false;
                detail << "differs: " << rel.string() << "; ";
            }
        }
        detail << files << " files byte-compared across two full runs";
    }
    report(6, "end-to-end determinism on the shipped demo scenario", pass, detail.str());
}

// --- criterion 7: scale smoke test --------------------------------------------

void criterion_7(const fs::path& tmp) {
    ScenarioConfig cfg;
    cfg.seed = 7;
    cfg.start_year = 2005;
    cfg.end_year = 2017;
    for (FieldLabel f : kMappedFields) cfg.fields.push_back({f, 12900, 0});
    cfg.cite_prob.assign(6, std::vector<double>(6, 0.35));
    cfg.treatment_share = 0.5;
    cfg.refs_per_paper = 5.5;
    cfg.injected = InjectedEffect{FieldLabel::SR, FieldLabel::CV, 0.10, 2012};

    const fs::path dir = tmp / "scale";
    fs::create_directories(dir);
    std::uint64_t papers = 0, edges_total = 0;
    {
        GeneratedScenario s = generate(cfg);
        papers = s.manifest.total_papers;
        edges_total = s.manifest.total_edges;
        std::ofstream p(dir / "papers.tsv", std::ios::binary);
        write_papers(p, s.corpus);
        std::ofstream c(dir / "citations.tsv", std::ios::binary);
        write_citations(c, s.corpus);
        std::ofstream v(dir / "venues.csv", std::ios::binary);
        write_venue_map(v, s.corpus.venue_map());
        std::ofstream k(dir / "keywords.txt", std::ios::binary);
        for (const std::string& kw : s.cohort_spec.keywords) k << kw << '\n';
    }  // generated corpus freed before the timed ingest

    auto start = Clock::now();
    AnalysisConfig config;
    config.papers_path = (dir / "papers.tsv").string();
    config.citations_path = (dir / "citations.tsv").string();
    config.venues_path = (dir / "venues.csv").string();
    config.keywords_path = (dir / "keywords.txt").string();
    config.match_mode = MatchMode::exact_tag;
    config.settings.t1 = {2007, 2011};
    config.settings.t2 = {2013, 2017};
    config.settings.pre_trend_years = {2007, 2011};
    config.out_dir = (dir / "report").string();
    RunResult result = cmd_run(config);
    double elapsed = seconds_since(start);

    struct rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    double peak_gb = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);

    bool cells_ok = result.ratio_report.cells.size() == 36;
    bool pass = papers >= 1000000 && edges_total >= 5000000 && elapsed < 300.0 && peak_gb < 4.0 &&
                cells_ok;
    std::ostringstream detail;
    detail << papers << " papers, " << edges_total << " edges, ingest+analysis " << elapsed
           << " s (< 300), peak RSS " << peak_gb << " GB (< 4)";
    report(7, "scale smoke test (1M papers / 5M edges)", pass, detail.str());

    std::error_code ec;
    fs::remove_all(dir, ec);  // ~0.5 GB of fixtures
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <impact_did binary> <repo root>\n");
        return 2;
    }
    const std::string bin = argv[1];
    const fs::path repo = argv[2];
    const fs::path tmp =
        fs::temp_directory_path() / ("impactdid_acceptance_" + std::to_string(getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5(tmp / "fixtures");
    criterion_6(bin, repo, tmp);
    criterion_7(tmp);

    std::error_code ec;
    fs::remove_all(tmp, ec);
    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", g_failures);
    return 1;
}
