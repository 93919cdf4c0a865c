#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "impactdid/aggregate.hpp"
#include "impactdid/cohort.hpp"
#include "impactdid/corpus.hpp"
#include "impactdid/did.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

namespace detail {

// Deterministic sampling helpers over mt19937_64. The standard distributions
// are not portable across library implementations, so draws are derived from
// raw engine output only.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform double in [0, 1), 53 mantissa bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform integer in [0, n), rejection sampling
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Knuth product method; split to avoid underflow for large means
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        std::uint64_t total = 0;
        while (mean > 500.0) {
            total += poisson_small(500.0);
            mean -= 500.0;
        }
        return total + poisson_small(mean);
    }

  private:
    std::uint64_t poisson_small(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 engine_;
};

}  // namespace detail

struct FieldVolume {
    FieldLabel field = FieldLabel::ClassicalAI;
    double base = 0.0;    // papers in start_year
    double growth = 0.0;  // papers added per year
};

struct InjectedEffect {
    FieldLabel origin = FieldLabel::SR;
    FieldLabel dest = FieldLabel::CV;
    double delta = 0.0;
    int from_year = 0;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    int start_year = 2005;
    int end_year = 2017;
    std::vector<FieldVolume> fields;
    double treatment_share = 0.5;
    // cite_prob[i][j]: probability that a paper of fields[i] cites at least
    // one paper of fields[j]
    std::vector<std::vector<double>> cite_prob;
    std::optional<InjectedEffect> injected;
    double refs_per_paper = 2.0;
    std::string topic_keyword = "injected topic";
    std::string control_tag = "baseline method";
};

inline void validate(const ScenarioConfig& c) {
    if (c.start_year > c.end_year) throw std::invalid_argument("scenario: start_year > end_year");
    if (c.fields.empty()) throw std::invalid_argument("scenario: no fields configured");
    if (!(c.treatment_share > 0.0 && c.treatment_share < 1.0))
        throw std::invalid_argument("scenario: treatment_share must be in (0, 1)");
    if (c.refs_per_paper < 0.0) throw std::invalid_argument("scenario: refs_per_paper < 0");
    std::set<FieldLabel> seen;
    for (const FieldVolume& f : c.fields) {
        if (f.field == FieldLabel::Other)
            throw std::invalid_argument("scenario: Other is not a generatable field");
        if (!seen.insert(f.field).second)
            throw std::invalid_argument("scenario: duplicate field");
    }
    if (c.cite_prob.size() != c.fields.size())
        throw std::invalid_argument("scenario: cite_prob rows must match field count");
    for (const auto& row : c.cite_prob) {
        if (row.size() != c.fields.size())
            throw std::invalid_argument("scenario: cite_prob columns must match field count");
        for (double p : row)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("scenario: citation probability outside [0, 1]");
    }
    if (c.injected) {
        bool origin_ok = false, dest_ok = false;
        for (const FieldVolume& f : c.fields) {
            origin_ok |= f.field == c.injected->origin;
            dest_ok |= f.field == c.injected->dest;
        }
        if (!origin_ok || !dest_ok)
            throw std::invalid_argument("scenario: injected effect names a field not configured");
    }
}

struct ClampNote {
    FieldLabel origin;
    FieldLabel dest;
    double requested;  // base + delta before clamping
    double clamped;
};

// Ground truth emitted next to the generated corpus. The realized tallies
// come from the generator's own bookkeeping, so expected ratios for any
// window are exact, independent of the analysis pipeline.
struct ScenarioManifest {
    ScenarioConfig config;
    std::vector<ClampNote> clamps;
    std::uint64_t total_papers = 0;
    std::uint64_t total_edges = 0;
    // volume[i][g][y - start_year]: papers of fields[i] in group g and year y
    std::vector<std::array<std::vector<std::uint64_t>, 2>> volume;
    // success[i][g][y - start_year][j]: papers of fields[i], group g, year y
    // that cite at least one paper of fields[j]
    std::vector<std::array<std::vector<std::vector<std::uint64_t>>, 2>> success;

    std::size_t field_pos(FieldLabel f) const {
        for (std::size_t i = 0; i < config.fields.size(); ++i)
            if (config.fields[i].field == f) return i;
        throw std::invalid_argument("manifest: field not in scenario");
    }

    // Configured per-cell true effect after clamping: the post-intervention
    // shift of the citation probability for treatment papers.
    double true_effect(FieldLabel origin, FieldLabel dest) const {
        if (!config.injected || config.injected->origin != origin ||
            config.injected->dest != dest)
            return 0.0;
        std::size_t i = field_pos(origin), j = field_pos(dest);
        double base = config.cite_prob[i][j];
        double shifted = std::min(1.0, std::max(0.0, base + config.injected->delta));
        return shifted - base;
    }

    // Exact realized ratio over a window, from the generator's tallies.
    std::optional<double> true_ratio(FieldLabel origin, GroupLabel group, FieldLabel dest,
                                     const TimeWindow& w) const {
        std::size_t i = field_pos(origin), j = field_pos(dest);
        std::size_t g = static_cast<std::size_t>(group);
        std::uint64_t denom = 0, numer = 0;
        for (int y = w.start_year; y <= w.end_year; ++y) {
            if (y < config.start_year || y > config.end_year) continue;
            std::size_t yi = static_cast<std::size_t>(y - config.start_year);
            denom += volume[i][g][yi];
            numer += success[i][g][yi][j];
        }
        if (denom == 0) return std::nullopt;
        return static_cast<double>(numer) / static_cast<double>(denom);
    }
};

struct GeneratedScenario {
    Corpus corpus;
    CohortAssignment assignment;  // ground-truth treatment/control split
    CohortSpec cohort_spec;       // keyword spec that recovers the split
    ScenarioManifest manifest;
};

// Deterministic single-stream generation: years ascending, fields in config
// order, one paper at a time. Paper ids are zero-padded so sequence order and
// lexicographic order coincide. Citation edges always point backward in time.
inline GeneratedScenario generate(const ScenarioConfig& config) {
    validate(config);
    const std::size_t nf = config.fields.size();
    const int ny = config.end_year - config.start_year + 1;
    detail::Rng rng(config.seed);

    ScenarioManifest manifest;
    manifest.config = config;
    manifest.volume.resize(nf);
    manifest.success.resize(nf);
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t g = 0; g < 2; ++g) {
            manifest.volume[i][g].assign(static_cast<std::size_t>(ny), 0);
            manifest.success[i][g].assign(static_cast<std::size_t>(ny),
                                          std::vector<std::uint64_t>(nf, 0));
        }
    if (config.injected) {
        std::size_t i = manifest.field_pos(config.injected->origin);
        std::size_t j = manifest.field_pos(config.injected->dest);
        double requested = config.cite_prob[i][j] + config.injected->delta;
        if (requested < 0.0 || requested > 1.0)
            manifest.clamps.push_back({config.injected->origin, config.injected->dest, requested,
                                       std::min(1.0, std::max(0.0, requested))});
    }

    // mean extra citations per successful field event, calibrated so the
    // expected total references per paper tracks refs_per_paper
    std::vector<double> extra_refs(nf, 0.0);
    for (std::size_t i = 0; i < nf; ++i) {
        double row_sum = 0.0;
        for (double p : config.cite_prob[i]) row_sum += p;
        if (row_sum > 0.0) extra_refs[i] = std::max(0.0, config.refs_per_paper / row_sum - 1.0);
    }

    std::string topic_tag = detail::to_lower(detail::trim(config.topic_keyword));
    std::string control_tag = detail::to_lower(detail::trim(config.control_tag));

    std::vector<PaperRecord> papers;
    std::vector<CitationEdge> edges;
    std::vector<std::uint8_t> codes;          // aligned with generation order
    std::vector<FieldLabel> origin_fields;    // aligned with generation order
    std::vector<std::vector<std::uint32_t>> pool(nf);  // paper seq per field, year-ordered

    auto make_id = [](std::uint32_t seq) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%08u", seq);
        return std::string(buf);
    };

    std::uint32_t seq = 0;
    for (int year = config.start_year; year <= config.end_year; ++year) {
        const std::size_t yi = static_cast<std::size_t>(year - config.start_year);
        // candidates for this year are the papers generated in earlier years
        std::vector<std::size_t> pool_cutoff(nf);
        for (std::size_t j = 0; j < nf; ++j) pool_cutoff[j] = pool[j].size();

        for (std::size_t i = 0; i < nf; ++i) {
            const FieldVolume& fv = config.fields[i];
            long long n = std::llround(fv.base + fv.growth * (year - config.start_year));
            for (long long k = 0; k < n; ++k) {
                const bool treated = rng.bernoulli(config.treatment_share);
                PaperRecord rec;
                rec.paper_id = make_id(seq);
                rec.year = year;
                rec.venue = std::string(to_string(fv.field));
                rec.fos_tags.push_back(treated ? topic_tag : control_tag);
                const std::size_t g = treated ? 0 : 1;
                ++manifest.volume[i][g][yi];

                for (std::size_t j = 0; j < nf; ++j) {
                    double p = config.cite_prob[i][j];
                    if (config.injected && treated && config.fields[i].field == config.injected->origin &&
                        config.fields[j].field == config.injected->dest &&
                        year >= config.injected->from_year)
                        p += config.injected->delta;
                    p = std::min(1.0, std::max(0.0, p));
                    if (!rng.bernoulli(p)) continue;
                    const std::size_t candidates = pool_cutoff[j];
                    if (candidates == 0) continue;
                    std::uint64_t want = 1 + rng.poisson(extra_refs[i]);
                    if (want > candidates) want = candidates;
                    std::set<std::uint64_t> picked;
                    while (picked.size() < want) picked.insert(rng.below(candidates));
                    for (std::uint64_t idx : picked)
                        edges.push_back({rec.paper_id, make_id(pool[j][idx])});
                    ++manifest.success[i][g][yi][j];
                }

                pool[i].push_back(seq);
                papers.push_back(std::move(rec));
                codes.push_back(treated ? CohortAssignment::kTreatment
                                        : CohortAssignment::kControl);
                origin_fields.push_back(fv.field);
                ++seq;
            }
        }
    }

    manifest.total_papers = papers.size();
    manifest.total_edges = edges.size();

    VenueMap vm;
    for (const FieldVolume& fv : config.fields)
        vm.insert(std::string(to_string(fv.field)), fv.field);

    PapersParseResult paper_shard;
    paper_shard.records = std::move(papers);
    CitationsParseResult edge_shard;
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edge_shard.edges = std::move(edges);

    GeneratedScenario out;
    auto built = Corpus::build({std::move(paper_shard)}, {std::move(edge_shard)}, std::move(vm));
    out.corpus = std::move(built.corpus);
    // ids were generated in lexicographic order, so the ground-truth vectors
    // align with the corpus paper order
    out.assignment = CohortAssignment(std::move(codes), std::move(origin_fields));
    out.cohort_spec = CohortSpec::from_keywords({topic_tag}, MatchMode::exact_tag);
    out.manifest = std::move(manifest);
    return out;
}

// --- independent oracle ------------------------------------------------------
// Recomputes the windowed measures and both effect formulas with naive loops
// and plain containers. Shares no computation with the aggregation or DID
// code paths; intended for differential testing on small corpora.

struct BruteForceCell {
    FieldLabel origin;
    std::optional<FieldLabel> dest;
    // c_t1_treat, c_t2_treat, c_t1_ctrl, c_t2_ctrl; NaN when undefined
    std::array<double, 4> c_values{std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN()};
    std::optional<double> ate;
};

inline std::vector<BruteForceCell> brute_force_did(const Corpus& corpus,
                                                   const CohortAssignment& assignment,
                                                   const TimeWindow& t1, const TimeWindow& t2,
                                                   Measure measure, EffectMode mode) {
    struct PaperFacts {
        int year;
        FieldLabel field;
        int group;  // 0 treatment, 1 control, -1 excluded
    };
    std::map<std::string, PaperFacts> facts;
    for (std::uint32_t i = 0; i < corpus.papers().size(); ++i) {
        const PaperRecord& p = corpus.papers()[i];
        PaperFacts f;
        f.year = p.year;
        f.field = corpus.venue_map().lookup(p.venue);
        auto g = assignment.group_of(i);
        f.group = !g.has_value() ? -1 : (*g == GroupLabel::Treatment ? 0 : 1);
        facts.emplace(p.paper_id, f);
    }

    auto count_papers = [&](FieldLabel origin, int group, const TimeWindow& w) {
        std::uint64_t n = 0;
        for (const auto& [id, f] : facts)
            if (f.group == group && f.field == origin && f.year >= w.start_year &&
                f.year <= w.end_year)
                ++n;
        return n;
    };

    auto count_citers = [&](FieldLabel origin, int group, FieldLabel dest, const TimeWindow& w) {
        std::set<std::string> citers;
        for (const CitationEdge& e : corpus.edges()) {
            auto citing = facts.find(e.citing_id);
            if (citing == facts.end()) continue;
            if (citing->second.group != group || citing->second.field != origin) continue;
            if (citing->second.year < w.start_year || citing->second.year > w.end_year) continue;
            auto cited = facts.find(e.cited_id);
            if (cited == facts.end()) continue;
            if (cited->second.field != dest) continue;
            citers.insert(e.citing_id);
        }
        return static_cast<std::uint64_t>(citers.size());
    };

    std::vector<BruteForceCell> cells;
    for (FieldLabel origin : kMappedFields) {
        std::vector<std::optional<FieldLabel>> dests;
        if (measure == Measure::count)
            dests.push_back(std::nullopt);
        else
            for (FieldLabel d : kMappedFields) dests.push_back(d);
        for (const auto& dest : dests) {
            BruteForceCell cell;
            cell.origin = origin;
            cell.dest = dest;
            const TimeWindow* windows[2] = {&t1, &t2};
            for (int g = 0; g < 2; ++g) {
                for (int w = 0; w < 2; ++w) {
                    std::uint64_t denom = count_papers(origin, g, *windows[w]);
                    double value;
                    if (!dest) {
                        value = static_cast<double>(denom);
                    } else if (denom == 0) {
                        continue;  // undefined, stays NaN
                    } else {
                        value = static_cast<double>(count_citers(origin, g, *dest, *windows[w])) /
                                static_cast<double>(denom);
                    }
                    cell.c_values[static_cast<std::size_t>(g * 2 + w)] = value;
                }
            }
            bool defined = true;
            for (double v : cell.c_values) defined = defined && !std::isnan(v);
            if (defined) {
                const double t1t = cell.c_values[0], t2t = cell.c_values[1];
                const double t1c = cell.c_values[2], t2c = cell.c_values[3];
                if (mode == EffectMode::absolute) {
                    cell.ate = (t2t - t1t) - (t2c - t1c);
                } else if (t1t > 0.0 && t2t > 0.0 && t1c > 0.0 && t2c > 0.0) {
                    cell.ate = std::log2(t2t / t1t) - std::log2(t2c / t1c);
                }
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace impactdid
