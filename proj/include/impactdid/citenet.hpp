#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <tuple>
#include <vector>

#include "impactdid/cohort.hpp"
#include "impactdid/corpus.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

// One resolved citation from a group paper, with both endpoints labeled.
// Endpoints are stored as indices into the corpus paper vector; since papers
// are sorted by paper_id, index order and id order coincide.
struct LabeledEdge {
    std::uint32_t citing_index;
    std::uint32_t cited_index;
    FieldLabel origin_field;  // never Other
    FieldLabel dest_field;    // may be Other
    std::int16_t citing_year;
    GroupLabel group;

    friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
};

struct NetworkResult {
    std::vector<LabeledEdge> edges;  // sorted by (citing_index, cited_index)
    std::uint64_t dangling_count = 0;
};

// Labels every deduplicated corpus edge whose citing paper belongs to the
// requested group. Cited papers absent from the corpus increment the dangling
// count; cited papers at unmapped venues get dest_field Other.
inline NetworkResult build_network(const Corpus& corpus, const CohortAssignment& assignment,
                                   GroupLabel group) {
    NetworkResult result;
    const std::size_t n = corpus.edges().size();
    std::vector<std::uint8_t> keep(n, 0);  // 1 = labeled edge, 2 = dangling
    detail::parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            std::uint32_t citing = corpus.citing_index(e);
            if (citing == Corpus::npos) continue;
            if (assignment.group_of(citing) != group) continue;
            keep[e] = corpus.cited_index(e) == Corpus::npos ? 2 : 1;
        }
    });
    std::size_t labeled = 0;
    for (std::size_t e = 0; e < n; ++e) {
        if (keep[e] == 1)
            ++labeled;
        else if (keep[e] == 2)
            ++result.dangling_count;
    }
    result.edges.reserve(labeled);
    // corpus edges are already sorted by (citing_id, cited_id)
    for (std::size_t e = 0; e < n; ++e) {
        if (keep[e] != 1) continue;
        std::uint32_t citing = corpus.citing_index(e);
        std::uint32_t cited = corpus.cited_index(e);
        result.edges.push_back({citing, cited, assignment.origin_field_of(citing),
                                corpus.field_of(cited),
                                static_cast<std::int16_t>(corpus.papers()[citing].year), group});
    }
    return result;
}

struct NetworkStatsCell {
    FieldLabel origin;
    FieldLabel dest;
    GroupLabel group;
    std::uint64_t count;

    friend bool operator==(const NetworkStatsCell&, const NetworkStatsCell&) = default;
};

// Edge counts per (origin, dest, group), ordered by (origin, dest, group).
inline std::vector<NetworkStatsCell> network_stats(const std::vector<LabeledEdge>& edges) {
    std::map<std::tuple<FieldLabel, FieldLabel, GroupLabel>, std::uint64_t> cells;
    for (const LabeledEdge& e : edges) ++cells[{e.origin_field, e.dest_field, e.group}];
    std::vector<NetworkStatsCell> out;
    out.reserve(cells.size());
    for (const auto& [key, count] : cells)
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
    return out;
}

// Edge export: TSV citing_id, cited_id, origin, dest, year, group.
inline void write_edges(std::ostream& out, const Corpus& corpus,
                        const std::vector<LabeledEdge>& edges) {
    for (const LabeledEdge& e : edges) {
        out << corpus.papers()[e.citing_index].paper_id << '\t'
            << corpus.papers()[e.cited_index].paper_id << '\t' << to_string(e.origin_field) << '\t'
            << to_string(e.dest_field) << '\t' << e.citing_year << '\t' << to_string(e.group)
            << '\n';
    }
}

}  // namespace impactdid
