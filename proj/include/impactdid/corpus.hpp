#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "impactdid/types.hpp"

namespace impactdid {

// One publication. Tags are lowercased, trimmed, deduplicated and sorted at
// parse time so keyword matching is case-insensitive by construction.
struct PaperRecord {
    std::string paper_id;
    int year = 0;
    std::string venue;
    std::vector<std::string> fos_tags;

    friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

struct CitationEdge {
    std::string citing_id;
    std::string cited_id;

    friend bool operator==(const CitationEdge&, const CitationEdge&) = default;
    friend bool operator<(const CitationEdge& a, const CitationEdge& b) {
        if (a.citing_id != b.citing_id) return a.citing_id < b.citing_id;
        return a.cited_id < b.cited_id;
    }
};

// Venue acronym -> sub-field. Acronyms not present resolve to Other.
class VenueMap {
  public:
    void insert(std::string acronym, FieldLabel field) {
        entries_.emplace(std::move(acronym), field);
    }

    FieldLabel lookup(std::string_view acronym) const {
        auto it = entries_.find(std::string(acronym));
        return it == entries_.end() ? FieldLabel::Other : it->second;
    }

    bool contains(std::string_view acronym) const {
        return entries_.find(std::string(acronym)) != entries_.end();
    }

    std::size_t size() const { return entries_.size(); }

    // Sorted view for serialization and equality.
    std::vector<std::pair<std::string, FieldLabel>> sorted_entries() const {
        std::vector<std::pair<std::string, FieldLabel>> out(entries_.begin(), entries_.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const VenueMap& a, const VenueMap& b) {
        return a.sorted_entries() == b.sorted_entries();
    }

  private:
    std::unordered_map<std::string, FieldLabel> entries_;
};

// The 22 acronym -> sub-field rows shipped as the default AI venue map.
inline VenueMap default_venue_map() {
    VenueMap vm;
    for (const char* v : {"AAAI", "AISTATS", "COLT", "ECAI", "IJCAI", "UAI"})
        vm.insert(v, FieldLabel::ClassicalAI);
    for (const char* v : {"ICLR", "ICML", "NeurIPS"}) vm.insert(v, FieldLabel::ML);
    for (const char* v : {"ICDM", "KDD", "SDM", "WSDM"}) vm.insert(v, FieldLabel::DM);
    for (const char* v : {"CVPR", "ECCV", "ICCV"}) vm.insert(v, FieldLabel::CV);
    for (const char* v : {"ACL", "COLING", "EMNLP", "NAACL"}) vm.insert(v, FieldLabel::NLP);
    for (const char* v : {"ICASSP", "INTERSPEECH"}) vm.insert(v, FieldLabel::SR);
    return vm;
}

enum class PapersFormat { mag_tsv };

// Parse output for one shard. Records keep stream order; record_lines holds
// the 1-based source line of each record so the corpus builder can resolve
// duplicate ids deterministically across shards.
struct PapersParseResult {
    std::string file;
    std::vector<PaperRecord> records;
    std::vector<std::uint32_t> record_lines;
    std::vector<ParseError> errors;
};

struct CitationsParseResult {
    std::string file;
    std::vector<CitationEdge> edges;  // deduplicated within the shard
    std::vector<ParseError> errors;
};

struct VenueMapParseResult {
    std::string file;
    VenueMap map;
    std::vector<ParseError> errors;
};

namespace detail {

inline bool is_comment_or_blank(std::string_view line) {
    std::string_view t = trim(line);
    return t.empty() || t.front() == '#';
}

}  // namespace detail

// Tab-separated lines: paper_id, year, venue, semicolon-separated fos tags.
// The tags field may be empty or missing. Malformed lines yield one error
// each and are skipped; parsing is single-pass.
inline PapersParseResult parse_papers(std::istream& in, std::string file = "",
                                      PapersFormat format = PapersFormat::mag_tsv) {
    (void)format;  // mag_tsv is the only exchange format
    PapersParseResult result;
    result.file = std::move(file);
    std::string line;
    std::vector<std::string_view> fields;
    std::vector<std::string_view> raw_tags;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_comment_or_blank(line)) continue;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        detail::split_into(view, '\t', fields);
        if (fields.size() < 3) {
            result.errors.push_back({result.file, line_no, "fewer than 3 tab-separated fields"});
            continue;
        }
        if (fields.size() > 4) {
            result.errors.push_back({result.file, line_no, "more than 4 tab-separated fields"});
            continue;
        }
        std::string_view id = detail::trim(fields[0]);
        if (id.empty()) {
            result.errors.push_back({result.file, line_no, "empty paper_id"});
            continue;
        }
        auto year = detail::parse_int(fields[1]);
        if (!year) {
            result.errors.push_back({result.file, line_no, "non-integer year"});
            continue;
        }
        if (*year < 1900 || *year > 2100) {
            result.errors.push_back({result.file, line_no, "year outside [1900, 2100]"});
            continue;
        }
        PaperRecord rec;
        rec.paper_id = std::string(id);
        rec.year = *year;
        rec.venue = std::string(detail::trim(fields[2]));
        if (fields.size() == 4 && !detail::trim(fields[3]).empty()) {
            detail::split_into(fields[3], ';', raw_tags);
            for (std::string_view tag : raw_tags) {
                std::string_view t = detail::trim(tag);
                if (t.empty()) continue;
                rec.fos_tags.push_back(detail::to_lower(t));
            }
            std::sort(rec.fos_tags.begin(), rec.fos_tags.end());
            rec.fos_tags.erase(std::unique(rec.fos_tags.begin(), rec.fos_tags.end()),
                               rec.fos_tags.end());
        }
        result.records.push_back(std::move(rec));
        result.record_lines.push_back(static_cast<std::uint32_t>(line_no));
    }
    sort_errors(result.errors);
    return result;
}

// Two-column TSV: citing_id, cited_id. Self-loops are rejected with an error
// entry; duplicate pairs collapse to one edge.
inline CitationsParseResult parse_citations(std::istream& in, std::string file = "") {
    CitationsParseResult result;
    result.file = std::move(file);
    std::string line;
    std::vector<std::string_view> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_comment_or_blank(line)) continue;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        detail::split_into(view, '\t', fields);
        if (fields.size() != 2) {
            result.errors.push_back({result.file, line_no, "expected 2 tab-separated fields"});
            continue;
        }
        std::string_view citing = detail::trim(fields[0]);
        std::string_view cited = detail::trim(fields[1]);
        if (citing.empty() || cited.empty()) {
            result.errors.push_back({result.file, line_no, "missing field"});
            continue;
        }
        if (citing == cited) {
            result.errors.push_back(
                {result.file, line_no, "self-citation rejected: " + std::string(citing)});
            continue;
        }
        result.edges.push_back({std::string(citing), std::string(cited)});
    }
    std::sort(result.edges.begin(), result.edges.end());
    result.edges.erase(std::unique(result.edges.begin(), result.edges.end()), result.edges.end());
    sort_errors(result.errors);
    return result;
}

// Comma-separated lines: acronym, sub-field label. A duplicate acronym with a
// conflicting sub-field is an error; a consistent duplicate is ignored.
inline VenueMapParseResult load_venue_map(std::istream& in, std::string file = "") {
    VenueMapParseResult result;
    result.file = std::move(file);
    std::string line;
    std::vector<std::string_view> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_comment_or_blank(line)) continue;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        detail::split_into(view, ',', fields);
        if (fields.size() != 2) {
            result.errors.push_back({result.file, line_no, "expected 2 comma-separated fields"});
            continue;
        }
        std::string acronym(detail::trim(fields[0]));
        std::string_view label = detail::trim(fields[1]);
        if (acronym.empty()) {
            result.errors.push_back({result.file, line_no, "empty venue acronym"});
            continue;
        }
        auto field = field_from_string(label);
        if (!field || *field == FieldLabel::Other) {
            result.errors.push_back(
                {result.file, line_no, "unknown sub-field label: " + std::string(label)});
            continue;
        }
        if (result.map.contains(acronym)) {
            if (result.map.lookup(acronym) != *field)
                result.errors.push_back({result.file, line_no,
                                         "conflicting duplicate for venue " + acronym});
            continue;
        }
        result.map.insert(std::move(acronym), *field);
    }
    sort_errors(result.errors);
    return result;
}

// Validated corpus: papers sorted by paper_id (ids unique), edges sorted and
// deduplicated, plus the venue map and the dangling-edge account.
class Corpus {
  public:
    Corpus() = default;

    const std::vector<PaperRecord>& papers() const { return papers_; }
    const std::vector<CitationEdge>& edges() const { return edges_; }
    const VenueMap& venue_map() const { return venue_map_; }

    // Index of a paper id, or npos when absent.
    static constexpr std::uint32_t npos = UINT32_MAX;
    std::uint32_t index_of(std::string_view paper_id) const {
        auto it = index_.find(std::string(paper_id));
        return it == index_.end() ? npos : it->second;
    }

    FieldLabel field_of(const PaperRecord& rec) const { return venue_map_.lookup(rec.venue); }
    FieldLabel field_of(std::uint32_t index) const { return paper_fields_[index]; }

    // Edge endpoints resolved to paper indices; npos marks absent papers.
    std::uint32_t citing_index(std::size_t edge) const { return edge_indices_[edge].first; }
    std::uint32_t cited_index(std::size_t edge) const { return edge_indices_[edge].second; }

    std::uint64_t resolved_edge_count() const { return resolved_edges_; }
    std::uint64_t dangling_edge_count() const { return dangling_edges_; }

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.papers_ == b.papers_ && a.edges_ == b.edges_ && a.venue_map_ == b.venue_map_;
    }

    struct BuildResult;

    static BuildResult build(std::vector<PapersParseResult> paper_shards,
                             std::vector<CitationsParseResult> edge_shards, VenueMap venue_map);

  private:
    std::vector<PaperRecord> papers_;
    std::vector<CitationEdge> edges_;
    VenueMap venue_map_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<FieldLabel> paper_fields_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_indices_;
    std::uint64_t resolved_edges_ = 0;
    std::uint64_t dangling_edges_ = 0;
};

struct Corpus::BuildResult {
    Corpus corpus;
    std::vector<ParseError> errors;  // shard errors plus duplicate-id reports
};

// Merges parsed shards into one corpus. The merge is order-independent:
// shards are canonicalized by file name, duplicate paper ids resolve to the
// occurrence with the smallest (file, line), and the final collections are
// sorted. Later duplicates are reported as errors, not silently dropped.
inline Corpus::BuildResult Corpus::build(std::vector<PapersParseResult> paper_shards,
                                         std::vector<CitationsParseResult> edge_shards,
                                         VenueMap venue_map) {
    BuildResult out;
    out.corpus.venue_map_ = std::move(venue_map);

    std::stable_sort(paper_shards.begin(), paper_shards.end(),
                     [](const auto& a, const auto& b) { return a.file < b.file; });
    std::stable_sort(edge_shards.begin(), edge_shards.end(),
                     [](const auto& a, const auto& b) { return a.file < b.file; });

    std::size_t total_records = 0;
    for (const auto& shard : paper_shards) {
        total_records += shard.records.size();
        out.errors.insert(out.errors.end(), shard.errors.begin(), shard.errors.end());
    }

    auto& papers = out.corpus.papers_;
    papers.reserve(total_records);
    auto& index = out.corpus.index_;
    index.reserve(total_records);
    for (auto& shard : paper_shards) {
        for (std::size_t i = 0; i < shard.records.size(); ++i) {
            PaperRecord& rec = shard.records[i];
            auto [it, inserted] = index.emplace(rec.paper_id, 0u);
            if (!inserted) {
                std::size_t line = i < shard.record_lines.size() ? shard.record_lines[i] : 0;
                out.errors.push_back({shard.file, line,
                                      "duplicate paper_id " + rec.paper_id +
                                          " (first occurrence wins)"});
                continue;
            }
            papers.push_back(std::move(rec));
        }
    }
    std::sort(papers.begin(), papers.end(),
              [](const PaperRecord& a, const PaperRecord& b) { return a.paper_id < b.paper_id; });
    index.clear();
    out.corpus.paper_fields_.resize(papers.size());
    for (std::uint32_t i = 0; i < papers.size(); ++i) {
        index[papers[i].paper_id] = i;
        out.corpus.paper_fields_[i] = out.corpus.venue_map_.lookup(papers[i].venue);
    }

    std::size_t total_edges = 0;
    for (const auto& shard : edge_shards) {
        total_edges += shard.edges.size();
        out.errors.insert(out.errors.end(), shard.errors.begin(), shard.errors.end());
    }
    auto& edges = out.corpus.edges_;
    edges.reserve(total_edges);
    for (auto& shard : edge_shards)
        edges.insert(edges.end(), std::make_move_iterator(shard.edges.begin()),
                     std::make_move_iterator(shard.edges.end()));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    out.corpus.edge_indices_.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        std::uint32_t citing = out.corpus.index_of(edges[e].citing_id);
        std::uint32_t cited = out.corpus.index_of(edges[e].cited_id);
        out.corpus.edge_indices_[e] = {citing, cited};
        if (citing == npos || cited == npos)
            ++out.corpus.dangling_edges_;
        else
            ++out.corpus.resolved_edges_;
    }

    sort_errors(out.errors);
    return out;
}

// --- exchange-format serializers (inverse of the parsers) -------------------

inline void write_papers(std::ostream& out, const Corpus& corpus) {
    for (const PaperRecord& rec : corpus.papers()) {
        out << rec.paper_id << '\t' << rec.year << '\t' << rec.venue << '\t';
        for (std::size_t i = 0; i < rec.fos_tags.size(); ++i) {
            if (i) out << ';';
            out << rec.fos_tags[i];
        }
        out << '\n';
    }
}

inline void write_citations(std::ostream& out, const Corpus& corpus) {
    for (const CitationEdge& e : corpus.edges()) out << e.citing_id << '\t' << e.cited_id << '\n';
}

inline void write_venue_map(std::ostream& out, const VenueMap& vm) {
    for (const auto& [acronym, field] : vm.sorted_entries())
        out << acronym << ',' << to_string(field) << '\n';
}

}  // namespace impactdid
