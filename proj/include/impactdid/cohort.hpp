#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "impactdid/corpus.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

enum class MatchMode { substring, exact_tag };

constexpr std::string_view to_string(MatchMode m) {
    return m == MatchMode::substring ? "substring" : "exact-tag";
}

// The treatment-topic keyword list. Keywords are normalized to lowercase so
// matching against the (already lowercased) fos tags is case-insensitive.
struct CohortSpec {
    std::vector<std::string> keywords;
    MatchMode match_mode = MatchMode::substring;

    static CohortSpec from_keywords(std::vector<std::string> raw,
                                    MatchMode mode = MatchMode::substring) {
        CohortSpec spec;
        spec.match_mode = mode;
        for (auto& k : raw) {
            std::string norm = detail::to_lower(detail::trim(k));
            if (!norm.empty()) spec.keywords.push_back(std::move(norm));
        }
        return spec;
    }
};

// Keyword list file: one keyword per line, '#' comments.
inline CohortSpec load_keywords(std::istream& in, MatchMode mode = MatchMode::substring) {
    std::vector<std::string> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::is_comment_or_blank(line)) continue;
        raw.push_back(line);
    }
    return CohortSpec::from_keywords(std::move(raw), mode);
}

// Treatment/control split over mapped-venue papers, aligned with the corpus
// paper order. Papers at unmapped (Other) venues are out of scope.
class CohortAssignment {
  public:
    CohortAssignment() = default;
    CohortAssignment(std::vector<std::uint8_t> codes, std::vector<FieldLabel> fields)
        : codes_(std::move(codes)), fields_(std::move(fields)) {}

    std::size_t paper_count() const { return codes_.size(); }

    bool in_scope(std::uint32_t paper_index) const { return codes_[paper_index] != kExcluded; }

    std::optional<GroupLabel> group_of(std::uint32_t paper_index) const {
        switch (codes_[paper_index]) {
            case kTreatment: return GroupLabel::Treatment;
            case kControl: return GroupLabel::Control;
            default: return std::nullopt;
        }
    }

    // Origin sub-field; meaningful only for in-scope papers.
    FieldLabel origin_field_of(std::uint32_t paper_index) const { return fields_[paper_index]; }

    std::size_t in_scope_count() const {
        std::size_t n = 0;
        for (auto c : codes_)
            if (c != kExcluded) ++n;
        return n;
    }

    std::size_t group_count(GroupLabel g) const {
        std::uint8_t want = g == GroupLabel::Treatment ? kTreatment : kControl;
        std::size_t n = 0;
        for (auto c : codes_)
            if (c == want) ++n;
        return n;
    }

    friend bool operator==(const CohortAssignment&, const CohortAssignment&) = default;

    static constexpr std::uint8_t kExcluded = 0;
    static constexpr std::uint8_t kTreatment = 1;
    static constexpr std::uint8_t kControl = 2;

  private:
    std::vector<std::uint8_t> codes_;
    std::vector<FieldLabel> fields_;
};

namespace detail {

inline bool tag_matches(std::string_view tag, std::string_view keyword, MatchMode mode) {
    if (mode == MatchMode::exact_tag) return tag == keyword;
    return tag.find(keyword) != std::string_view::npos;
}

}  // namespace detail

// A paper is Treatment iff at least one fos tag matches at least one keyword
// under the requested match mode; every other mapped-venue paper is Control.
inline CohortAssignment assign_groups(const Corpus& corpus, const CohortSpec& spec) {
    if (spec.keywords.empty()) throw std::invalid_argument("assign_groups: empty keyword list");
    for (const auto& k : spec.keywords)
        if (k.empty()) throw std::invalid_argument("assign_groups: empty keyword");

    const auto& papers = corpus.papers();
    std::vector<std::uint8_t> codes(papers.size(), CohortAssignment::kExcluded);
    std::vector<FieldLabel> fields(papers.size(), FieldLabel::Other);
    detail::parallel_chunks(papers.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            FieldLabel field = corpus.field_of(static_cast<std::uint32_t>(i));
            fields[i] = field;
            if (field == FieldLabel::Other) continue;
            bool matched = false;
            for (const std::string& tag : papers[i].fos_tags) {
                for (const std::string& keyword : spec.keywords) {
                    if (detail::tag_matches(tag, keyword, spec.match_mode)) {
                        matched = true;
                        break;
                    }
                }
                if (matched) break;
            }
            codes[i] = matched ? CohortAssignment::kTreatment : CohortAssignment::kControl;
        }
    });
    return CohortAssignment(std::move(codes), std::move(fields));
}

struct CohortSummaryCell {
    FieldLabel field;
    GroupLabel group;
    int year;
    std::uint64_t count;

    friend bool operator==(const CohortSummaryCell&, const CohortSummaryCell&) = default;
};

// Per (field, group, year) paper counts, ordered by (field, group, year).
inline std::vector<CohortSummaryCell> cohort_summary(const Corpus& corpus,
                                                     const CohortAssignment& assignment) {
    std::map<std::tuple<FieldLabel, GroupLabel, int>, std::uint64_t> cells;
    for (std::uint32_t i = 0; i < corpus.papers().size(); ++i) {
        auto group = assignment.group_of(i);
        if (!group) continue;
        auto key = std::make_tuple(assignment.origin_field_of(i), *group, corpus.papers()[i].year);
        ++cells[key];
    }
    std::vector<CohortSummaryCell> out;
    out.reserve(cells.size());
    for (const auto& [key, count] : cells)
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
    return out;
}

// Assignment export: TSV paper_id, group, field.
inline void write_assignment(std::ostream& out, const Corpus& corpus,
                             const CohortAssignment& assignment) {
    for (std::uint32_t i = 0; i < corpus.papers().size(); ++i) {
        auto group = assignment.group_of(i);
        if (!group) continue;
        out << corpus.papers()[i].paper_id << '\t' << to_string(*group) << '\t'
            << to_string(assignment.origin_field_of(i)) << '\n';
    }
}

}  // namespace impactdid
