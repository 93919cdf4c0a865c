#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "impactdid/citenet.hpp"
#include "impactdid/cohort.hpp"
#include "impactdid/corpus.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

enum class Measure { count, ratio };

constexpr std::string_view to_string(Measure m) {
    return m == Measure::count ? "count" : "ratio";
}

// One measured quantity. Without dest the cell is a windowed publication
// count; with dest it is the field-normalized citation ratio, where count
// holds the numerator (distinct origin papers citing >=1 dest paper) and
// origin_count the denominator.
struct AggregateCell {
    TimeWindow window;
    FieldLabel origin;
    GroupLabel group;
    std::optional<FieldLabel> dest;
    std::uint64_t count = 0;
    std::uint64_t origin_count = 0;
    double ratio = std::numeric_limits<double>::quiet_NaN();

    friend bool operator==(const AggregateCell&, const AggregateCell&) = default;
};

struct YearlySeries {
    FieldLabel origin;
    GroupLabel group;
    std::optional<FieldLabel> dest;
    std::map<int, double> points;  // keys strictly increasing by construction
};

namespace detail {

inline void check_origin(FieldLabel origin) {
    if (origin == FieldLabel::Other)
        throw std::invalid_argument("origin field must not be Other");
}

inline void check_window(const TimeWindow& w) {
    if (!w.valid()) throw std::invalid_argument("time window start_year > end_year");
}

}  // namespace detail

// Number of group papers with the given origin field published inside the
// window.
inline AggregateCell citation_count(const CohortAssignment& assignment, const Corpus& corpus,
                                    const TimeWindow& window, FieldLabel origin,
                                    GroupLabel group) {
    detail::check_origin(origin);
    detail::check_window(window);
    AggregateCell cell;
    cell.window = window;
    cell.origin = origin;
    cell.group = group;
    for (std::uint32_t i = 0; i < corpus.papers().size(); ++i) {
        if (assignment.group_of(i) != group) continue;
        if (assignment.origin_field_of(i) != origin) continue;
        if (!window.contains(corpus.papers()[i].year)) continue;
        ++cell.count;
    }
    cell.origin_count = cell.count;
    return cell;
}

// Fraction of origin-group papers in the window that cite at least one paper
// of the destination field. Undefined (nullopt) when the window holds no
// origin papers; the caller decides the fallback.
inline std::optional<AggregateCell> citation_ratio(const std::vector<LabeledEdge>& edges,
                                                   const CohortAssignment& assignment,
                                                   const Corpus& corpus, const TimeWindow& window,
                                                   FieldLabel origin, GroupLabel group,
                                                   FieldLabel dest) {
    detail::check_origin(origin);
    detail::check_window(window);
    AggregateCell denom = citation_count(assignment, corpus, window, origin, group);
    if (denom.count == 0) return std::nullopt;

    std::vector<std::uint8_t> seen(corpus.papers().size(), 0);
    std::uint64_t numerator = 0;
    for (const LabeledEdge& e : edges) {
        if (e.group != group || e.origin_field != origin || e.dest_field != dest) continue;
        if (!window.contains(e.citing_year)) continue;
        if (seen[e.citing_index]) continue;
        seen[e.citing_index] = 1;
        ++numerator;
    }

    AggregateCell cell;
    cell.window = window;
    cell.origin = origin;
    cell.group = group;
    cell.dest = dest;
    cell.count = numerator;
    cell.origin_count = denom.count;
    cell.ratio = static_cast<double>(numerator) / static_cast<double>(denom.count);
    return cell;
}

// One point per year, each computed with a one-year window. Count series keep
// zero years; ratio years with no origin papers are missing, not zero.
inline YearlySeries yearly_series(const std::vector<LabeledEdge>& edges,
                                  const CohortAssignment& assignment, const Corpus& corpus,
                                  const TimeWindow& years, FieldLabel origin, GroupLabel group,
                                  std::optional<FieldLabel> dest, Measure measure) {
    detail::check_origin(origin);
    detail::check_window(years);
    if (measure == Measure::ratio && !dest)
        throw std::invalid_argument("ratio series requires a destination field");
    YearlySeries series;
    series.origin = origin;
    series.group = group;
    series.dest = measure == Measure::ratio ? dest : std::nullopt;
    for (int y = years.start_year; y <= years.end_year; ++y) {
        TimeWindow w{y, y};
        if (measure == Measure::count) {
            series.points[y] =
                static_cast<double>(citation_count(assignment, corpus, w, origin, group).count);
        } else {
            auto cell = citation_ratio(edges, assignment, corpus, w, origin, group, *dest);
            if (cell) series.points[y] = cell->ratio;
        }
    }
    if (series.points.empty()) throw DataError("yearly_series: all years missing");
    return series;
}

// Precomputed per (origin, group, year) paper counts and per
// (origin, group, dest, year) distinct-citing counts. One pass over papers
// plus one pass over edges; every windowed quantity is then a range sum.
// Kept consistent with citation_count/citation_ratio by construction and by
// differential tests.
class CitationTallies {
  public:
    CitationTallies(const Corpus& corpus, const CohortAssignment& assignment,
                    std::span<const LabeledEdge> edges) {
        min_year_ = std::numeric_limits<int>::max();
        int max_year = std::numeric_limits<int>::min();
        for (const PaperRecord& p : corpus.papers()) {
            min_year_ = std::min(min_year_, p.year);
            max_year = std::max(max_year, p.year);
        }
        if (corpus.papers().empty()) {
            min_year_ = 0;
            max_year = -1;
        }
        year_span_ = static_cast<std::size_t>(std::max(0, max_year - min_year_ + 1));
        den_.assign(6 * 2 * year_span_, 0);
        num_.assign(6 * 2 * 7 * year_span_, 0);

        // dest bitmask per citing paper; 7 destination labels fit in a byte
        std::vector<std::uint8_t> flags(corpus.papers().size(), 0);
        for (const LabeledEdge& e : edges)
            flags[e.citing_index] |= static_cast<std::uint8_t>(1u << static_cast<int>(e.dest_field));

        for (std::uint32_t i = 0; i < corpus.papers().size(); ++i) {
            auto group = assignment.group_of(i);
            if (!group) continue;
            FieldLabel origin = assignment.origin_field_of(i);
            std::size_t y = static_cast<std::size_t>(corpus.papers()[i].year - min_year_);
            ++den_[den_index(origin, *group, y)];
            std::uint8_t f = flags[i];
            while (f) {
                int d = std::countr_zero(static_cast<unsigned>(f));
                f = static_cast<std::uint8_t>(f & (f - 1));
                ++num_[num_index(origin, *group, static_cast<FieldLabel>(d), y)];
            }
        }
    }

    std::uint64_t origin_count(FieldLabel origin, GroupLabel group, const TimeWindow& w) const {
        std::uint64_t total = 0;
        for_yearly(w, [&](std::size_t y) { total += den_[den_index(origin, group, y)]; });
        return total;
    }

    std::uint64_t dest_citing_count(FieldLabel origin, GroupLabel group, FieldLabel dest,
                                    const TimeWindow& w) const {
        std::uint64_t total = 0;
        for_yearly(w, [&](std::size_t y) { total += num_[num_index(origin, group, dest, y)]; });
        return total;
    }

    AggregateCell count_cell(FieldLabel origin, GroupLabel group, const TimeWindow& w) const {
        AggregateCell cell;
        cell.window = w;
        cell.origin = origin;
        cell.group = group;
        cell.count = origin_count(origin, group, w);
        cell.origin_count = cell.count;
        return cell;
    }

    std::optional<AggregateCell> ratio_cell(FieldLabel origin, GroupLabel group, FieldLabel dest,
                                            const TimeWindow& w) const {
        std::uint64_t denom = origin_count(origin, group, w);
        if (denom == 0) return std::nullopt;
        AggregateCell cell;
        cell.window = w;
        cell.origin = origin;
        cell.group = group;
        cell.dest = dest;
        cell.count = dest_citing_count(origin, group, dest, w);
        cell.origin_count = denom;
        cell.ratio = static_cast<double>(cell.count) / static_cast<double>(denom);
        return cell;
    }

    YearlySeries series(FieldLabel origin, GroupLabel group, std::optional<FieldLabel> dest,
                        const TimeWindow& years, Measure measure) const {
        YearlySeries s;
        s.origin = origin;
        s.group = group;
        s.dest = measure == Measure::ratio ? dest : std::nullopt;
        for (int y = years.start_year; y <= years.end_year; ++y) {
            TimeWindow w{y, y};
            if (measure == Measure::count) {
                s.points[y] = static_cast<double>(origin_count(origin, group, w));
            } else {
                auto cell = ratio_cell(origin, group, *dest, w);
                if (cell) s.points[y] = cell->ratio;
            }
        }
        return s;
    }

  private:
    template <typename Fn>
    void for_yearly(const TimeWindow& w, Fn&& fn) const {
        if (year_span_ == 0) return;
        int lo = std::max(w.start_year, min_year_);
        int hi = std::min(w.end_year, min_year_ + static_cast<int>(year_span_) - 1);
        for (int y = lo; y <= hi; ++y) fn(static_cast<std::size_t>(y - min_year_));
    }

    std::size_t den_index(FieldLabel origin, GroupLabel group, std::size_t y) const {
        return (static_cast<std::size_t>(origin) * 2 + static_cast<std::size_t>(group)) *
                   year_span_ +
               y;
    }

    std::size_t num_index(FieldLabel origin, GroupLabel group, FieldLabel dest,
                          std::size_t y) const {
        return ((static_cast<std::size_t>(origin) * 2 + static_cast<std::size_t>(group)) * 7 +
                static_cast<std::size_t>(dest)) *
                   year_span_ +
               y;
    }

    int min_year_ = 0;
    std::size_t year_span_ = 0;
    std::vector<std::uint64_t> den_;
    std::vector<std::uint64_t> num_;
};

// Merges two cells measuring the same quantity over disjoint paper shards.
inline AggregateCell merge_cells(const AggregateCell& a, const AggregateCell& b) {
    if (a.window != b.window || a.origin != b.origin || a.group != b.group || a.dest != b.dest)
        throw std::invalid_argument("merge_cells: mismatched cell keys");
    AggregateCell out = a;
    out.count += b.count;
    out.origin_count += b.origin_count;
    if (out.dest)
        out.ratio = out.origin_count == 0
                        ? std::numeric_limits<double>::quiet_NaN()
                        : static_cast<double>(out.count) / static_cast<double>(out.origin_count);
    return out;
}

// Aggregate export: CSV window_start, window_end, origin, group, dest, count, ratio.
inline void write_aggregate_csv(std::ostream& out, std::span<const AggregateCell> cells) {
    out << "window_start,window_end,origin,group,dest,count,ratio\n";
    for (const AggregateCell& c : cells) {
        out << c.window.start_year << ',' << c.window.end_year << ',' << to_string(c.origin) << ','
            << to_string(c.group) << ',' << (c.dest ? to_string(*c.dest) : std::string_view{})
            << ',' << c.count << ',';
        if (c.dest && !std::isnan(c.ratio))
            out << detail::format_double(c.ratio);
        else
            out << "NA";
        out << '\n';
    }
}

}  // namespace impactdid
