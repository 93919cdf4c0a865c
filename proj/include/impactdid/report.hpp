#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "impactdid/did.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

namespace detail {

inline std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

inline std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

inline std::string trend_note(const DidCell& cell) {
    if (!cell.trend) return "na";
    return cell.trend->parallel ? "parallel" : "not-parallel";
}

}  // namespace detail

// Field-level table: one row per origin field. For relative mode both the raw
// log2 effect and its percent transform (2^ate - 1) * 100 are shown; relative
// changes round to 2 decimals. A trailing '*' marks cells where the parallel
// trend was not met.
inline std::string render_field_table(const DidReport& report) {
    std::ostringstream out;
    const AnalysisSettings& s = report.settings;
    out << "# publication-volume effect by research field\n";
    out << "# T1 = " << s.t1.start_year << ".." << s.t1.end_year << "  T2 = " << s.t2.start_year
        << ".." << s.t2.end_year << "  measure = " << to_string(s.measure)
        << "  mode = " << to_string(s.mode) << "  alpha = " << detail::format_double(s.alpha)
        << '\n';
    out << "# '*' marks cells where the parallel trend was not met (pre-trend "
        << s.pre_trend_years.start_year << ".." << s.pre_trend_years.end_year << ")\n";
    const bool relative = s.mode == EffectMode::relative;
    if (relative)
        out << "# relative_change_pct = (2^ate_log2 - 1) * 100; the estimator works in log2\n"
               "# units, the percent transform is shown alongside\n";
    out << detail::pad_right("field", 13);
    if (relative)
        out << detail::pad_left("ate_log2", 12) << detail::pad_left("relative_change_pct", 21);
    else
        out << detail::pad_left("ate", 12);
    out << detail::pad_left("trend", 14) << '\n';
    for (const DidCell& cell : report.cells) {
        if (cell.dest) continue;
        out << detail::pad_right(std::string(to_string(cell.origin)), 13);
        if (!cell.ate) {
            out << detail::pad_left("NA", 12);
            if (relative) out << detail::pad_left("NA", 21);
        } else if (relative) {
            out << detail::pad_left(detail::format_fixed(*cell.ate, 4), 12)
                << detail::pad_left(detail::format_fixed(relative_percent(*cell.ate), 2) +
                                        (cell.starred ? "*" : ""),
                                    21);
        } else {
            out << detail::pad_left(detail::format_fixed(*cell.ate, 4) + (cell.starred ? "*" : ""),
                                    12);
        }
        out << detail::pad_left(detail::trend_note(cell), 14) << '\n';
    }
    return out.str();
}

// Inter-field table: the full origin x dest grid. Absolute effects on ratios
// are shown as percentage-point changes with 1 decimal; '*' marks cells where
// the parallel trend was not met.
inline std::string render_interfield_table(const DidReport& report) {
    std::ostringstream out;
    const AnalysisSettings& s = report.settings;
    out << "# inter-field citation effect (origin cites dest)\n";
    out << "# T1 = " << s.t1.start_year << ".." << s.t1.end_year << "  T2 = " << s.t2.start_year
        << ".." << s.t2.end_year << "  measure = " << to_string(s.measure)
        << "  mode = " << to_string(s.mode) << "  alpha = " << detail::format_double(s.alpha)
        << '\n';
    out << "# '*' marks cells where the parallel trend was not met (pre-trend "
        << s.pre_trend_years.start_year << ".." << s.pre_trend_years.end_year << ")\n";
    const bool absolute = s.mode == EffectMode::absolute;
    out << detail::pad_right("origin", 13) << detail::pad_right("dest", 13)
        << detail::pad_left(absolute ? "change_pp" : "ate_log2", 12) << '\n';
    for (const DidCell& cell : report.cells) {
        if (!cell.dest) continue;
        out << detail::pad_right(std::string(to_string(cell.origin)), 13)
            << detail::pad_right(std::string(to_string(*cell.dest)), 13);
        if (!cell.ate) {
            out << detail::pad_left("NA", 12);
        } else {
            double shown = absolute ? *cell.ate * 100.0 : *cell.ate;
            out << detail::pad_left(detail::format_fixed(shown, absolute ? 1 : 4) +
                                        (cell.starred ? "*" : ""),
                                    12);
        }
        out << '\n';
    }
    return out.str();
}

// --- cross-topic comparison --------------------------------------------------

struct TopicReport {
    std::string name;
    std::map<FieldLabel, double> per_field_pct;  // relative change, percent
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string_view> views;
    split_into(line, ',', views);
    std::vector<std::string> out;
    out.reserve(views.size());
    for (auto v : views) out.emplace_back(trim(v));
    return out;
}

}  // namespace detail

// Reads the per-field relative changes out of a did-report CSV: rows with an
// empty dest and relative mode carry the field-level log2 effect, exposed
// here through the percent transform.
inline TopicReport read_topic_report(std::istream& in, std::string name) {
    TopicReport topic;
    topic.name = std::move(name);
    std::string line;
    if (!std::getline(in, line)) throw DataError("topic report '" + topic.name + "': empty file");
    std::vector<std::string> header = detail::split_csv_line(line);
    std::size_t col_origin = header.size(), col_dest = header.size(), col_mode = header.size(),
                col_ate = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "origin") col_origin = i;
        else if (header[i] == "dest") col_dest = i;
        else if (header[i] == "mode") col_mode = i;
        else if (header[i] == "ate") col_ate = i;
    }
    if (col_origin == header.size() || col_dest == header.size() || col_mode == header.size() ||
        col_ate == header.size())
        throw DataError("topic report '" + topic.name +
                        "': missing origin/dest/mode/ate columns");
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> row = detail::split_csv_line(line);
        if (row.size() < header.size())
            throw DataError("topic report '" + topic.name + "': short row");
        if (!row[col_dest].empty() || row[col_mode] != "relative" || row[col_ate] == "NA")
            continue;
        auto field = field_from_string(row[col_origin]);
        if (!field || *field == FieldLabel::Other)
            throw DataError("topic report '" + topic.name + "': bad origin field '" +
                            row[col_origin] + "'");
        topic.per_field_pct[*field] =
            relative_percent(detail::parse_double_or_throw(row[col_ate], "ate"));
    }
    if (topic.per_field_pct.empty())
        throw DataError("topic report '" + topic.name + "': no field-level relative rows");
    return topic;
}

struct ComparisonReport {
    std::vector<TopicReport> topics;
    std::vector<double> averages;  // aligned with topics
    struct RatioRow {
        std::string numerator;
        std::string denominator;
        double ratio;
    };
    std::vector<RatioRow> ratios;  // all ordered pairs, largest ratio first
};

// Per-topic averages over the per-field relative changes plus all pairwise
// average ratios. Topics must cover identical field sets.
inline ComparisonReport compare_topics(std::vector<TopicReport> topics) {
    if (topics.size() < 2)
        throw std::invalid_argument("compare_topics: need at least 2 topic reports");
    for (std::size_t i = 1; i < topics.size(); ++i) {
        auto fields_of = [](const TopicReport& t) {
            std::vector<FieldLabel> f;
            for (const auto& [field, value] : t.per_field_pct) f.push_back(field);
            return f;
        };
        if (fields_of(topics[i]) != fields_of(topics[0]))
            throw DataError("compare_topics: mismatched field sets between '" + topics[0].name +
                            "' and '" + topics[i].name + "'");
    }
    ComparisonReport report;
    report.topics = std::move(topics);
    for (const TopicReport& t : report.topics) {
        double sum = 0.0;
        for (const auto& [field, value] : t.per_field_pct) sum += value;
        report.averages.push_back(sum / static_cast<double>(t.per_field_pct.size()));
    }
    for (std::size_t a = 0; a < report.topics.size(); ++a)
        for (std::size_t b = 0; b < report.topics.size(); ++b) {
            if (a == b) continue;
            report.ratios.push_back({report.topics[a].name, report.topics[b].name,
                                     report.averages[a] / report.averages[b]});
        }
    std::stable_sort(report.ratios.begin(), report.ratios.end(),
                     [](const auto& x, const auto& y) { return x.ratio > y.ratio; });
    return report;
}

// Comparison table: per-field relative changes by topic, the per-topic
// average row, and the pairwise impact ratios.
inline std::string render_comparison(const ComparisonReport& report) {
    std::ostringstream out;
    out << "# relative change (%) of publication volume by research field and topic\n";
    out << detail::pad_right("field", 13);
    for (const TopicReport& t : report.topics) out << detail::pad_left(t.name, 12);
    out << '\n';
    for (const auto& [field, first_value] : report.topics.front().per_field_pct) {
        out << detail::pad_right(std::string(to_string(field)), 13);
        for (const TopicReport& t : report.topics)
            out << detail::pad_left(detail::format_fixed(t.per_field_pct.at(field), 2), 12);
        out << '\n';
    }
    out << detail::pad_right("average", 13);
    for (double avg : report.averages) out << detail::pad_left(detail::format_fixed(avg, 2), 12);
    out << '\n';
    out << "\n# pairwise impact ratios (average / average), largest first\n";
    for (const auto& row : report.ratios)
        out << detail::pad_right(row.numerator + " / " + row.denominator, 26)
            << detail::pad_left(detail::format_fixed(row.ratio, 2), 10) << '\n';
    return out.str();
}

inline void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
    out << "topic,field,relative_change_pct\n";
    for (std::size_t i = 0; i < report.topics.size(); ++i) {
        for (const auto& [field, value] : report.topics[i].per_field_pct)
            out << report.topics[i].name << ',' << to_string(field) << ','
                << detail::format_double(value) << '\n';
        out << report.topics[i].name << ",average," << detail::format_double(report.averages[i])
            << '\n';
    }
    out << "numerator,denominator,impact_ratio\n";
    for (const auto& row : report.ratios)
        out << row.numerator << ',' << row.denominator << ',' << detail::format_double(row.ratio)
            << '\n';
}

}  // namespace impactdid
