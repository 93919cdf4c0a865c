#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "impactdid/aggregate.hpp"
#include "impactdid/stats.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

enum class EffectMode { absolute, relative };

constexpr std::string_view to_string(EffectMode m) {
    return m == EffectMode::absolute ? "absolute" : "relative";
}

inline std::optional<EffectMode> effect_mode_from_string(std::string_view s) {
    if (s == "absolute") return EffectMode::absolute;
    if (s == "relative") return EffectMode::relative;
    return std::nullopt;
}

inline std::optional<Measure> measure_from_string(std::string_view s) {
    if (s == "count") return Measure::count;
    if (s == "ratio") return Measure::ratio;
    return std::nullopt;
}

// Absolute effect: pre/post change of the treatment group minus pre/post
// change of the control group.
inline double ate_absolute(double c_t1_treat, double c_t2_treat, double c_t1_ctrl,
                           double c_t2_ctrl) {
    for (double v : {c_t1_treat, c_t2_treat, c_t1_ctrl, c_t2_ctrl})
        if (!std::isfinite(v)) throw std::invalid_argument("ate_absolute: non-finite input");
    return (c_t2_treat - c_t1_treat) - (c_t2_ctrl - c_t1_ctrl);
}

// Relative effect in log2 units. All four inputs must be strictly positive;
// a zero cell would silently change the estimand if padded, so it errors.
inline double ate_relative(double c_t1_treat, double c_t2_treat, double c_t1_ctrl,
                           double c_t2_ctrl) {
    for (double v : {c_t1_treat, c_t2_treat, c_t1_ctrl, c_t2_ctrl}) {
        if (!std::isfinite(v)) throw std::invalid_argument("ate_relative: non-finite input");
        if (v <= 0.0) throw DataError("ate_relative: nonpositive input (degenerate cell)");
    }
    return std::log2(c_t2_treat / c_t1_treat) - std::log2(c_t2_ctrl / c_t1_ctrl);
}

// Percent transform of a log2 relative effect: (2^ate - 1) * 100.
inline double relative_percent(double ate_log2) {
    return (std::exp2(ate_log2) - 1.0) * 100.0;
}

struct TrendTestResult {
    double slope_treatment = 0.0;
    double slope_control = 0.0;
    double slope_diff = 0.0;  // slope_treatment - slope_control, exact
    double t_statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool parallel = true;  // p_value >= alpha
};

// Slope-difference pre-test of the parallel-trends assumption: per-group OLS
// on (year, value) points, then a two-sided t-test on the interaction
// coefficient of the pooled regression with n1 + n2 - 4 residual degrees of
// freedom.
inline TrendTestResult parallel_trend_test(const YearlySeries& treat, const YearlySeries& ctrl,
                                           double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("parallel_trend_test: alpha must be in (0, 1)");
    if (treat.points.size() < 3 || ctrl.points.size() < 3)
        throw std::invalid_argument(
            "parallel_trend_test: need at least 3 non-missing points per series");

    auto fit_series = [](const YearlySeries& s) {
        std::vector<double> x, y;
        x.reserve(s.points.size());
        y.reserve(s.points.size());
        for (const auto& [year, value] : s.points) {
            x.push_back(static_cast<double>(year));
            y.push_back(value);
        }
        return stats::ols_fit(x, y);
    };
    stats::LinearFit treat_fit = fit_series(treat);
    stats::LinearFit ctrl_fit = fit_series(ctrl);
    stats::SlopeDifference test = stats::slope_difference_test(treat_fit, ctrl_fit);

    TrendTestResult result;
    result.slope_treatment = test.slope_a;
    result.slope_control = test.slope_b;
    result.slope_diff = test.diff;
    result.t_statistic = test.t_statistic;
    result.p_value = test.p_value;
    result.alpha = alpha;
    result.parallel = result.p_value >= alpha;
    return result;
}

// The knobs run_analysis needs; the CLI-facing AnalysisConfig adds paths.
struct AnalysisSettings {
    TimeWindow t1;
    TimeWindow t2;
    TimeWindow pre_trend_years;
    Measure measure = Measure::ratio;
    EffectMode mode = EffectMode::absolute;
    double alpha = 0.05;
};

inline void validate(const AnalysisSettings& s) {
    if (!s.t1.valid()) throw std::invalid_argument("invalid T1 window: start > end");
    if (!s.t2.valid()) throw std::invalid_argument("invalid T2 window: start > end");
    if (s.t1.end_year >= s.t2.start_year)
        throw std::invalid_argument("T1 must end strictly before T2 starts");
    if (!s.pre_trend_years.valid())
        throw std::invalid_argument("invalid pre-trend range: start > end");
    if (s.pre_trend_years.end_year > s.t1.end_year)
        throw std::invalid_argument("pre-trend range must end by the end of T1");
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
}

// One report row: an estimate, or an explicit degenerate marker.
struct DidCell {
    FieldLabel origin = FieldLabel::ClassicalAI;
    std::optional<FieldLabel> dest;
    EffectMode mode = EffectMode::absolute;
    TimeWindow t1;
    TimeWindow t2;
    // c_t1_treat, c_t2_treat, c_t1_ctrl, c_t2_ctrl; NaN when undefined
    std::array<double, 4> c_values{std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN()};
    std::optional<double> ate;           // nullopt => degenerate
    std::string note;                    // degeneracy reason
    std::optional<TrendTestResult> trend;  // nullopt => test unavailable
    bool starred = false;                // trend ran and parallel not met
};

struct DidReport {
    AnalysisSettings settings;
    std::vector<DidCell> cells;               // sorted by (origin, dest)
    std::vector<AggregateCell> aggregates;    // the windowed cells behind the report
};

// Runs the trend pre-test and the DID estimate for every requested cell:
// all 36 (origin, dest) pairs for the ratio measure, the 6 origin fields for
// the count measure. Cells that cannot be estimated are reported as
// degenerate, never dropped.
inline DidReport run_analysis(const Corpus& corpus, const CohortAssignment& assignment,
                              const std::vector<LabeledEdge>& edges,
                              const AnalysisSettings& settings) {
    validate(settings);
    DidReport report;
    report.settings = settings;

    CitationTallies tallies(corpus, assignment, edges);

    std::vector<std::pair<FieldLabel, std::optional<FieldLabel>>> pairs;
    for (FieldLabel o : kMappedFields) {
        if (settings.measure == Measure::count)
            pairs.emplace_back(o, std::nullopt);
        else
            for (FieldLabel d : kMappedFields) pairs.emplace_back(o, d);
    }

    const std::array<std::pair<TimeWindow, GroupLabel>, 4> window_groups = {{
        {settings.t1, GroupLabel::Treatment},
        {settings.t2, GroupLabel::Treatment},
        {settings.t1, GroupLabel::Control},
        {settings.t2, GroupLabel::Control},
    }};

    for (const auto& [origin, dest] : pairs) {
        DidCell cell;
        cell.origin = origin;
        cell.dest = dest;
        cell.mode = settings.mode;
        cell.t1 = settings.t1;
        cell.t2 = settings.t2;

        bool all_defined = true;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& [window, group] = window_groups[k];
            if (!dest) {
                cell.c_values[k] =
                    static_cast<double>(tallies.origin_count(origin, group, window));
            } else if (auto rc = tallies.ratio_cell(origin, group, *dest, window)) {
                cell.c_values[k] = rc->ratio;
            } else {
                all_defined = false;
            }
        }

        try {
            YearlySeries treat_series = tallies.series(origin, GroupLabel::Treatment, dest,
                                                       settings.pre_trend_years, settings.measure);
            YearlySeries ctrl_series = tallies.series(origin, GroupLabel::Control, dest,
                                                      settings.pre_trend_years, settings.measure);
            cell.trend = parallel_trend_test(treat_series, ctrl_series, settings.alpha);
            cell.starred = !cell.trend->parallel;
        } catch (const std::invalid_argument&) {
            cell.trend = std::nullopt;  // too few points or degenerate years
        }

        if (!all_defined) {
            cell.note = "undefined ratio cell: no origin papers in a window";
        } else {
            try {
                cell.ate = settings.mode == EffectMode::absolute
                               ? ate_absolute(cell.c_values[0], cell.c_values[1], cell.c_values[2],
                                              cell.c_values[3])
                               : ate_relative(cell.c_values[0], cell.c_values[1], cell.c_values[2],
                                              cell.c_values[3]);
            } catch (const DataError& err) {
                cell.note = err.what();
            }
        }
        report.cells.push_back(std::move(cell));
    }

    // windowed cells behind the report, for the aggregate export
    for (FieldLabel o : kMappedFields) {
        for (const auto& [window, group] : window_groups) {
            report.aggregates.push_back(tallies.count_cell(o, group, window));
            if (settings.measure == Measure::ratio)
                for (FieldLabel d : kMappedFields)
                    if (auto rc = tallies.ratio_cell(o, group, d, window))
                        report.aggregates.push_back(*rc);
        }
    }
    return report;
}

namespace detail {

inline std::string csv_value(double v) {
    return std::isnan(v) ? std::string("NA") : format_double(v);
}

}  // namespace detail

// Report export: CSV origin, dest, mode, ate, starred, p_value, slope_treat,
// slope_ctrl, c_t1_treat, c_t2_treat, c_t1_ctrl, c_t2_ctrl. Degenerate values
// print as NA; starred is 1/0, or NA when the trend test could not run.
inline void write_did_csv(std::ostream& out, const DidReport& report) {
    out << "origin,dest,mode,ate,starred,p_value,slope_treat,slope_ctrl,"
           "c_t1_treat,c_t2_treat,c_t1_ctrl,c_t2_ctrl\n";
    for (const DidCell& cell : report.cells) {
        out << to_string(cell.origin) << ','
            << (cell.dest ? to_string(*cell.dest) : std::string_view{}) << ','
            << to_string(cell.mode) << ',';
        out << (cell.ate ? detail::format_double(*cell.ate) : std::string("NA")) << ',';
        if (cell.trend)
            out << (cell.starred ? '1' : '0') << ',' << detail::format_double(cell.trend->p_value)
                << ',' << detail::format_double(cell.trend->slope_treatment) << ','
                << detail::format_double(cell.trend->slope_control);
        else
            out << "NA,NA,NA,NA";
        for (double c : cell.c_values) out << ',' << detail::csv_value(c);
        out << '\n';
    }
}

}  // namespace impactdid
