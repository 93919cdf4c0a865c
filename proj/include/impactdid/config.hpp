#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "impactdid/cohort.hpp"
#include "impactdid/did.hpp"
#include "impactdid/simgen.hpp"
#include "impactdid/types.hpp"

namespace impactdid {

// Flat key = value format with optional [section] headers and '#' comments.
struct KvFile {
    struct Section {
        std::string name;  // "" for the preamble
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections;

    const Section* find(std::string_view name) const {
        for (const Section& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }

    std::optional<std::string> get(std::string_view section, std::string_view key) const {
        if (const Section* s = find(section))
            for (const auto& [k, v] : s->entries)
                if (k == key) return v;
        return std::nullopt;
    }
};

inline KvFile parse_kv(std::istream& in) {
    KvFile file;
    file.sections.push_back({"", {}});
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        if (view.front() == '[') {
            if (view.back() != ']')
                throw DataError("config line " + std::to_string(line_no) + ": unterminated section");
            file.sections.push_back({std::string(detail::trim(view.substr(1, view.size() - 2))), {}});
            continue;
        }
        std::size_t eq = view.find('=');
        if (eq == std::string_view::npos)
            throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key(detail::trim(view.substr(0, eq)));
        std::string value(detail::trim(view.substr(eq + 1)));
        if (key.empty())
            throw DataError("config line " + std::to_string(line_no) + ": empty key");
        file.sections.back().entries.emplace_back(std::move(key), std::move(value));
    }
    return file;
}

namespace detail {

inline TimeWindow parse_window(std::string_view text, std::string_view what) {
    std::size_t dots = text.find("..");
    if (dots == std::string_view::npos)
        throw DataError(std::string(what) + ": expected <start>..<end>, got '" + std::string(text) +
                        "'");
    auto start = parse_int(text.substr(0, dots));
    auto end = parse_int(text.substr(dots + 2));
    if (!start || !end)
        throw DataError(std::string(what) + ": expected integer years in '" + std::string(text) +
                        "'");
    return TimeWindow{*start, *end};
}

inline int parse_int_or_throw(std::string_view text, std::string_view what) {
    auto v = parse_int(text);
    if (!v) throw DataError(std::string(what) + ": not an integer: '" + std::string(text) + "'");
    return *v;
}

inline bool parse_bool_or_throw(std::string_view text, std::string_view what) {
    std::string s = to_lower(trim(text));
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw DataError(std::string(what) + ": expected true/false, got '" + std::string(text) + "'");
}

}  // namespace detail

// Full run configuration: input paths plus the analysis settings.
struct AnalysisConfig {
    std::string papers_path;
    std::string citations_path;
    std::string venues_path;  // empty -> shipped default venue map
    std::string keywords_path;
    MatchMode match_mode = MatchMode::substring;
    int intervention_year = 0;
    AnalysisSettings settings;
    std::string out_dir = "out";
    bool export_edges = false;
    bool export_assignment = false;
};

inline void validate(const AnalysisConfig& c) {
    if (c.papers_path.empty()) throw DataError("config: papers path is required");
    if (c.citations_path.empty()) throw DataError("config: citations path is required");
    if (c.keywords_path.empty()) throw DataError("config: keywords path is required");
    validate(c.settings);
}

// Loads an analysis config; relative input paths resolve against the config
// file's directory. The pre-trend range defaults to the 10 years ending at
// the end of T1.
inline AnalysisConfig load_analysis_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    KvFile kv = parse_kv(in);
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

    auto resolve = [&](std::string_view value) {
        std::filesystem::path p{std::string(value)};
        return p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
    };

    AnalysisConfig cfg;
    for (const auto& [key, value] : kv.sections.front().entries) {
        if (key == "papers") cfg.papers_path = resolve(value);
        else if (key == "citations") cfg.citations_path = resolve(value);
        else if (key == "venues") cfg.venues_path = resolve(value);
        else if (key == "keywords") cfg.keywords_path = resolve(value);
        else if (key == "match_mode") {
            if (value == "substring") cfg.match_mode = MatchMode::substring;
            else if (value == "exact-tag") cfg.match_mode = MatchMode::exact_tag;
            else throw DataError("config: unknown match_mode '" + value + "'");
        } else if (key == "intervention_year")
            cfg.intervention_year = detail::parse_int_or_throw(value, "intervention_year");
        else if (key == "t1") cfg.settings.t1 = detail::parse_window(value, "t1");
        else if (key == "t2") cfg.settings.t2 = detail::parse_window(value, "t2");
        else if (key == "pre_trend")
            cfg.settings.pre_trend_years = detail::parse_window(value, "pre_trend");
        else if (key == "measure") {
            auto m = measure_from_string(value);
            if (!m) throw DataError("config: unknown measure '" + value + "'");
            cfg.settings.measure = *m;
        } else if (key == "mode") {
            auto m = effect_mode_from_string(value);
            if (!m) throw DataError("config: unknown mode '" + value + "'");
            cfg.settings.mode = *m;
        } else if (key == "alpha")
            cfg.settings.alpha = detail::parse_double_or_throw(value, "alpha");
        else if (key == "out_dir") cfg.out_dir = resolve(value);
        else if (key == "export_edges")
            cfg.export_edges = detail::parse_bool_or_throw(value, "export_edges");
        else if (key == "export_assignment")
            cfg.export_assignment = detail::parse_bool_or_throw(value, "export_assignment");
        else throw DataError("config: unknown key '" + key + "'");
    }
    if (cfg.settings.pre_trend_years == TimeWindow{})
        cfg.settings.pre_trend_years =
            TimeWindow{cfg.settings.t1.end_year - 9, cfg.settings.t1.end_year};
    return cfg;
}

// Scenario config: preamble keys, one [field X] section per generated field,
// a [cite_prob] section with "O -> D = p" entries (plus optional "default"),
// an optional [effect] section, and an optional [analysis] section used to
// prefill the analysis config written next to the generated corpus.
inline ScenarioConfig load_scenario_config(std::istream& in) {
    KvFile kv = parse_kv(in);
    ScenarioConfig cfg;
    for (const auto& [key, value] : kv.sections.front().entries) {
        if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(
                detail::parse_double_or_throw(value, "seed"));
        else if (key == "years") {
            TimeWindow w = detail::parse_window(value, "years");
            cfg.start_year = w.start_year;
            cfg.end_year = w.end_year;
        } else if (key == "treatment_share")
            cfg.treatment_share = detail::parse_double_or_throw(value, "treatment_share");
        else if (key == "refs_per_paper")
            cfg.refs_per_paper = detail::parse_double_or_throw(value, "refs_per_paper");
        else if (key == "topic_keyword") cfg.topic_keyword = value;
        else if (key == "control_tag") cfg.control_tag = value;
        else throw DataError("scenario config: unknown key '" + key + "'");
    }

    for (const KvFile::Section& section : kv.sections) {
        if (section.name.rfind("field ", 0) != 0) continue;
        FieldVolume fv;
        auto field = field_from_string(detail::trim(std::string_view(section.name).substr(6)));
        if (!field) throw DataError("scenario config: unknown field in [" + section.name + "]");
        fv.field = *field;
        for (const auto& [key, value] : section.entries) {
            if (key == "base") fv.base = detail::parse_double_or_throw(value, "field base");
            else if (key == "growth")
                fv.growth = detail::parse_double_or_throw(value, "field growth");
            else throw DataError("scenario config: unknown field key '" + key + "'");
        }
        cfg.fields.push_back(fv);
    }
    if (cfg.fields.empty()) throw DataError("scenario config: no [field X] sections");

    const std::size_t nf = cfg.fields.size();
    double default_prob = 0.0;
    std::vector<std::vector<std::optional<double>>> given(
        nf, std::vector<std::optional<double>>(nf));
    if (const KvFile::Section* probs = kv.find("cite_prob")) {
        auto pos_of = [&](std::string_view name) -> std::size_t {
            auto f = field_from_string(detail::trim(name));
            if (f)
                for (std::size_t i = 0; i < nf; ++i)
                    if (cfg.fields[i].field == *f) return i;
            throw DataError("scenario config: cite_prob names unknown field '" +
                            std::string(name) + "'");
        };
        for (const auto& [key, value] : probs->entries) {
            if (key == "default") {
                default_prob = detail::parse_double_or_throw(value, "cite_prob default");
                continue;
            }
            std::size_t arrow = key.find("->");
            if (arrow == std::string::npos)
                throw DataError("scenario config: cite_prob key must be 'O -> D', got '" + key +
                                "'");
            std::size_t i = pos_of(std::string_view(key).substr(0, arrow));
            std::size_t j = pos_of(std::string_view(key).substr(arrow + 2));
            given[i][j] = detail::parse_double_or_throw(value, "cite_prob");
        }
    }
    cfg.cite_prob.assign(nf, std::vector<double>(nf, default_prob));
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nf; ++j)
            if (given[i][j]) cfg.cite_prob[i][j] = *given[i][j];

    if (const KvFile::Section* effect = kv.find("effect")) {
        InjectedEffect inj;
        for (const auto& [key, value] : effect->entries) {
            if (key == "origin" || key == "dest") {
                auto f = field_from_string(value);
                if (!f) throw DataError("scenario config: unknown effect field '" + value + "'");
                (key == "origin" ? inj.origin : inj.dest) = *f;
            } else if (key == "delta")
                inj.delta = detail::parse_double_or_throw(value, "effect delta");
            else if (key == "from_year")
                inj.from_year = detail::parse_int_or_throw(value, "effect from_year");
            else throw DataError("scenario config: unknown effect key '" + key + "'");
        }
        cfg.injected = inj;
    }
    validate(cfg);
    return cfg;
}

// The optional [analysis] section of a scenario file, used by the simulate
// command to emit a ready-to-run analysis config.
struct ScenarioAnalysisDefaults {
    int intervention_year = 0;
    TimeWindow t1{};
    TimeWindow t2{};
    TimeWindow pre_trend{};
    std::string measure = "ratio";
    std::string mode = "absolute";
    double alpha = 0.05;
    bool present = false;
};

inline ScenarioAnalysisDefaults load_scenario_analysis_defaults(std::istream& in) {
    KvFile kv = parse_kv(in);
    ScenarioAnalysisDefaults d;
    const KvFile::Section* s = kv.find("analysis");
    if (!s) return d;
    d.present = true;
    for (const auto& [key, value] : s->entries) {
        if (key == "intervention_year")
            d.intervention_year = detail::parse_int_or_throw(value, "intervention_year");
        else if (key == "t1") d.t1 = detail::parse_window(value, "t1");
        else if (key == "t2") d.t2 = detail::parse_window(value, "t2");
        else if (key == "pre_trend") d.pre_trend = detail::parse_window(value, "pre_trend");
        else if (key == "measure") d.measure = value;
        else if (key == "mode") d.mode = value;
        else if (key == "alpha") d.alpha = detail::parse_double_or_throw(value, "alpha");
        else throw DataError("scenario config: unknown analysis key '" + key + "'");
    }
    return d;
}

inline void write_scenario_manifest(std::ostream& out, const ScenarioManifest& m) {
    const ScenarioConfig& c = m.config;
    out << "# scenario manifest: configuration echo and realized ground truth\n";
    out << "seed = " << c.seed << '\n';
    out << "years = " << c.start_year << ".." << c.end_year << '\n';
    out << "treatment_share = " << detail::format_double(c.treatment_share) << '\n';
    out << "refs_per_paper = " << detail::format_double(c.refs_per_paper) << '\n';
    out << "topic_keyword = " << c.topic_keyword << '\n';
    out << "control_tag = " << c.control_tag << '\n';
    out << "total_papers = " << m.total_papers << '\n';
    out << "total_edges = " << m.total_edges << '\n';
    for (const ClampNote& note : m.clamps)
        out << "clamped = " << to_string(note.origin) << " -> " << to_string(note.dest)
            << " requested " << detail::format_double(note.requested) << " clamped "
            << detail::format_double(note.clamped) << '\n';

    for (const FieldVolume& fv : c.fields) {
        out << "\n[field " << to_string(fv.field) << "]\n";
        out << "base = " << detail::format_double(fv.base) << '\n';
        out << "growth = " << detail::format_double(fv.growth) << '\n';
    }

    out << "\n[cite_prob]\n";
    for (std::size_t i = 0; i < c.fields.size(); ++i)
        for (std::size_t j = 0; j < c.fields.size(); ++j)
            out << to_string(c.fields[i].field) << " -> " << to_string(c.fields[j].field) << " = "
                << detail::format_double(c.cite_prob[i][j]) << '\n';

    if (c.injected) {
        out << "\n[effect]\n";
        out << "origin = " << to_string(c.injected->origin) << '\n';
        out << "dest = " << to_string(c.injected->dest) << '\n';
        out << "delta = " << detail::format_double(c.injected->delta) << '\n';
        out << "from_year = " << c.injected->from_year << '\n';
        out << "effective_delta = "
            << detail::format_double(m.true_effect(c.injected->origin, c.injected->dest)) << '\n';
    }

    for (std::size_t i = 0; i < c.fields.size(); ++i) {
        for (std::size_t g = 0; g < 2; ++g) {
            GroupLabel group = g == 0 ? GroupLabel::Treatment : GroupLabel::Control;
            out << "\n[volume " << to_string(c.fields[i].field) << ' ' << to_string(group)
                << "]\n";
            for (int y = c.start_year; y <= c.end_year; ++y)
                out << y << " = " << m.volume[i][g][static_cast<std::size_t>(y - c.start_year)]
                    << '\n';
        }
    }
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
        for (std::size_t g = 0; g < 2; ++g) {
            GroupLabel group = g == 0 ? GroupLabel::Treatment : GroupLabel::Control;
            for (std::size_t j = 0; j < c.fields.size(); ++j) {
                out << "\n[success " << to_string(c.fields[i].field) << ' ' << to_string(group)
                    << " -> " << to_string(c.fields[j].field) << "]\n";
                for (int y = c.start_year; y <= c.end_year; ++y)
                    out << y << " = "
                        << m.success[i][g][static_cast<std::size_t>(y - c.start_year)][j] << '\n';
            }
        }
    }
}

}  // namespace impactdid
