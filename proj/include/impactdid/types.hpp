#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace impactdid {

// Thrown for data-dependent failures (unreadable input, degenerate cells,
// empty treatment group). Callers map these to exit code 2; contract
// violations use std::invalid_argument and map to exit code 1.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The closed sub-field label set. Other marks papers at venues absent from
// the venue map; it is never a valid origin field.
enum class FieldLabel : std::uint8_t {
    ClassicalAI = 0,
    ML,
    DM,
    CV,
    NLP,
    SR,
    Other,
};

inline constexpr std::array<FieldLabel, 6> kMappedFields = {
    FieldLabel::ClassicalAI, FieldLabel::ML, FieldLabel::DM,
    FieldLabel::CV,          FieldLabel::NLP, FieldLabel::SR,
};

inline constexpr std::size_t kFieldCount = 7;  // six mapped labels + Other

constexpr std::string_view to_string(FieldLabel f) {
    switch (f) {
        case FieldLabel::ClassicalAI: return "ClassicalAI";
        case FieldLabel::ML: return "ML";
        case FieldLabel::DM: return "DM";
        case FieldLabel::CV: return "CV";
        case FieldLabel::NLP: return "NLP";
        case FieldLabel::SR: return "SR";
        case FieldLabel::Other: return "Other";
    }
    return "Other";
}

inline std::optional<FieldLabel> field_from_string(std::string_view s) {
    for (FieldLabel f : kMappedFields)
        if (s == to_string(f)) return f;
    if (s == "Other") return FieldLabel::Other;
    return std::nullopt;
}

enum class GroupLabel : std::uint8_t { Treatment = 0, Control = 1 };

constexpr std::string_view to_string(GroupLabel g) {
    return g == GroupLabel::Treatment ? "treatment" : "control";
}

inline std::optional<GroupLabel> group_from_string(std::string_view s) {
    if (s == "treatment") return GroupLabel::Treatment;
    if (s == "control") return GroupLabel::Control;
    return std::nullopt;
}

// Inclusive year window [start_year, end_year].
struct TimeWindow {
    int start_year = 0;
    int end_year = 0;

    constexpr bool contains(int year) const {
        return year >= start_year && year <= end_year;
    }
    constexpr bool valid() const { return start_year <= end_year; }
    friend constexpr bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// Positional diagnostic produced by the parsers and the corpus builder.
// line == 0 marks errors that are not tied to a single input line.
struct ParseError {
    std::string file;
    std::size_t line = 0;
    std::string message;

    friend bool operator==(const ParseError&, const ParseError&) = default;
};

inline bool parse_error_before(const ParseError& a, const ParseError& b) {
    if (a.file != b.file) return a.file < b.file;
    if (a.line != b.line) return a.line < b.line;
    return a.message < b.message;
}

inline void sort_errors(std::vector<ParseError>& errors) {
    std::sort(errors.begin(), errors.end(), parse_error_before);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline void split_into(std::string_view s, char sep, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            return;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

inline std::optional<int> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

inline double parse_double_or_throw(std::string_view text, std::string_view what) {
    std::string s{trim(text)};
    if (s.empty()) throw DataError(std::string(what) + ": empty value");
    char* endp = nullptr;
    double v = std::strtod(s.c_str(), &endp);
    if (endp != s.c_str() + s.size())
        throw DataError(std::string(what) + ": not a number: '" + s + "'");
    return v;
}

// Shortest round-trip decimal representation; locale-free.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Fixed-precision decimal representation; locale-free.
inline std::string format_fixed(double v, int precision) {
    char buf[96];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    if (ec != std::errc()) return "NA";
    return std::string(buf, ptr);
}

// Worker cap: IMPACT_DID_THREADS when set, hardware concurrency otherwise.
inline unsigned thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("IMPACT_DID_THREADS")) {
        auto parsed = parse_int(env);
        if (parsed && *parsed >= 1) return std::min<unsigned>(hw, static_cast<unsigned>(*parsed));
    }
    return hw;
}

// Runs fn(begin, end) over contiguous chunks of [0, n) on up to thread_count()
// workers. Falls back to a direct call when one worker suffices.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
    unsigned workers = thread_count();
    if (n == 0) return;
    if (workers <= 1 || n < 2048) {
        fn(std::size_t{0}, n);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace detail

}  // namespace impactdid
