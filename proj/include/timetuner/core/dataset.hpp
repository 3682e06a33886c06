#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::core {

/// A parsed timestamp. ISO-8601 stamps are stored as seconds since the Unix
/// epoch, integer stamps verbatim; `label` keeps the original text.
struct TimePoint {
    std::int64_t value = 0;
    std::string label;
    bool calendar = false;
};

struct VariableSeries {
    std::string id;
    std::string display_name;
    std::vector<double> values;
    std::optional<std::string> unit;
};

struct TimeSeriesDataset {
    std::string name;
    std::vector<TimePoint> timestamps;
    std::vector<VariableSeries> variables;
    std::string target_id;
    std::string frequency;

    std::size_t length() const { return timestamps.size(); }
    std::size_t variable_count() const { return variables.size(); }

    std::size_t target_index() const {
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (variables[i].id == target_id) return i;
        throw Error(ErrorCode::UnknownTarget, "target '" + target_id + "' names no variable");
    }

    const VariableSeries& target() const { return variables[target_index()]; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

// RFC 4180 style: fields may be double-quoted, "" escapes a quote.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::string(trim(cur)));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::string(trim(cur)));
    return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// Howard Hinnant's days_from_civil.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

/// Accepts YYYY-MM, YYYY-MM-DD, and YYYY-MM-DD[T| ]HH:MM[:SS][Z].
inline std::optional<std::int64_t> parse_iso8601(std::string_view s) {
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        if (pos + len > s.size()) return std::nullopt;
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
    if (s.size() < 7 || s[4] != '-') return std::nullopt;
    const auto year = num(0, 4);
    const auto month = num(5, 2);
    if (!year || !month || *month < 1 || *month > 12) return std::nullopt;
    int day = 1;
    std::size_t pos = 7;
    if (s.size() > 7) {
        if (s[7] != '-') return std::nullopt;
        const auto d = num(8, 2);
        if (!d || *d < 1 || *d > 31) return std::nullopt;
        day = *d;
        pos = 10;
    }
    int hh = 0, mm = 0, ss = 0;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
        const auto h = num(pos + 1, 2);
        if (!h || pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
        const auto mi = num(pos + 4, 2);
        if (!mi) return std::nullopt;
        hh = *h;
        mm = *mi;
        pos += 6;
        if (pos < s.size()) {
            if (s[pos] != ':') return std::nullopt;
            const auto se = num(pos + 1, 2);
            if (!se || pos + 3 != s.size()) return std::nullopt;
            ss = *se;
        }
        if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    }
    return days_from_civil(*year, static_cast<unsigned>(*month), static_cast<unsigned>(day)) * 86400 +
           hh * 3600 + mm * 60 + ss;
}

inline std::optional<TimePoint> parse_timestamp(std::string_view text) {
    text = trim(text);
    if (auto i = parse_int(text)) return TimePoint{*i, std::string(text), false};
    if (auto t = parse_iso8601(text)) return TimePoint{*t, std::string(text), true};
    return std::nullopt;
}

inline std::string infer_frequency(const std::vector<TimePoint>& ts) {
    if (ts.size() < 2) return "unknown";
    if (!ts.front().calendar) return "step";
    std::vector<std::int64_t> gaps;
    gaps.reserve(ts.size() - 1);
    for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(ts[i].value - ts[i - 1].value);
    const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
    constexpr std::int64_t day = 86400;
    auto all_equal = [&](std::int64_t g) { return *lo == g && *hi == g; };
    if (all_equal(60)) return "minutely";
    if (all_equal(3600)) return "hourly";
    if (all_equal(day)) return "daily";
    if (all_equal(7 * day)) return "weekly";
    if (*lo >= 28 * day && *hi <= 31 * day) return "monthly";
    if (*lo >= 89 * day && *hi <= 92 * day) return "quarterly";
    if (*lo >= 365 * day && *hi <= 366 * day) return "yearly";
    return "irregular";
}

inline std::string stem(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

} // namespace detail

/// Checks the dataset invariants; throws on the first violation.
inline void validate(const TimeSeriesDataset& ds) {
    if (ds.length() < 2) throw Error(ErrorCode::SeriesTooShort, "dataset needs at least 2 rows");
    if (ds.variables.empty()) throw Error(ErrorCode::MalformedInput, "dataset has no variables");
    for (std::size_t i = 1; i < ds.timestamps.size(); ++i) {
        if (ds.timestamps[i].value == ds.timestamps[i - 1].value)
            throw Error(ErrorCode::DuplicateTimestamp, "timestamp '" + ds.timestamps[i].label + "' repeats");
        if (ds.timestamps[i].value < ds.timestamps[i - 1].value)
            throw Error(ErrorCode::MalformedInput, "timestamps not increasing");
    }
    for (const auto& v : ds.variables) {
        if (v.values.size() != ds.length())
            throw Error(ErrorCode::LengthMismatch, "variable '" + v.id + "' has wrong length");
        for (double x : v.values)
            if (!std::isfinite(x)) throw Error(ErrorCode::MissingValue, "non-finite value in '" + v.id + "'");
    }
    (void)ds.target_index();
}

/// Parses CSV text: header row, timestamp column first, numeric columns after.
/// Rows are sorted by timestamp; any empty or non-numeric cell is rejected.
inline TimeSeriesDataset parse_csv(std::istream& in, const std::string& target, const std::string& name = "dataset") {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedInput, "empty input");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // UTF-8 BOM
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2) throw Error(ErrorCode::MalformedInput, "need a timestamp column and at least one variable");

    TimeSeriesDataset ds;
    ds.name = name;
    for (std::size_t c = 1; c < header.size(); ++c) {
        VariableSeries v;
        v.id = header[c];
        v.display_name = header[c];
        ds.variables.push_back(std::move(v));
    }
    if (std::none_of(ds.variables.begin(), ds.variables.end(), [&](const auto& v) { return v.id == target; }))
        throw Error(ErrorCode::UnknownTarget, "no column named '" + target + "'");
    ds.target_id = target;

    struct Row {
        TimePoint t;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw Error(ErrorCode::MissingValue, "row " + std::to_string(row_number) + " has " +
                                                     std::to_string(fields.size()) + " cells, expected " +
                                                     std::to_string(header.size()));
        auto t = detail::parse_timestamp(fields[0]);
        if (!t)
            throw Error(ErrorCode::MalformedInput,
                        "row " + std::to_string(row_number) + ": unparseable timestamp '" + fields[0] + "'");
        Row r{std::move(*t), {}};
        for (std::size_t c = 1; c < fields.size(); ++c) {
            auto v = detail::parse_double(fields[c]);
            if (!v)
                throw Error(ErrorCode::MissingValue,
                            "row " + std::to_string(row_number) + ", column " + std::to_string(c + 1) + " ('" +
                                header[c] + "')");
            r.values.push_back(*v);
        }
        rows.push_back(std::move(r));
    }
    if (!rows.empty()) {
        const bool cal = rows.front().t.calendar;
        for (const auto& r : rows)
            if (r.t.calendar != cal) throw Error(ErrorCode::MalformedInput, "mixed timestamp formats");
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t.value < b.t.value; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].t.value == rows[i - 1].t.value)
            throw Error(ErrorCode::DuplicateTimestamp, "timestamp '" + rows[i].t.label + "' appears twice");

    for (auto& r : rows) {
        for (std::size_t c = 0; c < r.values.size(); ++c) ds.variables[c].values.push_back(r.values[c]);
        ds.timestamps.push_back(std::move(r.t));
    }
    ds.frequency = detail::infer_frequency(ds.timestamps);
    validate(ds);
    return ds;
}

inline TimeSeriesDataset load_dataset(const std::string& path, const std::string& target) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return parse_csv(in, target, detail::stem(path));
}

/// Keeps the last `n` rows (used to build desk-scale fixtures).
inline TimeSeriesDataset tail(const TimeSeriesDataset& ds, std::size_t n) {
    if (n >= ds.length()) return ds;
    TimeSeriesDataset out = ds;
    const auto off = static_cast<std::ptrdiff_t>(ds.length() - n);
    out.timestamps.assign(ds.timestamps.begin() + off, ds.timestamps.end());
    for (std::size_t i = 0; i < ds.variables.size(); ++i)
        out.variables[i].values.assign(ds.variables[i].values.begin() + off, ds.variables[i].values.end());
    return out;
}

} // namespace timetuner::core
