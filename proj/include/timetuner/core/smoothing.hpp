#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::core {

enum class SmoothingMethod { Raw, MA, WMA };

struct SmoothingSpec {
    SmoothingMethod method = SmoothingMethod::Raw;
    int m = 1; // ignored for Raw

    /// Points lost at the front of the series (trailing window alignment).
    int lag() const { return method == SmoothingMethod::Raw ? 0 : m - 1; }

    std::string label() const {
        switch (method) {
        case SmoothingMethod::Raw: return "Raw";
        case SmoothingMethod::MA: return "MA-" + std::to_string(m);
        case SmoothingMethod::WMA: return "WMA-" + std::to_string(m);
        }
        return "?";
    }

    friend bool operator==(const SmoothingSpec& a, const SmoothingSpec& b) {
        return a.method == b.method && (a.method == SmoothingMethod::Raw || a.m == b.m);
    }

    static SmoothingSpec raw() { return {SmoothingMethod::Raw, 1}; }
    static SmoothingSpec ma(int m) { return {SmoothingMethod::MA, m}; }
    static SmoothingSpec wma(int m) { return {SmoothingMethod::WMA, m}; }
};

/// Parses "Raw", "RAW", "MA-3", "WMA-13".
inline SmoothingSpec parse_smoothing(const std::string& text) {
    if (text == "Raw" || text == "RAW" || text == "raw") return SmoothingSpec::raw();
    auto parse_m = [&](std::size_t prefix) {
        const std::string digits = text.substr(prefix);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorCode::InvalidConfig, "bad smoothing span in '" + text + "'");
        const int m = std::stoi(digits);
        if (m < 1) throw Error(ErrorCode::InvalidConfig, "smoothing span must be >= 1 in '" + text + "'");
        return m;
    };
    if (text.rfind("WMA-", 0) == 0) return SmoothingSpec::wma(parse_m(4));
    if (text.rfind("MA-", 0) == 0) return SmoothingSpec::ma(parse_m(3));
    throw Error(ErrorCode::InvalidConfig, "unknown smoothing '" + text + "'");
}

namespace detail {
inline void check_span(std::size_t n, int m) {
    if (m < 1) throw Error(ErrorCode::InvalidConfig, "smoothing span must be >= 1");
    if (static_cast<std::size_t>(m) > n)
        throw Error(ErrorCode::SpanTooLarge,
                    "span " + std::to_string(m) + " exceeds series length " + std::to_string(n));
}

// Sums are taken relative to the window's first value so a constant window
// reproduces the constant bit-exactly; the clamp removes last-ulp excursions
// outside the convex hull of the window.
inline double clamp_to_window(double v, std::span<const double> window) {
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    return std::clamp(v, *lo, *hi);
}
} // namespace detail

/// Trailing simple moving average; output j covers values[j .. j+m-1].
inline std::vector<double> moving_average(std::span<const double> values, int m) {
    detail::check_span(values.size(), m);
    const std::size_t w = static_cast<std::size_t>(m);
    std::vector<double> out(values.size() - w + 1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double anchor = values[j];
        double s = 0.0;
        for (std::size_t i = 0; i < w; ++i) s += values[j + i] - anchor;
        out[j] = detail::clamp_to_window(anchor + s / static_cast<double>(m), values.subspan(j, w));
    }
    return out;
}

/// Weight of the i-th point (1-based, oldest first) in a span-m WMA.
inline double wma_weight(int i, int m) {
    return 2.0 * static_cast<double>(i) / (static_cast<double>(m) * static_cast<double>(m + 1));
}

/// Trailing weighted moving average with arithmetic-progression weights
/// 1..m (newest point heaviest), normalized by m(m+1)/2.
inline std::vector<double> weighted_moving_average(std::span<const double> values, int m) {
    detail::check_span(values.size(), m);
    const std::size_t w = static_cast<std::size_t>(m);
    const double norm = static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
    std::vector<double> out(values.size() - w + 1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double anchor = values[j];
        double s = 0.0;
        for (std::size_t i = 0; i < w; ++i) s += static_cast<double>(i + 1) * (values[j + i] - anchor);
        out[j] = detail::clamp_to_window(anchor + s / norm, values.subspan(j, w));
    }
    return out;
}

inline std::vector<double> apply_smoothing(std::span<const double> values, const SmoothingSpec& spec) {
    switch (spec.method) {
    case SmoothingMethod::Raw: return {values.begin(), values.end()};
    case SmoothingMethod::MA: return moving_average(values, spec.m);
    case SmoothingMethod::WMA: return weighted_moving_average(values, spec.m);
    }
    return {};
}

} // namespace timetuner::core
