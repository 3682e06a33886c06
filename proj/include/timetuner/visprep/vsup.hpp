#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::visprep {

/// Which quantity drives the value (first) dimension.
enum class ValueMetric { Corr, Shap };

/// Discrete value-suppressing palette: 8 value bins at the lowest error
/// level, halving at each of the 3 higher levels (8, 4, 2, 1 cells).
///
/// Cell ids: level 0 -> 0..7, level 1 -> 8..11, level 2 -> 12..13,
/// level 3 -> 14. Higher level means higher RMSE.
struct VSUPScheme {
    static constexpr std::size_t value_bins = 8;
    static constexpr std::size_t levels = 4;
    static constexpr std::array<int, levels> level_bins{8, 4, 2, 1};
    static constexpr std::array<int, levels> level_offset{0, 8, 12, 14};
    static constexpr int cell_count = 15;

    ValueMetric metric = ValueMetric::Corr;
    std::array<double, value_bins + 1> dim1_edges{};
    std::array<double, levels + 1> dim2_edges{};
    std::vector<std::string> warnings;
};

struct VSUPCell {
    int id = 0;
    int level = 0;      // 0..3
    int value_bin = 0;  // bin within the level
    double value_lo = 0.0, value_hi = 0.0;
    double error_lo = 0.0, error_hi = 0.0;
};

namespace detail {

template <std::size_t N>
std::array<double, N + 1> equal_edges(double lo, double hi) {
    std::array<double, N + 1> e{};
    for (std::size_t i = 0; i <= N; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(N);
    e[N] = hi;
    return e;
}

// Bin i is [e_i, e_{i+1}); the last bin is closed. Out-of-range values clamp.
template <std::size_t M>
int bin_of(double v, const std::array<double, M>& edges) {
    const auto inner_begin = edges.begin() + 1;
    const auto inner_end = edges.end() - 1;
    return static_cast<int>(std::upper_bound(inner_begin, inner_end, v) - inner_begin);
}

} // namespace detail

/// Value edges: fixed [-1, 1] for correlation, [min, max] for SHAP. Error
/// edges: [0, max RMSE]. A range without spread falls back to edges that
/// put every observed value in the first bin and records a warning.
inline VSUPScheme build_vsup(std::span<const double> metric1, std::span<const double> metric2,
                             ValueMetric kind = ValueMetric::Corr) {
    if (metric1.empty() || metric2.empty()) throw Error(ErrorCode::InvalidConfig, "vsup needs values");
    for (double v : metric1)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "non-finite value metric");
    for (double v : metric2)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "non-finite error metric");
    VSUPScheme s;
    s.metric = kind;
    auto fallback = [](double c) { return std::max(std::abs(c), 1.0); };
    if (kind == ValueMetric::Corr) {
        s.dim1_edges = detail::equal_edges<VSUPScheme::value_bins>(-1.0, 1.0);
    } else {
        const auto [lo, hi] = std::minmax_element(metric1.begin(), metric1.end());
        if (*lo < *hi) {
            s.dim1_edges = detail::equal_edges<VSUPScheme::value_bins>(*lo, *hi);
        } else {
            s.dim1_edges = detail::equal_edges<VSUPScheme::value_bins>(*lo, *lo + fallback(*lo));
            s.warnings.push_back(std::string(to_string(ErrorCode::DegenerateRange)) + ": value metric is constant");
        }
    }
    const auto [lo2, hi2] = std::minmax_element(metric2.begin(), metric2.end());
    if (*lo2 < *hi2) {
        s.dim2_edges = detail::equal_edges<VSUPScheme::levels>(0.0, std::max(*hi2, 0.0));
    } else {
        s.dim2_edges = detail::equal_edges<VSUPScheme::levels>(*lo2, *lo2 + fallback(*lo2));
        s.warnings.push_back(std::string(to_string(ErrorCode::DegenerateRange)) + ": error metric is constant");
    }
    return s;
}

inline int vsup_level(double v2, const VSUPScheme& s) { return detail::bin_of(v2, s.dim2_edges); }
inline int vsup_value_bin(double v1, const VSUPScheme& s) { return detail::bin_of(v1, s.dim1_edges); }

/// Wedge quantization: the error level l picks the tree row and the 8-range
/// value bin is shifted right by l.
inline int vsup_quantize(double v1, double v2, const VSUPScheme& s) {
    const int level = vsup_level(v2, s);
    const int coarse = vsup_value_bin(v1, s) >> level;
    return VSUPScheme::level_offset[static_cast<std::size_t>(level)] + coarse;
}

inline VSUPCell describe_cell(int id, const VSUPScheme& s) {
    if (id < 0 || id >= VSUPScheme::cell_count) throw Error(ErrorCode::InvalidConfig, "bad vsup cell id");
    VSUPCell c;
    c.id = id;
    while (c.level + 1 < static_cast<int>(VSUPScheme::levels) &&
           id >= VSUPScheme::level_offset[static_cast<std::size_t>(c.level + 1)])
        ++c.level;
    c.value_bin = id - VSUPScheme::level_offset[static_cast<std::size_t>(c.level)];
    const int span = 1 << c.level;
    c.value_lo = s.dim1_edges[static_cast<std::size_t>(c.value_bin * span)];
    c.value_hi = s.dim1_edges[static_cast<std::size_t>((c.value_bin + 1) * span)];
    c.error_lo = s.dim2_edges[static_cast<std::size_t>(c.level)];
    c.error_hi = s.dim2_edges[static_cast<std::size_t>(c.level + 1)];
    return c;
}

/// Eight equal bins for the single-metric (sequential colormap) mode.
inline std::array<double, 9> sequential_edges(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidConfig, "no values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo < *hi) return detail::equal_edges<8>(*lo, *hi);
    return detail::equal_edges<8>(*lo, *lo + std::max(std::abs(*lo), 1.0));
}

inline int sequential_bin(double v, const std::array<double, 9>& edges) { return detail::bin_of(v, edges); }

} // namespace timetuner::visprep
