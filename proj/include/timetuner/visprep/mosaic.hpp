#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::visprep {

/// Uniform g x g partition of a variable pair. Cell (ix, iy) is stored at
/// iy * g + ix. Empty cells carry no value.
struct MosaicGrid {
    std::string x_variable;
    std::string y_variable;
    std::size_t grid = 5;
    std::vector<double> x_edges; // g + 1
    std::vector<double> y_edges; // g + 1
    std::vector<std::optional<double>> cell_values;
    std::vector<std::size_t> cell_counts;

    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * grid + ix; }
};

namespace detail {

inline std::vector<double> uniform_edges(std::span<const double> v, std::size_t g) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<double> e(g + 1);
    for (std::size_t i = 0; i <= g; ++i) e[i] = *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(g);
    e[g] = *hi;
    return e;
}

inline std::size_t cell_of(double v, const std::vector<double>& edges) {
    const std::size_t g = edges.size() - 1;
    if (edges.back() <= edges.front()) return 0;
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    return std::min(static_cast<std::size_t>(it - (edges.begin() + 1)), g - 1);
}

inline MosaicGrid bin_points(std::span<const double> x, std::span<const double> y, std::size_t g) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "mosaic axes differ in length");
    if (x.empty()) throw Error(ErrorCode::SeriesTooShort, "mosaic needs at least one point");
    if (g < 2) throw Error(ErrorCode::InvalidConfig, "mosaic grid must be >= 2");
    MosaicGrid m;
    m.grid = g;
    m.x_edges = uniform_edges(x, g);
    m.y_edges = uniform_edges(y, g);
    m.cell_values.assign(g * g, std::nullopt);
    m.cell_counts.assign(g * g, 0);
    return m;
}

} // namespace detail

/// Cell value = mean of `color` over the points falling in the cell.
inline MosaicGrid mosaic_matrix(std::span<const double> x, std::span<const double> y, std::span<const double> color,
                                std::size_t g = 5) {
    if (color.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "mosaic color differs in length");
    MosaicGrid m = detail::bin_points(x, y, g);
    std::vector<double> sums(g * g, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto c = m.index(detail::cell_of(x[i], m.x_edges), detail::cell_of(y[i], m.y_edges));
        ++m.cell_counts[c];
        sums[c] += color[i];
    }
    for (std::size_t c = 0; c < sums.size(); ++c)
        if (m.cell_counts[c] > 0) m.cell_values[c] = sums[c] / static_cast<double>(m.cell_counts[c]);
    return m;
}

/// Cell value = share of all points in the cell (univariate comparison of
/// two smoothings of the same series).
inline MosaicGrid mosaic_density(std::span<const double> x, std::span<const double> y, std::size_t g = 5) {
    MosaicGrid m = detail::bin_points(x, y, g);
    for (std::size_t i = 0; i < x.size(); ++i)
        ++m.cell_counts[m.index(detail::cell_of(x[i], m.x_edges), detail::cell_of(y[i], m.y_edges))];
    for (std::size_t c = 0; c < m.cell_counts.size(); ++c)
        if (m.cell_counts[c] > 0)
            m.cell_values[c] = static_cast<double>(m.cell_counts[c]) / static_cast<double>(x.size());
    return m;
}

} // namespace timetuner::visprep
