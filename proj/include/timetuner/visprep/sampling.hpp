#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "timetuner/random.hpp"

namespace timetuner::visprep {

/// Indices of a uniform sample without replacement, in ascending order.
/// Returns all indices when count <= n.
inline std::vector<std::size_t> sample_indices(std::size_t count, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    if (count <= n) return idx;
    Rng rng(seed);
    // Partial Fisher-Yates: the first n slots end up a uniform n-subset.
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(count - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

template <typename Point>
std::vector<Point> sample_predictions(const std::vector<Point>& points, std::size_t n, std::uint64_t seed) {
    std::vector<Point> out;
    for (auto i : sample_indices(points.size(), n, seed)) out.push_back(points[i]);
    return out;
}

} // namespace timetuner::visprep
