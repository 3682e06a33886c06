#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::visprep {

struct HorizonLayer {
    int band = 0;      // 0..3
    double fill = 0.0; // fraction of the band, [0, 1]
};

/// Four-band horizon folding of a series.
struct HorizonBands {
    static constexpr int band_count = 4;
    std::string variable_id;
    double min = 0.0;
    double max = 0.0;
    double band_height = 0.0;
    std::vector<HorizonLayer> layers;

    double reconstruct(std::size_t i) const {
        return min + (static_cast<double>(layers[i].band) + layers[i].fill) * band_height;
    }
};

inline HorizonBands horizon_bands(std::span<const double> values, std::string variable_id = {}) {
    if (values.empty()) throw Error(ErrorCode::SeriesTooShort, "horizon needs values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*lo < *hi)) throw Error(ErrorCode::ConstantSeries, "horizon of a constant series");
    HorizonBands h;
    h.variable_id = std::move(variable_id);
    h.min = *lo;
    h.max = *hi;
    h.band_height = (*hi - *lo) / HorizonBands::band_count;
    h.layers.reserve(values.size());
    for (double v : values) {
        const double pos = (v - h.min) / h.band_height;
        const int band = std::clamp(static_cast<int>(std::floor(pos)), 0, HorizonBands::band_count - 1);
        h.layers.push_back({band, std::clamp(pos - band, 0.0, 1.0)});
    }
    return h;
}

} // namespace timetuner::visprep
