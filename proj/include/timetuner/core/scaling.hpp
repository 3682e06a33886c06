#pragma once

#include <algorithm>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::core {

/// Per-variable min-max scaling to [0, 1]. Zero-range variables map to 0.
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;

    /// Fits on series[c][0 .. prefix).
    static MinMaxScaler fit(const std::vector<std::vector<double>>& series, std::size_t prefix) {
        MinMaxScaler s;
        for (const auto& v : series) {
            if (prefix == 0 || prefix > v.size()) throw Error(ErrorCode::ShapeMismatch, "bad scaler fit range");
            const auto [lo, hi] = std::minmax_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(prefix));
            s.min.push_back(*lo);
            s.max.push_back(*hi);
        }
        return s;
    }

    double range(std::size_t c) const { return max[c] > min[c] ? max[c] - min[c] : 1.0; }
    double forward(std::size_t c, double v) const { return (v - min[c]) / range(c); }
    double inverse(std::size_t c, double v) const { return v * range(c) + min[c]; }

    std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& series) const {
        auto out = series;
        for (std::size_t c = 0; c < out.size(); ++c)
            for (auto& v : out[c]) v = forward(c, v);
        return out;
    }
};

} // namespace timetuner::core
