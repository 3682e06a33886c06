#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::core {

/// One (input, target) slice. `input` is W x k stored time-major:
/// element (t, c) lives at input[t * k + c].
struct SlidingWindow {
    std::size_t index = 0;
    std::size_t start = 0;
    std::size_t steps = 0;     // W
    std::size_t variables = 0; // k
    std::vector<double> input;
    std::vector<double> target; // horizon values of the target variable

    double at(std::size_t t, std::size_t c) const { return input[t * variables + c]; }
};

/// floor((T' - W - dT) / s) + 1, or 0 when no window fits.
constexpr std::size_t window_count(std::size_t length, std::size_t window, std::size_t horizon, std::size_t skip) {
    if (skip == 0 || window + horizon > length) return 0;
    return (length - window - horizon) / skip + 1;
}

/// `series[c]` is variable c of the (smoothed) data, all of equal length.
inline std::vector<SlidingWindow> generate_windows(const std::vector<std::vector<double>>& series, std::size_t window,
                                                   std::size_t horizon, std::size_t skip, std::size_t target_index) {
    if (series.empty()) throw Error(ErrorCode::ShapeMismatch, "no variables");
    if (target_index >= series.size()) throw Error(ErrorCode::UnknownTarget, "target index out of range");
    if (skip == 0) throw Error(ErrorCode::InvalidConfig, "skip must be >= 1");
    if (window == 0 || horizon == 0) throw Error(ErrorCode::InvalidConfig, "window and horizon must be >= 1");
    const std::size_t length = series.front().size();
    for (const auto& s : series)
        if (s.size() != length) throw Error(ErrorCode::LengthMismatch, "variables differ in length");
    const std::size_t n = window_count(length, window, horizon, skip);
    if (n == 0)
        throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(length) +
                                                   " cannot hold W + dT = " + std::to_string(window + horizon));
    const std::size_t k = series.size();
    std::vector<SlidingWindow> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& w = out[i];
        w.index = i;
        w.start = i * skip;
        w.steps = window;
        w.variables = k;
        w.input.resize(window * k);
        for (std::size_t t = 0; t < window; ++t)
            for (std::size_t c = 0; c < k; ++c) w.input[t * k + c] = series[c][w.start + t];
        const auto& y = series[target_index];
        w.target.assign(y.begin() + static_cast<std::ptrdiff_t>(w.start + window),
                        y.begin() + static_cast<std::ptrdiff_t>(w.start + window + horizon));
    }
    return out;
}

/// Number of training windows for a chronological split: floor(ratio * n),
/// clamped so both sides keep at least one window.
inline std::size_t train_count(std::size_t n, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "split ratio must lie in (0, 1)");
    if (n < 2) throw Error(ErrorCode::TooFewWindows, "need at least 2 windows, have " + std::to_string(n));
    auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n - 1) k = n - 1;
    return k;
}

/// Chronological split, no shuffling.
inline std::pair<std::vector<SlidingWindow>, std::vector<SlidingWindow>>
split_train_test(std::span<const SlidingWindow> windows, double ratio) {
    const std::size_t k = train_count(windows.size(), ratio);
    return {{windows.begin(), windows.begin() + static_cast<std::ptrdiff_t>(k)},
            {windows.begin() + static_cast<std::ptrdiff_t>(k), windows.end()}};
}

} // namespace timetuner::core
