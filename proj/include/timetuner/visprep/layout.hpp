#pragma once

#include <vector>

#include "timetuner/error.hpp"

namespace timetuner::visprep {

/// Shared timeline in raw time-step indices, [begin, end).
struct TimeExtent {
    double begin = 0.0;
    double end = 1.0;
};

struct Rect {
    std::size_t window = 0;
    double x = 0.0;
    double width = 0.0;
    double x_end = 0.0; // exact start of the following rectangle
};

inline double time_to_pixel(double t, const TimeExtent& extent, double axis_width) {
    return (t - extent.begin) / (extent.end - extent.begin) * axis_width;
}

/// Window i starts at raw time offset + i * skip and is drawn skip steps
/// wide; each rectangle ends exactly where the next begins.
inline std::vector<Rect> layout_windows(std::size_t window_count, std::size_t skip, std::size_t time_offset,
                                        double axis_width, const TimeExtent& extent) {
    if (skip == 0) throw Error(ErrorCode::InvalidConfig, "skip must be >= 1");
    if (!(extent.end > extent.begin) || !(axis_width > 0.0))
        throw Error(ErrorCode::InvalidConfig, "empty time extent or axis");
    std::vector<Rect> out;
    out.reserve(window_count);
    for (std::size_t i = 0; i < window_count; ++i) {
        const double t0 = static_cast<double>(time_offset + i * skip);
        const double x0 = time_to_pixel(t0, extent, axis_width);
        const double x1 = time_to_pixel(t0 + static_cast<double>(skip), extent, axis_width);
        out.push_back({i, x0, x1 - x0, x1});
    }
    return out;
}

} // namespace timetuner::visprep
