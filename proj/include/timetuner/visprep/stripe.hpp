#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"
#include "timetuner/visprep/vsup.hpp"

namespace timetuner::visprep {

/// Bivariate metrics of one window: value metric (may be absent) and RMSE.
struct MetricPair {
    std::optional<double> value;
    double error = 0.0;
};

/// Contiguous window ranges [first, last) per pixel. With N_w <= P each of
/// the first N_w pixels gets one window and the rest are empty; otherwise
/// every pixel takes floor(N_w / P) windows and the last one also takes the
/// remainder.
inline std::vector<std::pair<std::size_t, std::size_t>> pixel_chunks(std::size_t windows, std::size_t pixels) {
    if (pixels == 0) throw Error(ErrorCode::InvalidConfig, "pixels must be >= 1");
    std::vector<std::pair<std::size_t, std::size_t>> out(pixels, {0, 0});
    if (windows <= pixels) {
        for (std::size_t i = 0; i < windows; ++i) out[i] = {i, i + 1};
        for (std::size_t i = windows; i < pixels; ++i) out[i] = {windows, windows};
        return out;
    }
    const std::size_t n_w = windows / pixels;
    for (std::size_t i = 0; i < pixels; ++i) out[i] = {i * n_w, (i + 1) * n_w};
    out.back().second = windows;
    return out;
}

/// Element-wise maximum per pixel; nullopt marks an empty pixel. The pooled
/// pair may combine values from different windows.
inline std::vector<std::optional<MetricPair>> max_pool(std::span<const MetricPair> metrics, std::size_t pixels) {
    std::vector<std::optional<MetricPair>> out;
    out.reserve(pixels);
    for (const auto& [first, last] : pixel_chunks(metrics.size(), pixels)) {
        if (first == last) {
            out.emplace_back();
            continue;
        }
        MetricPair p{std::nullopt, metrics[first].error};
        for (std::size_t i = first; i < last; ++i) {
            p.error = std::max(p.error, metrics[i].error);
            if (metrics[i].value) p.value = p.value ? std::max(*p.value, *metrics[i].value) : *metrics[i].value;
        }
        out.emplace_back(p);
    }
    return out;
}

struct StripeRow {
    std::string representation_id;
    std::vector<int> pixel_cells; // -1 = nothing to color
    std::vector<std::optional<MetricPair>> pixel_values;
    std::size_t n_w = 1;
};

inline std::size_t windows_per_pixel(std::size_t windows, std::size_t pixels) {
    return windows <= pixels ? 1 : windows / pixels;
}

/// Max-pools the window metrics into P pixels and quantizes each pixel with
/// the bivariate palette.
inline StripeRow aggregate_stripe(std::string representation_id, std::span<const MetricPair> metrics,
                                  std::size_t pixels, const VSUPScheme& scheme) {
    if (metrics.empty()) throw Error(ErrorCode::TooFewWindows, "stripe needs at least one window");
    StripeRow row;
    row.representation_id = std::move(representation_id);
    row.n_w = windows_per_pixel(metrics.size(), pixels);
    row.pixel_values = max_pool(metrics, pixels);
    row.pixel_cells.reserve(pixels);
    for (const auto& p : row.pixel_values)
        row.pixel_cells.push_back(p && p->value ? vsup_quantize(*p->value, p->error, scheme) : -1);
    return row;
}

/// Which metric a single-metric stripe shows.
enum class SingleMetric { Value, Error };

/// Same pooling, quantized to 8 sequential bins of one metric.
inline StripeRow aggregate_stripe_single(std::string representation_id, std::span<const MetricPair> metrics,
                                         std::size_t pixels, SingleMetric which, const std::array<double, 9>& edges) {
    if (metrics.empty()) throw Error(ErrorCode::TooFewWindows, "stripe needs at least one window");
    StripeRow row;
    row.representation_id = std::move(representation_id);
    row.n_w = windows_per_pixel(metrics.size(), pixels);
    row.pixel_values = max_pool(metrics, pixels);
    for (const auto& p : row.pixel_values) {
        if (!p) {
            row.pixel_cells.push_back(-1);
        } else if (which == SingleMetric::Error) {
            row.pixel_cells.push_back(sequential_bin(p->error, edges));
        } else {
            row.pixel_cells.push_back(p->value ? sequential_bin(*p->value, edges) : -1);
        }
    }
    return row;
}

} // namespace timetuner::visprep
