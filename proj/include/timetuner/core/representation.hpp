#pragma once

#include <string>
#include <vector>

#include "timetuner/core/dataset.hpp"
#include "timetuner/core/scaling.hpp"
#include "timetuner/core/smoothing.hpp"
#include "timetuner/core/windows.hpp"
#include "timetuner/error.hpp"

namespace timetuner::core {

struct TransformConfig {
    std::vector<SmoothingSpec> smoothing{SmoothingSpec::raw()};
    std::vector<std::size_t> skips{1};
    std::size_t window_length = 24;
    std::size_t horizon = 1;
    double split_ratio = 0.8;

    void validate() const {
        if (smoothing.empty()) throw Error(ErrorCode::InvalidConfig, "no smoothing specs");
        if (skips.empty()) throw Error(ErrorCode::InvalidConfig, "no skips");
        for (auto s : skips)
            if (s == 0) throw Error(ErrorCode::InvalidConfig, "skip must be >= 1");
        for (const auto& sm : smoothing)
            if (sm.method != SmoothingMethod::Raw && sm.m < 1)
                throw Error(ErrorCode::InvalidConfig, "smoothing span must be >= 1");
        if (window_length == 0 || horizon == 0) throw Error(ErrorCode::InvalidConfig, "W and dT must be >= 1");
        if (!(split_ratio > 0.0 && split_ratio < 1.0))
            throw Error(ErrorCode::InvalidConfig, "split ratio must lie in (0, 1)");
    }
};

inline std::string representation_id(const SmoothingSpec& smoothing, std::size_t skip) {
    return smoothing.label() + "/Sk-" + std::to_string(skip);
}

struct Representation {
    std::string id;
    SmoothingSpec smoothing;
    std::size_t skip = 1;
    std::size_t target_index = 0;
    std::vector<std::vector<double>> series; // k smoothed variables
    std::vector<SlidingWindow> windows;

    std::size_t length() const { return series.empty() ? 0 : series.front().size(); }
    /// Raw time index of smoothed sample 0.
    std::size_t time_offset() const { return static_cast<std::size_t>(smoothing.lag()); }
};

inline std::vector<std::vector<double>> smooth_all(const TimeSeriesDataset& ds, const SmoothingSpec& spec) {
    std::vector<std::vector<double>> out;
    out.reserve(ds.variables.size());
    for (const auto& v : ds.variables) out.push_back(apply_smoothing(v.values, spec));
    return out;
}

inline Representation make_representation(std::vector<std::vector<double>> smoothed, const SmoothingSpec& spec,
                                          std::size_t skip, std::size_t target_index, const TransformConfig& cfg) {
    Representation r;
    r.id = representation_id(spec, skip);
    r.smoothing = spec;
    r.skip = skip;
    r.target_index = target_index;
    r.series = std::move(smoothed);
    r.windows = generate_windows(r.series, cfg.window_length, cfg.horizon, skip, target_index);
    return r;
}

/// Smoothing-major Cartesian product of the configured specs and skips. Each
/// smoothing is applied once per variable and shared by its skips.
inline std::vector<Representation> enumerate_representations(const TimeSeriesDataset& ds, const TransformConfig& cfg) {
    cfg.validate();
    const std::size_t target = ds.target_index();
    std::vector<Representation> out;
    for (const auto& spec : cfg.smoothing) {
        std::vector<std::vector<double>> smoothed;
        try {
            smoothed = smooth_all(ds, spec);
        } catch (const Error& e) {
            throw Error(e.code(), spec.label() + ": " + e.what());
        }
        for (auto skip : cfg.skips) {
            try {
                out.push_back(make_representation(smoothed, spec, skip, target, cfg));
            } catch (const Error& e) {
                throw Error(e.code(), representation_id(spec, skip) + ": " + e.what());
            }
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].id == out[j].id) throw Error(ErrorCode::InvalidConfig, "duplicate representation " + out[i].id);
    return out;
}

/// Chronological split plus min-max scaling fitted on the span the training
/// windows cover (inputs and targets). Windows are rebuilt from the scaled
/// series so indices and starts are unchanged.
struct PreparedSplit {
    MinMaxScaler scaler;
    std::vector<SlidingWindow> all; // scaled, every window
    std::size_t train_size = 0;

    std::span<const SlidingWindow> train() const { return {all.data(), train_size}; }
    std::span<const SlidingWindow> test() const { return {all.data() + train_size, all.size() - train_size}; }
};

inline PreparedSplit prepare_split(const Representation& rep, const TransformConfig& cfg) {
    PreparedSplit p;
    p.train_size = train_count(rep.windows.size(), cfg.split_ratio);
    const auto& last_train = rep.windows[p.train_size - 1];
    p.scaler = MinMaxScaler::fit(rep.series, last_train.start + cfg.window_length + cfg.horizon);
    p.all = generate_windows(p.scaler.transform(rep.series), cfg.window_length, cfg.horizon, rep.skip,
                             rep.target_index);
    return p;
}

} // namespace timetuner::core
