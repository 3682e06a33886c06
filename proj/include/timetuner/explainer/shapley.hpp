#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"
#include "timetuner/forecaster/network.hpp"

namespace timetuner::explainer {

inline constexpr std::size_t max_exact_features = 12;

/// Partition of the W x k input cells into features. `cells[j]` lists the
/// flat (t * k + c) indices owned by feature j.
struct FeatureGrouping {
    std::size_t window = 0;
    std::size_t variables = 0;
    std::vector<std::string> labels;
    std::vector<std::vector<std::size_t>> cells;
    /// Set when every feature is a contiguous time segment covering all
    /// variables: segment j spans [bounds[j], bounds[j+1]).
    std::optional<std::vector<std::size_t>> segment_bounds;

    std::size_t size() const { return cells.size(); }
};

/// One feature per input variable, across all time steps.
inline FeatureGrouping group_by_variable(std::size_t window, const std::vector<std::string>& variable_ids) {
    FeatureGrouping g;
    g.window = window;
    g.variables = variable_ids.size();
    g.labels = variable_ids;
    g.cells.resize(variable_ids.size());
    for (std::size_t c = 0; c < variable_ids.size(); ++c)
        for (std::size_t t = 0; t < window; ++t) g.cells[c].push_back(t * g.variables + c);
    return g;
}

/// `segments` contiguous time segments of near-equal length; segment j
/// covers lags [floor(j W / n), floor((j+1) W / n)).
inline FeatureGrouping group_by_time(std::size_t window, std::size_t variables, std::size_t segments = 12) {
    if (window == 0 || variables == 0) throw Error(ErrorCode::ShapeMismatch, "empty window");
    segments = std::min(segments, window);
    FeatureGrouping g;
    g.window = window;
    g.variables = variables;
    std::vector<std::size_t> bounds;
    for (std::size_t j = 0; j <= segments; ++j) bounds.push_back(j * window / segments);
    for (std::size_t j = 0; j < segments; ++j) {
        g.labels.push_back("t" + std::to_string(bounds[j]) + "-" + std::to_string(bounds[j + 1] - 1));
        std::vector<std::size_t> cells;
        for (std::size_t t = bounds[j]; t < bounds[j + 1]; ++t)
            for (std::size_t c = 0; c < variables; ++c) cells.push_back(t * variables + c);
        g.cells.push_back(std::move(cells));
    }
    g.segment_bounds = std::move(bounds);
    return g;
}

/// Input with features outside `mask` replaced by the background.
inline std::vector<double> masked_input(std::span<const double> window, std::span<const double> background,
                                        const FeatureGrouping& g, std::uint64_t mask) {
    std::vector<double> x(background.begin(), background.end());
    for (std::size_t j = 0; j < g.size(); ++j)
        if (mask >> j & 1U)
            for (auto idx : g.cells[j]) x[idx] = window[idx];
    return x;
}

using ScalarModel = std::function<double(std::span<const double>)>;

inline void check_feature_count(const FeatureGrouping& g) {
    if (g.size() == 0) throw Error(ErrorCode::InvalidConfig, "no features");
    if (g.size() > max_exact_features)
        throw Error(ErrorCode::TooManyFeatures, std::to_string(g.size()) + " features exceed the exact limit of " +
                                                    std::to_string(max_exact_features) +
                                                    "; group inputs more coarsely");
}

/// v(S) for all 2^F coalitions; bit j of the index marks feature j present.
inline std::vector<double> coalition_values(const ScalarModel& model, std::span<const double> window,
                                            std::span<const double> background, const FeatureGrouping& g) {
    check_feature_count(g);
    if (window.size() != background.size()) throw Error(ErrorCode::ShapeMismatch, "window vs background");
    const std::uint64_t n = std::uint64_t{1} << g.size();
    std::vector<double> v(n);
    for (std::uint64_t mask = 0; mask < n; ++mask) v[mask] = model(masked_input(window, background, g, mask));
    return v;
}

/// Affine map applied to the horizon mean of the network output
/// (de-normalization of the explained scalar).
struct OutputScale {
    double scale = 1.0;
    double offset = 0.0;
};

namespace detail {

template <typename T>
std::vector<double> explained_scalars(const forecaster::Mat<T>& y, OutputScale s) {
    std::vector<double> out(static_cast<std::size_t>(y.cols()));
    for (Eigen::Index b = 0; b < y.cols(); ++b)
        out[static_cast<std::size_t>(b)] = s.scale * static_cast<double>(y.col(b).mean()) + s.offset;
    return out;
}

/// Coalition values for contiguous time-segment features. Coalitions are
/// expanded one segment at a time so LSTM prefixes shared by many
/// coalitions are computed once: after level j the batch holds 2^(j+1)
/// columns, column m carrying the state for mask bits m over segments 0..j.
inline std::vector<double> segment_coalition_values(const forecaster::ForecastModel<double>& model,
                                                    std::span<const double> window,
                                                    std::span<const double> background,
                                                    const std::vector<std::size_t>& bounds, OutputScale s) {
    using M = forecaster::Mat<double>;
    const auto& l = model.layout();
    const auto v = model.views();
    const std::size_t F = bounds.size() - 1;
    const std::size_t K = l.kernel, k = l.variables, L = l.steps();
    const auto H = static_cast<Eigen::Index>(l.units);

    std::vector<std::size_t> seg_of(l.window);
    for (std::size_t j = 0; j < F; ++j)
        for (std::size_t t = bounds[j]; t < bounds[j + 1]; ++t) seg_of[t] = j;

    M h = M::Zero(H, 1), c = M::Zero(H, 1);
    std::vector<double> patch(K * k);
    for (std::size_t level = 0; level < F; ++level) {
        const Eigen::Index width = Eigen::Index{1} << (level + 1);
        M h2(H, width), c2(H, width);
        h2 << h, h;
        c2 << c, c;
        h = std::move(h2);
        c = std::move(c2);

        // Conv steps whose last input row falls in segment `level`.
        const std::size_t t_begin = bounds[level] + 1 >= K ? bounds[level] + 1 - K : 0;
        const std::size_t t_end = std::min(L, bounds[level + 1] + 1 >= K ? bounds[level + 1] + 1 - K : 0);
        for (std::size_t t = t_begin; t < t_end; ++t) {
            const std::size_t first_seg = seg_of[t];
            const std::size_t span = level - first_seg + 1;
            const Eigen::Index variants = Eigen::Index{1} << span;
            M patches(static_cast<Eigen::Index>(K * k), variants);
            for (Eigen::Index var = 0; var < variants; ++var) {
                for (std::size_t r = 0; r < K; ++r) {
                    const std::size_t row = t + r;
                    const bool present = (var >> (seg_of[row] - first_seg)) & 1;
                    const double* src = (present ? window.data() : background.data()) + row * k;
                    for (std::size_t cc = 0; cc < k; ++cc)
                        patches(static_cast<Eigen::Index>(r * k + cc), var) = src[cc];
                }
            }
            const M z = forecaster::conv_step<double>(v, patches);
            M wz = v.lstm_w * z;
            wz.colwise() += v.lstm_b;

            M a = v.lstm_u * h;
            for (Eigen::Index col = 0; col < width; ++col) a.col(col) += wz.col((col >> first_seg) & (variants - 1));
            a.topRows(2 * H).array() = forecaster::detail::sigmoid(a.topRows(2 * H).array());
            a.middleRows(2 * H, H).array() = forecaster::detail::tanh(a.middleRows(2 * H, H).array());
            a.bottomRows(H).array() = forecaster::detail::sigmoid(a.bottomRows(H).array());
            c = a.middleRows(H, H).cwiseProduct(c) + a.topRows(H).cwiseProduct(a.middleRows(2 * H, H));
            h.array() = a.bottomRows(H).array() * forecaster::detail::tanh(c.array());
        }
    }
    const M y = forecaster::head<double>(v, h);
    forecaster::check_finite(y);
    return explained_scalars(y, s);
}

} // namespace detail

/// Coalition values for the forecasting network, batched over coalitions.
inline std::vector<double> coalition_values(const forecaster::ForecastModel<double>& model, OutputScale scale,
                                            std::span<const double> window, std::span<const double> background,
                                            const FeatureGrouping& g) {
    check_feature_count(g);
    if (window.size() != model.window() * model.variables() || background.size() != window.size())
        throw Error(ErrorCode::ShapeMismatch, "window or background does not match the model input");
    if (g.segment_bounds && g.window == model.window())
        return detail::segment_coalition_values(model, window, background, *g.segment_bounds, scale);
    const std::uint64_t n = std::uint64_t{1} << g.size();
    std::vector<std::vector<double>> inputs;
    inputs.reserve(n);
    for (std::uint64_t mask = 0; mask < n; ++mask) inputs.push_back(masked_input(window, background, g, mask));
    std::vector<const double*> ptrs;
    for (const auto& x : inputs) ptrs.push_back(x.data());
    const auto y = forecaster::forward_batch(model, std::span<const double* const>(ptrs));
    return detail::explained_scalars(y, scale);
}

/// Exact Shapley values from a full table of coalition values:
/// phi_j = sum over S not containing j of |S|! (F-|S|-1)! / F! (v(S+j) - v(S)).
inline std::vector<double> shapley_from_values(std::span<const double> values, std::size_t features) {
    if (values.size() != (std::size_t{1} << features)) throw Error(ErrorCode::ShapeMismatch, "coalition table size");
    std::vector<double> fact(features + 1, 1.0);
    for (std::size_t i = 1; i <= features; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    // Integer weights with one division at the end; exact for dyadic games.
    std::vector<double> weight(features);
    for (std::size_t s = 0; s < features; ++s) weight[s] = fact[s] * fact[features - s - 1];
    std::vector<double> phi(features, 0.0);
    for (std::size_t j = 0; j < features; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        double acc = 0.0;
        for (std::size_t mask = 0; mask < values.size(); ++mask) {
            if (mask & bit) continue;
            acc += weight[static_cast<std::size_t>(std::popcount(mask))] * (values[mask | bit] - values[mask]);
        }
        phi[j] = acc / fact[features];
    }
    return phi;
}

struct Attribution {
    std::size_t window_id = 0;
    double base = 0.0;       // explained scalar on the background
    double prediction = 0.0; // explained scalar on the window
    std::vector<double> phi;
    std::vector<std::string> feature_labels;
};

inline Attribution attribution_from_values(std::size_t window_id, std::span<const double> values,
                                           const FeatureGrouping& g) {
    Attribution a;
    a.window_id = window_id;
    a.base = values.front();
    a.prediction = values.back();
    a.phi = shapley_from_values(values, g.size());
    a.feature_labels = g.labels;
    return a;
}

inline Attribution shap_values(const ScalarModel& model, std::size_t window_id, std::span<const double> window,
                               std::span<const double> background, const FeatureGrouping& g) {
    return attribution_from_values(window_id, coalition_values(model, window, background, g), g);
}

inline Attribution shap_values(const forecaster::ForecastModel<double>& model, OutputScale scale,
                               std::size_t window_id, std::span<const double> window,
                               std::span<const double> background, const FeatureGrouping& g) {
    return attribution_from_values(window_id, coalition_values(model, scale, window, background, g), g);
}

/// Sum of contributions, i.e. prediction - base.
inline double window_shap_scalar(const Attribution& a) {
    double s = 0.0;
    for (double p : a.phi) s += p;
    return s;
}

/// Mean input over the given windows (the masking background).
template <typename Windows>
std::vector<double> mean_input(const Windows& windows) {
    if (std::empty(windows)) throw Error(ErrorCode::TooFewWindows, "no windows for the background");
    std::vector<double> bg(std::begin(windows)->input.size(), 0.0);
    std::size_t n = 0;
    for (const auto& w : windows) {
        for (std::size_t i = 0; i < bg.size(); ++i) bg[i] += w.input[i];
        ++n;
    }
    for (auto& x : bg) x /= static_cast<double>(n);
    return bg;
}

} // namespace timetuner::explainer
