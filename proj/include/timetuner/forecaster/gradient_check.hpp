#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "timetuner/core/windows.hpp"
#include "timetuner/forecaster/network.hpp"

namespace timetuner::forecaster {

template <typename T>
T window_loss(const ForecastModel<T>& model, const core::SlidingWindow& window) {
    const double* ptr = window.input.data();
    const Mat<T> y = forward_batch(model, std::span<const double* const>(&ptr, 1));
    Mat<T> target(y.rows(), 1);
    for (Eigen::Index j = 0; j < y.rows(); ++j) target(j, 0) = static_cast<T>(window.target[static_cast<std::size_t>(j)]);
    return mse_loss<T>(y, target, nullptr);
}

template <typename T>
ParamVector<T> analytic_gradient(const ForecastModel<T>& model, const core::SlidingWindow& window) {
    const double* ptr = window.input.data();
    ForwardCache<T> cache;
    const Mat<T> y = forward_batch(model, std::span<const double* const>(&ptr, 1), &cache);
    Mat<T> target(y.rows(), 1);
    for (Eigen::Index j = 0; j < y.rows(); ++j) target(j, 0) = static_cast<T>(window.target[static_cast<std::size_t>(j)]);
    Mat<T> d_out;
    mse_loss<T>(y, target, &d_out);
    ParamVector<T> grad(model.parameter_count(), T(0));
    backward_batch(model, cache, d_out, grad);
    return grad;
}

/// Central differences (L(p + e) - L(p - e)) / 2e for every parameter.
template <typename T>
std::vector<T> numeric_gradient(ForecastModel<T> model, const core::SlidingWindow& window, T epsilon) {
    std::vector<T> grad(model.parameter_count());
    auto& p = model.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const T saved = p[i];
        p[i] = saved + epsilon;
        const T up = window_loss(model, window);
        p[i] = saved - epsilon;
        const T down = window_loss(model, window);
        p[i] = saved;
        grad[i] = (up - down) / (T(2) * epsilon);
    }
    return grad;
}

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    std::vector<double> analytic;
    std::vector<double> numeric;
};

/// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero components
/// from dominating through rounding noise.
inline double relative_error(double a, double n, double floor = 1e-7) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

/// Compares backpropagated gradients with central differences, evaluated in
/// extended precision.
template <typename T = long double>
GradientCheckReport gradient_check(const ForecastModel<double>& model, const core::SlidingWindow& window,
                                   double epsilon = 1e-5) {
    const auto wide = model.cast<T>();
    const auto a = analytic_gradient(wide, window);
    const auto n = numeric_gradient(wide, window, static_cast<T>(epsilon));
    GradientCheckReport r;
    r.analytic.assign(a.begin(), a.end());
    r.numeric.assign(n.begin(), n.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = relative_error(r.analytic[i], r.numeric[i]);
        if (e > r.max_relative_error) {
            r.max_relative_error = e;
            r.worst_index = i;
        }
    }
    return r;
}

} // namespace timetuner::forecaster
