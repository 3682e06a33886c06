#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "timetuner/core/windows.hpp"
#include "timetuner/error.hpp"
#include "timetuner/forecaster/model.hpp"
#include "timetuner/forecaster/network.hpp"
#include "timetuner/random.hpp"

namespace timetuner::forecaster {

struct TrainingResult {
    std::vector<double> epoch_losses;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
    std::chrono::duration<double> wall_time{0};
};

/// Adam with bias correction over a flat parameter vector.
template <typename T>
class Adam {
public:
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, T(0)), v_(n, T(0)) {}

    void step(ParamVector<T>& params, const ParamVector<T>& grad) {
        ++t_;
        const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
        const T c1 = T(1) - static_cast<T>(std::pow(beta1_, t_));
        const T c2 = T(1) - static_cast<T>(std::pow(beta2_, t_));
        const T lr = static_cast<T>(lr_), eps = static_cast<T>(eps_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (T(1) - b1) * grad[i];
            v_[i] = b2 * v_[i] + (T(1) - b2) * grad[i] * grad[i];
            params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }

    long steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<T> m_, v_;
    long t_ = 0;
};

namespace detail {

inline std::vector<const double*> input_ptrs(std::span<const core::SlidingWindow> windows,
                                             std::span<const std::size_t> idx) {
    std::vector<const double*> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(windows[i].input.data());
    return out;
}

template <typename T>
Mat<T> target_matrix(std::span<const core::SlidingWindow> windows, std::span<const std::size_t> idx,
                     std::size_t horizon) {
    Mat<T> y(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto& tgt = windows[idx[b]].target;
        if (tgt.size() != horizon) throw Error(ErrorCode::ShapeMismatch, "target length differs from model horizon");
        for (std::size_t j = 0; j < horizon; ++j)
            y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = static_cast<T>(tgt[j]);
    }
    return y;
}

template <typename T>
void check_compatible(const ForecastModel<T>& model, std::span<const core::SlidingWindow> windows) {
    for (const auto& w : windows)
        if (w.steps != model.window() || w.variables != model.variables() ||
            w.input.size() != model.window() * model.variables())
            throw Error(ErrorCode::ShapeMismatch, "window " + std::to_string(w.index) + " does not match model input");
}

} // namespace detail

/// Predicts every window, in batches; returns a (dT x N) matrix.
template <typename T>
Mat<T> predict_matrix(const ForecastModel<T>& model, std::span<const core::SlidingWindow> windows,
                      std::size_t batch = 64) {
    detail::check_compatible(model, windows);
    Mat<T> out(static_cast<Eigen::Index>(model.horizon()), static_cast<Eigen::Index>(windows.size()));
    std::vector<std::size_t> idx;
    for (std::size_t s = 0; s < windows.size(); s += batch) {
        idx.clear();
        for (std::size_t i = s; i < std::min(windows.size(), s + batch); ++i) idx.push_back(i);
        const auto ptrs = detail::input_ptrs(windows, idx);
        out.middleCols(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(idx.size())) =
            forward_batch(model, std::span<const double* const>(ptrs));
    }
    return out;
}

/// RMSE over all horizon steps of all windows.
template <typename T>
double dataset_rmse(const ForecastModel<T>& model, std::span<const core::SlidingWindow> windows) {
    if (windows.empty()) return 0.0;
    const Mat<T> y = predict_matrix(model, windows);
    double s = 0.0;
    for (std::size_t b = 0; b < windows.size(); ++b)
        for (std::size_t j = 0; j < model.horizon(); ++j) {
            const double d = static_cast<double>(y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b))) -
                             windows[b].target[j];
            s += d * d;
        }
    return std::sqrt(s / static_cast<double>(windows.size() * model.horizon()));
}

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Mini-batch Adam on the horizon MSE. Sample order is reshuffled every
/// epoch by a generator seeded from `cfg.seed`. Returns the trained copy.
template <typename T>
std::pair<ForecastModel<T>, TrainingResult> train(ForecastModel<T> model, std::span<const core::SlidingWindow> train_set,
                                                  std::span<const core::SlidingWindow> val_set, const ModelConfig& cfg,
                                                  const EpochCallback& on_epoch = {}) {
    if (cfg.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (cfg.batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
    if (train_set.empty()) throw Error(ErrorCode::TooFewWindows, "empty training partition");
    detail::check_compatible(model, train_set);
    detail::check_compatible(model, val_set);

    const auto start = std::chrono::steady_clock::now();
    TrainingResult result;
    Adam<T> opt(model.parameter_count(), cfg.learning_rate);
    Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    ParamVector<T> grad(model.parameter_count());
    ForwardCache<T> cache;
    Mat<T> d_output;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = rng.permutation(train_set.size());
        double loss_sum = 0.0;
        for (std::size_t s = 0; s < order.size(); s += batch) {
            const std::span<const std::size_t> idx(order.data() + s, std::min(batch, order.size() - s));
            const auto ptrs = detail::input_ptrs(train_set, idx);
            const Mat<T> y = forward_batch(model, std::span<const double* const>(ptrs), &cache);
            const Mat<T> target = detail::target_matrix<T>(train_set, idx, model.horizon());
            const T loss = mse_loss(y, target, &d_output);
            if (!std::isfinite(static_cast<double>(loss)))
                throw Error(ErrorCode::DivergedLoss, "loss became non-finite in epoch " + std::to_string(epoch));
            loss_sum += static_cast<double>(loss) * static_cast<double>(idx.size());
            std::fill(grad.begin(), grad.end(), T(0));
            backward_batch(model, cache, d_output, grad);
            opt.step(model.parameters(), grad);
        }
        const double epoch_loss = loss_sum / static_cast<double>(train_set.size());
        if (!std::isfinite(epoch_loss) || !model.all_finite())
            throw Error(ErrorCode::DivergedLoss, "training diverged in epoch " + std::to_string(epoch));
        result.epoch_losses.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss);
    }
    result.train_rmse = dataset_rmse(model, train_set);
    result.val_rmse = dataset_rmse(model, val_set);
    result.wall_time = std::chrono::steady_clock::now() - start;
    return {std::move(model), std::move(result)};
}

struct Prediction {
    std::size_t window_index = 0;
    std::vector<double> values; // dT
    double rmse = 0.0;
};

/// Any callable mapping a W*k time-major input to dT outputs.
using Predictor = std::function<std::vector<double>(std::span<const double>)>;

inline std::vector<Prediction> predict_all(const Predictor& predictor, std::span<const core::SlidingWindow> windows) {
    std::vector<Prediction> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        Prediction p{w.index, predictor(w.input), 0.0};
        if (p.values.size() != w.target.size()) throw Error(ErrorCode::ShapeMismatch, "prediction length mismatch");
        double s = 0.0;
        for (std::size_t j = 0; j < p.values.size(); ++j) s += (p.values[j] - w.target[j]) * (p.values[j] - w.target[j]);
        p.rmse = std::sqrt(s / static_cast<double>(p.values.size()));
        out.push_back(std::move(p));
    }
    return out;
}

template <typename T>
std::vector<Prediction> predict_all(const ForecastModel<T>& model, std::span<const core::SlidingWindow> windows) {
    const Mat<T> y = predict_matrix(model, windows);
    std::vector<Prediction> out;
    out.reserve(windows.size());
    for (std::size_t b = 0; b < windows.size(); ++b) {
        Prediction p{windows[b].index, std::vector<double>(model.horizon()), 0.0};
        double s = 0.0;
        for (std::size_t j = 0; j < model.horizon(); ++j) {
            p.values[j] = static_cast<double>(y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)));
            const double d = p.values[j] - windows[b].target[j];
            s += d * d;
        }
        p.rmse = std::sqrt(s / static_cast<double>(model.horizon()));
        out.push_back(std::move(p));
    }
    return out;
}

/// Representation-level RMSE over the concatenated per-step errors.
inline double representation_rmse(std::span<const Prediction> predictions,
                                  std::span<const core::SlidingWindow> windows) {
    if (predictions.size() != windows.size()) throw Error(ErrorCode::LengthMismatch, "predictions vs windows");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        for (std::size_t j = 0; j < predictions[i].values.size(); ++j) {
            const double d = predictions[i].values[j] - windows[i].target[j];
            s += d * d;
            ++n;
        }
    if (n == 0) throw Error(ErrorCode::TooFewWindows, "no predictions");
    return std::sqrt(s / static_cast<double>(n));
}

} // namespace timetuner::forecaster
