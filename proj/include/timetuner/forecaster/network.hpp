#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "timetuner/error.hpp"
#include "timetuner/forecaster/model.hpp"

namespace timetuner::forecaster {

namespace detail {

// Array forms let Eigen vectorize exp; tanh is expressed through the
// logistic function, tanh(x) = 2 sigmoid(2x) - 1.
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
    using T = typename Derived::Scalar;
    return T(1) / (T(1) + (-x).exp());
}

template <typename Derived>
auto tanh(const Eigen::ArrayBase<Derived>& x) {
    using T = typename Derived::Scalar;
    return T(2) / (T(1) + (T(-2) * x).exp()) - T(1);
}

} // namespace detail

/// Patch matrix for conv position t: column b holds input rows t..t+K-1 of
/// sample b, flattened time-major (K*k values).
template <typename T>
Mat<T> conv_patches(const Layout& l, std::span<const double* const> inputs, std::size_t t) {
    const auto rows = static_cast<Eigen::Index>(l.kernel * l.variables);
    Mat<T> p(rows, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const double* src = inputs[b] + t * l.variables;
        for (Eigen::Index r = 0; r < rows; ++r) p(r, static_cast<Eigen::Index>(b)) = static_cast<T>(src[r]);
    }
    return p;
}

/// ReLU(conv_w * patches + conv_b).
template <typename T, typename Views>
Mat<T> conv_step(const Views& v, const Mat<T>& patches) {
    Mat<T> z = v.conv_w * patches;
    z.colwise() += v.conv_b;
    return z.cwiseMax(T(0));
}

/// One LSTM step on a batch of columns (gate order i, f, g, o). Updates h and
/// c in place; `gates` receives the post-activation gate values when given.
template <typename T, typename Views>
void lstm_step(const Views& v, std::size_t units, const Mat<T>& z, Mat<T>& h, Mat<T>& c, Mat<T>* gates = nullptr) {
    const auto H = static_cast<Eigen::Index>(units);
    Mat<T> a = v.lstm_w * z;
    a.noalias() += v.lstm_u * h;
    a.colwise() += v.lstm_b;
    a.topRows(2 * H).array() = detail::sigmoid(a.topRows(2 * H).array());
    a.middleRows(2 * H, H).array() = detail::tanh(a.middleRows(2 * H, H).array());
    a.bottomRows(H).array() = detail::sigmoid(a.bottomRows(H).array());
    c = a.middleRows(H, H).cwiseProduct(c) + a.topRows(H).cwiseProduct(a.middleRows(2 * H, H));
    h.array() = a.bottomRows(H).array() * detail::tanh(c.array());
    if (gates) *gates = std::move(a);
}

/// ReLU dense layer followed by the linear output layer.
template <typename T, typename Views>
Mat<T> head(const Views& v, const Mat<T>& h, Mat<T>* dense_out = nullptr) {
    Mat<T> d = v.dense_w * h;
    d.colwise() += v.dense_b;
    d = d.cwiseMax(T(0));
    Mat<T> y = v.out_w * d;
    y.colwise() += v.out_b;
    if (dense_out) *dense_out = std::move(d);
    return y;
}

/// Activations retained by a training forward pass.
template <typename T>
struct ForwardCache {
    std::vector<Mat<T>> patches; // per step: (K*k) x B
    std::vector<Mat<T>> conv;    // per step: filters x B
    std::vector<Mat<T>> gates;   // per step: 4H x B
    std::vector<Mat<T>> cell;    // per step: H x B
    std::vector<Mat<T>> hidden;  // per step: H x B
    Mat<T> dense;                // D x B
    Mat<T> output;               // dT x B
};

template <typename T>
void check_inputs(const ForecastModel<T>& model, std::span<const double* const> inputs) {
    if (inputs.empty()) throw Error(ErrorCode::ShapeMismatch, "empty batch");
    for (const double* p : inputs)
        if (!p) throw Error(ErrorCode::ShapeMismatch, "null input");
    (void)model;
}

template <typename T>
void check_finite(const Mat<T>& y) {
    if (!y.allFinite()) throw Error(ErrorCode::NonFiniteActivation, "non-finite network output");
}

/// Batched forward pass. Each input points at W*k time-major values.
template <typename T>
Mat<T> forward_batch(const ForecastModel<T>& model, std::span<const double* const> inputs,
                     ForwardCache<T>* cache = nullptr) {
    check_inputs(model, inputs);
    const auto& l = model.layout();
    const auto v = model.views();
    const auto B = static_cast<Eigen::Index>(inputs.size());
    const auto H = static_cast<Eigen::Index>(l.units);
    const std::size_t L = l.steps();
    Mat<T> h = Mat<T>::Zero(H, B);
    Mat<T> c = Mat<T>::Zero(H, B);
    if (cache) {
        cache->patches.resize(L);
        cache->conv.resize(L);
        cache->gates.resize(L);
        cache->cell.resize(L);
        cache->hidden.resize(L);
    }
    for (std::size_t t = 0; t < L; ++t) {
        Mat<T> p = conv_patches<T>(l, inputs, t);
        Mat<T> z = conv_step<T>(v, p);
        if (cache) {
            lstm_step<T>(v, l.units, z, h, c, &cache->gates[t]);
            cache->patches[t] = std::move(p);
            cache->conv[t] = std::move(z);
            cache->cell[t] = c;
            cache->hidden[t] = h;
        } else {
            lstm_step<T>(v, l.units, z, h, c);
        }
    }
    Mat<T> y = head<T>(v, h, cache ? &cache->dense : nullptr);
    check_finite(y);
    if (cache) cache->output = y;
    return y;
}

/// Single-window forward pass; `input` is W x k time-major.
template <typename T>
std::vector<T> forward(const ForecastModel<T>& model, std::span<const double> input) {
    if (input.size() != model.window() * model.variables())
        throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(input.size()) + " values, model expects " +
                                                  std::to_string(model.window() * model.variables()));
    const double* ptr = input.data();
    const Mat<T> y = forward_batch(model, std::span<const double* const>(&ptr, 1));
    return std::vector<T>(y.data(), y.data() + y.size());
}

/// Backpropagation through the full window. `d_output` is dLoss/dy (dT x B);
/// gradients are accumulated into `grad` (same layout as the parameters).
template <typename T>
void backward_batch(const ForecastModel<T>& model, const ForwardCache<T>& cache, const Mat<T>& d_output,
                    ParamVector<T>& grad) {
    const auto& l = model.layout();
    const auto v = model.views();
    grad.resize(l.total, T(0));
    LayerViews<T, T*> g(l, grad.data());
    const auto H = static_cast<Eigen::Index>(l.units);
    const auto B = d_output.cols();
    const std::size_t L = l.steps();

    const Mat<T>& h_last = cache.hidden[L - 1];
    g.out_w.noalias() += d_output * cache.dense.transpose();
    g.out_b += d_output.rowwise().sum();
    Mat<T> d_dense = (v.out_w.transpose() * d_output).cwiseProduct(
        cache.dense.unaryExpr([](T x) { return x > T(0) ? T(1) : T(0); }));
    g.dense_w.noalias() += d_dense * h_last.transpose();
    g.dense_b += d_dense.rowwise().sum();
    Mat<T> dh = v.dense_w.transpose() * d_dense;
    Mat<T> dc = Mat<T>::Zero(H, B);
    const Mat<T> zero = Mat<T>::Zero(H, B);

    Mat<T> da(4 * H, B);
    for (std::size_t step = L; step-- > 0;) {
        const Mat<T>& gates = cache.gates[step];
        const auto i = gates.topRows(H);
        const auto f = gates.middleRows(H, H);
        const auto gg = gates.middleRows(2 * H, H);
        const auto o = gates.bottomRows(H);
        const Mat<T>& c_prev = step > 0 ? cache.cell[step - 1] : zero;
        const Mat<T>& h_prev = step > 0 ? cache.hidden[step - 1] : zero;
        const Mat<T> tanh_c = detail::tanh(cache.cell[step].array()).matrix();

        dc += dh.cwiseProduct(o).cwiseProduct((T(1) - tanh_c.array().square()).matrix());
        const Mat<T> d_o = dh.cwiseProduct(tanh_c);
        da.topRows(H) = dc.cwiseProduct(gg).cwiseProduct(i.cwiseProduct((T(1) - i.array()).matrix()));
        da.middleRows(H, H) = dc.cwiseProduct(c_prev).cwiseProduct(f.cwiseProduct((T(1) - f.array()).matrix()));
        da.middleRows(2 * H, H) = dc.cwiseProduct(i).cwiseProduct((T(1) - gg.array().square()).matrix());
        da.bottomRows(H) = d_o.cwiseProduct(o.cwiseProduct((T(1) - o.array()).matrix()));
        dc = dc.cwiseProduct(f).eval();

        g.lstm_w.noalias() += da * cache.conv[step].transpose();
        g.lstm_u.noalias() += da * h_prev.transpose();
        g.lstm_b += da.rowwise().sum();
        dh.noalias() = v.lstm_u.transpose() * da;

        Mat<T> dz = (v.lstm_w.transpose() * da)
                        .cwiseProduct(cache.conv[step].unaryExpr([](T x) { return x > T(0) ? T(1) : T(0); }));
        g.conv_w.noalias() += dz * cache.patches[step].transpose();
        g.conv_b += dz.rowwise().sum();
    }
}

/// Mean squared error over the batch and horizon, with its gradient.
template <typename T>
T mse_loss(const Mat<T>& y, const Mat<T>& target, Mat<T>* d_output) {
    const Mat<T> diff = y - target;
    const T n = static_cast<T>(diff.size());
    if (d_output) *d_output = diff * (T(2) / n);
    return diff.squaredNorm() / n;
}

} // namespace timetuner::forecaster
