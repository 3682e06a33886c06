#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "timetuner/error.hpp"
#include "timetuner/random.hpp"

namespace timetuner::forecaster {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
/// Parameter storage. Fixed alignment keeps vectorized reductions over the
/// mapped tensors in the same order on every run.
template <typename T>
using ParamVector = std::vector<T, Eigen::aligned_allocator<T>>;

struct ModelConfig {
    int conv_filters = 32;
    int conv_kernel = 3;
    int lstm_units = 50;
    int dense_units = 32;
    int horizon = 1;
    double learning_rate = 1e-3;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 0;

    void validate(std::size_t window, std::size_t variables) const {
        if (conv_filters < 1 || conv_kernel < 1 || lstm_units < 1 || dense_units < 1 || horizon < 1)
            throw Error(ErrorCode::InvalidConfig, "layer sizes must be >= 1");
        if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
        if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
        if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
        if (variables < 1) throw Error(ErrorCode::ShapeMismatch, "input needs at least one variable");
        if (static_cast<std::size_t>(conv_kernel) > window)
            throw Error(ErrorCode::ShapeMismatch, "conv kernel longer than the input window");
    }
};

/// Named slice of the flat parameter vector. Matrices are column-major.
struct TensorInfo {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// Parameter layout of conv -> LSTM -> dense -> output. Shared by the model
/// and by gradient buffers.
struct Layout {
    std::size_t window = 0;    // W
    std::size_t variables = 0; // k
    std::size_t filters = 0, kernel = 0, units = 0, dense = 0, horizon = 0;
    std::vector<TensorInfo> tensors;
    std::size_t total = 0;

    Layout() = default;
    Layout(const ModelConfig& cfg, std::size_t w, std::size_t k)
        : window(w), variables(k), filters(static_cast<std::size_t>(cfg.conv_filters)),
          kernel(static_cast<std::size_t>(cfg.conv_kernel)), units(static_cast<std::size_t>(cfg.lstm_units)),
          dense(static_cast<std::size_t>(cfg.dense_units)), horizon(static_cast<std::size_t>(cfg.horizon)) {
        add("conv.kernel", {filters, kernel * variables});
        add("conv.bias", {filters});
        add("lstm.input_kernel", {4 * units, filters});
        add("lstm.recurrent_kernel", {4 * units, units});
        add("lstm.bias", {4 * units});
        add("dense.kernel", {dense, units});
        add("dense.bias", {dense});
        add("output.kernel", {horizon, dense});
        add("output.bias", {horizon});
    }

    /// Sequence length seen by the LSTM (valid convolution).
    std::size_t steps() const { return window - kernel + 1; }

    enum Slot { ConvW, ConvB, LstmW, LstmU, LstmB, DenseW, DenseB, OutW, OutB };

    const TensorInfo& at(Slot s) const { return tensors[static_cast<std::size_t>(s)]; }

private:
    void add(std::string name, std::vector<std::size_t> shape) {
        std::size_t size = 1;
        for (auto d : shape) size *= d;
        tensors.push_back({std::move(name), std::move(shape), total, size});
        total += size;
    }
};

/// Views of the layer tensors over any flat buffer with the model's layout.
template <typename T, typename Ptr = T*>
struct LayerViews {
    using M = std::conditional_t<std::is_const_v<std::remove_pointer_t<Ptr>>, Eigen::Map<const Mat<T>>,
                                 Eigen::Map<Mat<T>>>;
    using V = std::conditional_t<std::is_const_v<std::remove_pointer_t<Ptr>>, Eigen::Map<const Vec<T>>,
                                 Eigen::Map<Vec<T>>>;

    M conv_w, lstm_w, lstm_u, dense_w, out_w;
    V conv_b, lstm_b, dense_b, out_b;

    LayerViews(const Layout& l, Ptr base)
        : conv_w(mat(l, base, Layout::ConvW)), lstm_w(mat(l, base, Layout::LstmW)),
          lstm_u(mat(l, base, Layout::LstmU)), dense_w(mat(l, base, Layout::DenseW)),
          out_w(mat(l, base, Layout::OutW)), conv_b(vec(l, base, Layout::ConvB)),
          lstm_b(vec(l, base, Layout::LstmB)), dense_b(vec(l, base, Layout::DenseB)),
          out_b(vec(l, base, Layout::OutB)) {}

private:
    static M mat(const Layout& l, Ptr base, Layout::Slot s) {
        const auto& t = l.at(s);
        return M(base + t.offset, static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1]));
    }
    static V vec(const Layout& l, Ptr base, Layout::Slot s) {
        const auto& t = l.at(s);
        return V(base + t.offset, static_cast<Eigen::Index>(t.shape[0]));
    }
};

template <typename T>
class ForecastModel {
public:
    ForecastModel() = default;
    ForecastModel(const ModelConfig& cfg, std::size_t window, std::size_t variables)
        : config_(cfg), layout_(cfg, window, variables), params_(layout_.total, T(0)) {}

    const ModelConfig& config() const { return config_; }
    const Layout& layout() const { return layout_; }
    std::size_t window() const { return layout_.window; }
    std::size_t variables() const { return layout_.variables; }
    std::size_t horizon() const { return layout_.horizon; }
    std::size_t parameter_count() const { return params_.size(); }

    ParamVector<T>& parameters() { return params_; }
    const ParamVector<T>& parameters() const { return params_; }

    LayerViews<T, T*> views() { return {layout_, params_.data()}; }
    LayerViews<T, const T*> views() const { return {layout_, params_.data()}; }

    template <typename U>
    ForecastModel<U> cast() const {
        ForecastModel<U> out(config_, layout_.window, layout_.variables);
        for (std::size_t i = 0; i < params_.size(); ++i) out.parameters()[i] = static_cast<U>(params_[i]);
        return out;
    }

    /// Order-sensitive FNV-1a over the parameter bytes.
    std::uint64_t checksum() const {
        std::uint64_t h = 1469598103934665603ULL;
        const auto* bytes = reinterpret_cast<const unsigned char*>(params_.data());
        for (std::size_t i = 0; i < params_.size() * sizeof(T); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
        return h;
    }

    bool all_finite() const {
        for (const auto& p : params_)
            if (!std::isfinite(static_cast<double>(p))) return false;
        return true;
    }

private:
    ModelConfig config_;
    Layout layout_;
    ParamVector<T> params_;
};

/// Glorot-uniform weights, zero biases, forget-gate bias 1. Fully determined
/// by `cfg.seed`.
template <typename T = double>
ForecastModel<T> init_model(const ModelConfig& cfg, std::size_t window, std::size_t variables) {
    cfg.validate(window, variables);
    ForecastModel<T> model(cfg, window, variables);
    Rng rng(cfg.seed);
    auto& p = model.parameters();
    const auto& l = model.layout();
    auto glorot = [&](Layout::Slot s, std::size_t fan_in, std::size_t fan_out) {
        const auto& t = l.at(s);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < t.size; ++i) p[t.offset + i] = static_cast<T>(rng.uniform(-limit, limit));
    };
    glorot(Layout::ConvW, l.kernel * l.variables, l.filters);
    glorot(Layout::LstmW, l.filters, 4 * l.units);
    glorot(Layout::LstmU, l.units, 4 * l.units);
    glorot(Layout::DenseW, l.units, l.dense);
    glorot(Layout::OutW, l.dense, l.horizon);
    const auto& b = l.at(Layout::LstmB);
    for (std::size_t i = 0; i < l.units; ++i) p[b.offset + l.units + i] = T(1);
    return model;
}

} // namespace timetuner::forecaster
