#pragma once

#include <optional>
#include <string>
#include <vector>

#include "timetuner/core/representation.hpp"
#include "timetuner/error.hpp"
#include "timetuner/explainer/metrics.hpp"
#include "timetuner/forecaster/model.hpp"
#include "timetuner/stats/stats.hpp"
#include "timetuner/store/binary_io.hpp"
#include "timetuner/visprep/vsup.hpp"

namespace timetuner::store {

inline constexpr const char* format_version = "timetuner-run/1";

struct VariableInfo {
    std::string id;
    std::string display_name;
    std::optional<std::string> unit;
};

struct DatasetInfo {
    std::string name;
    std::string frequency;
    std::string target;
    std::vector<VariableInfo> variables;
    std::vector<std::string> time_labels;

    std::size_t target_index() const {
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (variables[i].id == target) return i;
        throw Error(ErrorCode::UnknownTarget, target);
    }
    std::vector<std::string> variable_ids() const {
        std::vector<std::string> out;
        for (const auto& v : variables) out.push_back(v.id);
        return out;
    }
};

/// One smoothing of every variable (k x T'), in original units.
struct SeriesEntry {
    core::SmoothingSpec smoothing;
    std::vector<std::vector<double>> values;

    std::size_t length() const { return values.empty() ? 0 : values.front().size(); }
};

struct WindowRecord {
    std::size_t window = 0;
    std::size_t start = 0;
    double rmse = 0.0;
    std::optional<double> corr;
    double shap = 0.0;
};

struct RepresentationRecord {
    std::string id;
    core::SmoothingSpec smoothing;
    std::size_t skip = 1;
    std::string status = "ok"; // "ok" | "failed"
    std::string error;

    std::size_t n_windows = 0;
    std::size_t n_train = 0;
    double train_error = 0.0; // RMSE in target units
    double val_error = 0.0;
    double train_rmse_normalized = 0.0;
    double val_rmse_normalized = 0.0;
    std::vector<double> epoch_losses;
    std::optional<stats::AcfSummary> acf;
    std::optional<stats::AdfResult> adf;
    std::vector<double> scaler_min;
    std::vector<double> scaler_max;

    double shap_base = 0.0;
    std::vector<std::string> feature_labels;
    std::vector<explainer::VariableImportance> importance;
    std::vector<WindowRecord> windows;
    Array predictions;  // N_w x dT, target units
    Array attributions; // N_w x F

    std::vector<double> model_parameters;

    bool ok() const { return status == "ok"; }

    /// Directory name: the id with '/' replaced by '_'.
    std::string dir() const {
        std::string d = id;
        for (auto& c : d)
            if (c == '/') c = '_';
        return d;
    }
};

struct RunStore {
    DatasetInfo dataset;
    core::TransformConfig transform;
    forecaster::ModelConfig model;
    std::size_t shap_segments = 12;
    std::vector<SeriesEntry> series;
    std::vector<RepresentationRecord> representations;
    std::optional<visprep::VSUPScheme> vsup_corr;
    std::optional<visprep::VSUPScheme> vsup_shap;
    std::vector<explainer::VariableImportance> importance;

    bool multivariate() const { return dataset.variables.size() > 1; }

    const RepresentationRecord* find(const std::string& id) const {
        for (const auto& r : representations)
            if (r.id == id) return &r;
        return nullptr;
    }

    const SeriesEntry* find_series(const std::string& label) const {
        for (const auto& s : series)
            if (s.smoothing.label() == label) return &s;
        return nullptr;
    }
};

// ---- JSON conversions -------------------------------------------------------

inline json to_json(const core::TransformConfig& c) {
    json sm = json::array();
    for (const auto& s : c.smoothing) sm.push_back(s.label());
    return {{"smoothing", sm},
            {"skips", c.skips},
            {"window_length", c.window_length},
            {"horizon", c.horizon},
            {"split_ratio", c.split_ratio}};
}

inline core::TransformConfig transform_from_json(const json& j) {
    core::TransformConfig c;
    c.smoothing.clear();
    for (const auto& s : j.at("smoothing")) c.smoothing.push_back(core::parse_smoothing(s.get<std::string>()));
    c.skips = j.at("skips").get<std::vector<std::size_t>>();
    c.window_length = j.at("window_length").get<std::size_t>();
    c.horizon = j.at("horizon").get<std::size_t>();
    c.split_ratio = j.at("split_ratio").get<double>();
    return c;
}

inline json to_json(const forecaster::ModelConfig& c) {
    return {{"conv_filters", c.conv_filters}, {"conv_kernel", c.conv_kernel}, {"lstm_units", c.lstm_units},
            {"dense_units", c.dense_units},   {"horizon", c.horizon},         {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},             {"batch_size", c.batch_size},   {"seed", c.seed}};
}

inline forecaster::ModelConfig model_config_from_json(const json& j) {
    forecaster::ModelConfig c;
    c.conv_filters = j.at("conv_filters").get<int>();
    c.conv_kernel = j.at("conv_kernel").get<int>();
    c.lstm_units = j.at("lstm_units").get<int>();
    c.dense_units = j.at("dense_units").get<int>();
    c.horizon = j.at("horizon").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json to_json(const visprep::VSUPScheme& s) {
    json cells = json::array();
    for (int id = 0; id < visprep::VSUPScheme::cell_count; ++id) {
        const auto c = visprep::describe_cell(id, s);
        cells.push_back({{"id", c.id},
                         {"level", c.level},
                         {"value_bin", c.value_bin},
                         {"value_range", {c.value_lo, c.value_hi}},
                         {"error_range", {c.error_lo, c.error_hi}}});
    }
    return {{"metric", s.metric == visprep::ValueMetric::Corr ? "corr" : "shap"},
            {"dim1_edges", s.dim1_edges},
            {"dim2_edges", s.dim2_edges},
            {"tree", visprep::VSUPScheme::level_bins},
            {"cells", cells},
            {"warnings", s.warnings}};
}

inline visprep::VSUPScheme vsup_from_json(const json& j) {
    visprep::VSUPScheme s;
    s.metric = j.at("metric").get<std::string>() == "corr" ? visprep::ValueMetric::Corr : visprep::ValueMetric::Shap;
    s.dim1_edges = j.at("dim1_edges").get<std::array<double, 9>>();
    s.dim2_edges = j.at("dim2_edges").get<std::array<double, 5>>();
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

inline json importance_json(const std::vector<explainer::VariableImportance>& imp) {
    json out = json::array();
    for (const auto& v : imp) out.push_back({{"variable", v.variable_id}, {"importance", v.importance}});
    return out;
}

inline std::vector<explainer::VariableImportance> importance_from_json(const json& j) {
    std::vector<explainer::VariableImportance> out;
    for (const auto& e : j) out.push_back({e.at("variable").get<std::string>(), e.at("importance").get<double>()});
    return out;
}

/// Profile-table row of a representation.
inline json profile_row(const RepresentationRecord& r) {
    json row = {{"id", r.id},
                {"smoothing", r.smoothing.label()},
                {"skip", r.skip},
                {"status", r.status}};
    if (!r.ok()) {
        row["error"] = r.error;
        return row;
    }
    row["n_windows"] = r.n_windows;
    row["n_train"] = r.n_train;
    row["n_test"] = r.n_windows - r.n_train;
    row["train_error"] = r.train_error;
    row["val_error"] = r.val_error;
    row["acf"] = r.acf ? json(r.acf->value) : json(nullptr);
    row["acf_lag"] = r.acf ? json(r.acf->lag) : json(nullptr);
    row["adf_statistic"] = r.adf ? json(r.adf->statistic) : json(nullptr);
    row["stationary"] = r.adf ? json(r.adf->stationary) : json(nullptr);
    return row;
}

inline json summary_json(const RepresentationRecord& r) {
    json j = profile_row(r);
    if (!r.ok()) return j;
    j["train_rmse_normalized"] = r.train_rmse_normalized;
    j["val_rmse_normalized"] = r.val_rmse_normalized;
    j["epoch_losses"] = r.epoch_losses;
    j["acf_max_lag"] = r.acf ? json(r.acf->max_lag) : json(nullptr);
    j["adf"] = r.adf ? json{{"statistic", r.adf->statistic},
                            {"lags_used", r.adf->lags_used},
                            {"stationary", r.adf->stationary},
                            {"critical_value_5pct", r.adf->critical_value_5pct}}
                     : json(nullptr);
    j["scaler"] = {{"min", r.scaler_min}, {"max", r.scaler_max}};
    j["shap_base"] = r.shap_base;
    j["feature_labels"] = r.feature_labels;
    j["importance"] = importance_json(r.importance);
    return j;
}

inline void apply_summary(RepresentationRecord& r, const json& j) {
    r.status = j.at("status").get<std::string>();
    if (!r.ok()) {
        r.error = j.at("error").get<std::string>();
        return;
    }
    r.n_windows = j.at("n_windows").get<std::size_t>();
    r.n_train = j.at("n_train").get<std::size_t>();
    r.train_error = j.at("train_error").get<double>();
    r.val_error = j.at("val_error").get<double>();
    r.train_rmse_normalized = j.at("train_rmse_normalized").get<double>();
    r.val_rmse_normalized = j.at("val_rmse_normalized").get<double>();
    r.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    if (!j.at("acf").is_null())
        r.acf = stats::AcfSummary{j.at("acf").get<double>(), j.at("acf_lag").get<std::size_t>(),
                                  j.at("acf_max_lag").get<std::size_t>()};
    if (!j.at("adf").is_null()) {
        const auto& a = j.at("adf");
        stats::AdfResult adf;
        adf.statistic = a.at("statistic").get<double>();
        adf.lags_used = a.at("lags_used").get<int>();
        adf.stationary = a.at("stationary").get<bool>();
        adf.critical_value_5pct = a.at("critical_value_5pct").get<double>();
        r.adf = adf;
    }
    r.scaler_min = j.at("scaler").at("min").get<std::vector<double>>();
    r.scaler_max = j.at("scaler").at("max").get<std::vector<double>>();
    r.shap_base = j.at("shap_base").get<double>();
    r.feature_labels = j.at("feature_labels").get<std::vector<std::string>>();
    r.importance = importance_from_json(j.at("importance"));
}

inline json windows_json(const RepresentationRecord& r) {
    json rows = json::array();
    for (const auto& w : r.windows)
        rows.push_back(
            {{"window", w.window}, {"start", w.start}, {"rmse", w.rmse}, {"corr", optional_json(w.corr)}, {"shap", w.shap}});
    return rows;
}

inline std::vector<WindowRecord> windows_from_json(const json& j) {
    std::vector<WindowRecord> out;
    for (const auto& e : j) {
        WindowRecord w;
        w.window = e.at("window").get<std::size_t>();
        w.start = e.at("start").get<std::size_t>();
        w.rmse = e.at("rmse").get<double>();
        if (!e.at("corr").is_null()) w.corr = e.at("corr").get<double>();
        w.shap = e.at("shap").get<double>();
        out.push_back(w);
    }
    return out;
}

} // namespace timetuner::store
