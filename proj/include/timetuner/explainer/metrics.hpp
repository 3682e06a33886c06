#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "timetuner/error.hpp"
#include "timetuner/explainer/shapley.hpp"
#include "timetuner/stats/stats.hpp"

namespace timetuner::explainer {

/// Payload of one window in the stripes and the scatterplot.
struct WindowMetrics {
    std::size_t window_id = 0;
    double rmse = 0.0;
    std::optional<double> corr; // absent when either horizon vector is constant
    double shap_scalar = 0.0;
};

/// Pearson correlation of prediction and ground truth over the horizon;
/// nullopt for degenerate (constant) inputs.
inline std::optional<double> window_correlation(std::span<const double> prediction, std::span<const double> actual) {
    if (prediction.size() != actual.size()) throw Error(ErrorCode::LengthMismatch, "prediction vs actual");
    if (prediction.size() < 2) return std::nullopt;
    try {
        return stats::pearson(prediction, actual);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroVariance) return std::nullopt;
        throw;
    }
}

struct VariableImportance {
    std::string variable_id;
    double importance = 0.0;
};

/// Mean |phi| per variable over all attributions, descending; ties broken by
/// variable id. Attributions must use one feature per variable, labelled by id.
inline std::vector<VariableImportance> variable_importance(std::span<const Attribution> attributions,
                                                           std::span<const std::string> variable_ids) {
    if (variable_ids.size() < 2)
        throw Error(ErrorCode::Univariate, "variable importance needs more than one variable");
    if (attributions.empty()) throw Error(ErrorCode::TooFewWindows, "no attributions");
    std::vector<VariableImportance> out;
    for (const auto& id : variable_ids) out.push_back({id, 0.0});
    for (const auto& a : attributions) {
        if (a.phi.size() != variable_ids.size())
            throw Error(ErrorCode::ShapeMismatch, "attribution does not have one feature per variable");
        for (std::size_t j = 0; j < a.phi.size(); ++j) {
            const auto it = std::find(variable_ids.begin(), variable_ids.end(), a.feature_labels.at(j));
            if (it == variable_ids.end())
                throw Error(ErrorCode::ShapeMismatch, "unknown feature label '" + a.feature_labels[j] + "'");
            out[static_cast<std::size_t>(it - variable_ids.begin())].importance += std::abs(a.phi[j]);
        }
    }
    for (auto& v : out) v.importance /= static_cast<double>(attributions.size());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.variable_id < b.variable_id;
    });
    return out;
}

} // namespace timetuner::explainer
