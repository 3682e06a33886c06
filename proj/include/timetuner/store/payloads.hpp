#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "timetuner/error.hpp"
#include "timetuner/store/run_store.hpp"
#include "timetuner/visprep/horizon.hpp"
#include "timetuner/visprep/layout.hpp"
#include "timetuner/visprep/mosaic.hpp"
#include "timetuner/visprep/sampling.hpp"
#include "timetuner/visprep/stripe.hpp"

namespace timetuner::store {

// JSON view payloads. Every function here is a pure function of the store,
// so a re-loaded store yields byte-identical responses.

inline json dataset_json(const DatasetInfo& d) {
    json vars = json::array();
    for (const auto& v : d.variables)
        vars.push_back({{"id", v.id}, {"display_name", v.display_name}, {"unit", optional_json(v.unit)}});
    return {{"name", d.name},
            {"frequency", d.frequency},
            {"target", d.target},
            {"length", d.time_labels.size()},
            {"first", d.time_labels.empty() ? json(nullptr) : json(d.time_labels.front())},
            {"last", d.time_labels.empty() ? json(nullptr) : json(d.time_labels.back())},
            {"variables", vars}};
}

inline json manifest_payload(const RunStore& s) {
    json reps = json::array();
    for (const auto& r : s.representations) {
        json e = {{"id", r.id},
                  {"smoothing", r.smoothing.label()},
                  {"skip", r.skip},
                  {"dir", "reps/" + r.dir()},
                  {"status", r.status}};
        if (!r.ok()) e["error"] = r.error;
        reps.push_back(e);
    }
    json series = json::array();
    for (const auto& e : s.series) series.push_back(e.smoothing.label());
    return {{"format", format_version},
            {"dataset", dataset_json(s.dataset)},
            {"series", series},
            {"transform", to_json(s.transform)},
            {"model", to_json(s.model)},
            {"seed", s.model.seed},
            {"shap_segments", s.shap_segments},
            {"representations", reps}};
}

inline json representations_payload(const RunStore& s) {
    json rows = json::array();
    for (const auto& r : s.representations) rows.push_back(profile_row(r));
    return {{"count", s.representations.size()},
            {"columns", {"id", "train_error", "val_error", "acf", "acf_lag", "adf_statistic", "stationary"}},
            {"representations", rows}};
}

/// Raw-time extent shared by every stripe: [0, dataset length).
inline visprep::TimeExtent shared_extent(const RunStore& s) {
    return {0.0, static_cast<double>(std::max<std::size_t>(s.dataset.time_labels.size(), 1))};
}

inline json representation_payload(const RunStore& s, const RepresentationRecord& r) {
    json j = summary_json(r);
    j["time_offset"] = r.smoothing.lag();
    j["window_length"] = s.transform.window_length;
    j["horizon"] = s.transform.horizon;
    j["timeline"] = {{"begin", shared_extent(s).begin}, {"end", shared_extent(s).end}};
    return j;
}

enum class StripeMode { Bivariate, Single };

inline std::vector<visprep::MetricPair> metric_pairs(const RepresentationRecord& r, visprep::ValueMetric metric) {
    std::vector<visprep::MetricPair> out;
    out.reserve(r.windows.size());
    for (const auto& w : r.windows)
        out.push_back({metric == visprep::ValueMetric::Corr ? w.corr : std::optional<double>(w.shap), w.rmse});
    return out;
}

inline const visprep::VSUPScheme& scheme_for(const RunStore& s, visprep::ValueMetric metric) {
    const auto& opt = metric == visprep::ValueMetric::Corr ? s.vsup_corr : s.vsup_shap;
    if (!opt) throw Error(ErrorCode::InvalidConfig, "store has no color scheme");
    return *opt;
}

/// `single` selects the single-metric sequential mode; `single_error` picks
/// RMSE instead of the value metric there.
inline json stripe_payload(const RunStore& s, const RepresentationRecord& r, std::size_t pixels,
                           visprep::ValueMetric metric, StripeMode mode = StripeMode::Bivariate,
                           bool single_error = false) {
    if (pixels < 1 || pixels > 100000) throw Error(ErrorCode::InvalidConfig, "pixels must lie in [1, 100000]");
    const auto pairs = metric_pairs(r, metric);
    visprep::StripeRow row;
    json j;
    if (mode == StripeMode::Bivariate) {
        const auto& scheme = scheme_for(s, metric);
        row = visprep::aggregate_stripe(r.id, pairs, pixels, scheme);
        j["mode"] = "vsup";
        j["scheme"] = to_json(scheme);
    } else {
        // Single-metric edges span every ok representation so stripes compare.
        std::vector<double> all;
        for (const auto& rep : s.representations)
            for (const auto& p : metric_pairs(rep, metric)) {
                if (single_error) all.push_back(p.error);
                else if (p.value) all.push_back(*p.value);
            }
        if (all.empty()) all.push_back(0.0);
        const auto edges = visprep::sequential_edges(all);
        row = visprep::aggregate_stripe_single(r.id, pairs, pixels,
                                               single_error ? visprep::SingleMetric::Error : visprep::SingleMetric::Value,
                                               edges);
        j["mode"] = "single";
        j["single_metric"] = single_error ? "rmse" : (metric == visprep::ValueMetric::Corr ? "corr" : "shap");
        j["edges"] = edges;
    }
    json values = json::array();
    for (const auto& p : row.pixel_values)
        values.push_back(p ? json{{"value", optional_json(p->value)}, {"rmse", p->error}} : json(nullptr));
    const auto extent = shared_extent(s);
    const double first = static_cast<double>(r.smoothing.lag());
    const double last = first + static_cast<double>(r.windows.size() * r.skip);
    j["representation"] = r.id;
    j["metric"] = metric == visprep::ValueMetric::Corr ? "corr" : "shap";
    j["pixels"] = pixels;
    j["n_windows"] = r.windows.size();
    j["windows_per_pixel"] = row.n_w;
    j["cells"] = row.pixel_cells;
    j["values"] = values;
    j["timeline"] = {{"begin", extent.begin}, {"end", extent.end}, {"first", first}, {"last", last}};
    return j;
}

/// Rectangles of every window on a shared axis of `axis_width` pixels.
inline json layout_payload(const RunStore& s, const RepresentationRecord& r, double axis_width) {
    const auto rects =
        visprep::layout_windows(r.windows.size(), r.skip, r.smoothing.lag(), axis_width, shared_extent(s));
    json out = json::array();
    for (const auto& q : rects) out.push_back({q.x, q.width});
    return {{"representation", r.id}, {"axis_width", axis_width}, {"rects", out}};
}

inline const SeriesEntry& series_for(const RunStore& s, const core::SmoothingSpec& spec) {
    const auto* e = s.find_series(spec.label());
    if (!e) throw Error(ErrorCode::UnknownRepresentation, "no series for smoothing " + spec.label());
    return *e;
}

inline json window_payload(const RunStore& s, const RepresentationRecord& r, std::size_t t) {
    if (t >= r.windows.size())
        throw Error(ErrorCode::UnknownWindow, "window " + std::to_string(t) + " out of range [0, " +
                                                  std::to_string(r.windows.size()) + ")");
    const auto& w = r.windows[t];
    const auto& series = series_for(s, r.smoothing);
    const std::size_t W = s.transform.window_length, dT = s.transform.horizon;
    const std::size_t lag = r.smoothing.lag();
    const std::size_t target = s.dataset.target_index();

    json labels_in = json::array(), labels_out = json::array();
    for (std::size_t i = 0; i < W; ++i) labels_in.push_back(s.dataset.time_labels.at(lag + w.start + i));
    for (std::size_t i = 0; i < dT; ++i) labels_out.push_back(s.dataset.time_labels.at(lag + w.start + W + i));
    json inputs = json::object();
    for (std::size_t c = 0; c < s.dataset.variables.size(); ++c) {
        const auto& v = series.values[c];
        inputs[s.dataset.variables[c].id] = std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(w.start),
                                                                v.begin() + static_cast<std::ptrdiff_t>(w.start + W));
    }
    const auto& tv = series.values[target];
    const std::vector<double> actual(tv.begin() + static_cast<std::ptrdiff_t>(w.start + W),
                                     tv.begin() + static_cast<std::ptrdiff_t>(w.start + W + dT));
    const std::vector<double> pred(r.predictions.data.begin() + static_cast<std::ptrdiff_t>(t * dT),
                                   r.predictions.data.begin() + static_cast<std::ptrdiff_t>((t + 1) * dT));
    const std::size_t F = r.feature_labels.size();
    const std::vector<double> phi(r.attributions.data.begin() + static_cast<std::ptrdiff_t>(t * F),
                                  r.attributions.data.begin() + static_cast<std::ptrdiff_t>((t + 1) * F));
    return {{"representation", r.id},
            {"window", t},
            {"start", w.start},
            {"raw_start", lag + w.start},
            {"input_labels", labels_in},
            {"target_labels", labels_out},
            {"input", inputs},
            {"target", actual},
            {"prediction", pred},
            {"rmse", w.rmse},
            {"corr", optional_json(w.corr)},
            {"shap", w.shap},
            {"attribution", {{"base", r.shap_base}, {"features", r.feature_labels}, {"phi", phi}}}};
}

inline json variables_payload(const RunStore& s) {
    json vars = json::array();
    const auto* raw = s.find_series("Raw");
    for (std::size_t c = 0; c < s.dataset.variables.size(); ++c) {
        const auto& info = s.dataset.variables[c];
        json v = {{"id", info.id}, {"display_name", info.display_name}, {"unit", optional_json(info.unit)},
                  {"is_target", info.id == s.dataset.target}};
        if (raw) {
            const auto& x = raw->values[c];
            const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
            v["min"] = *lo;
            v["max"] = *hi;
            v["mean"] = stats::mean(x);
        }
        vars.push_back(v);
    }
    json smooth = json::array();
    for (const auto& e : s.series) smooth.push_back(e.smoothing.label());
    return {{"multivariate", s.multivariate()},
            {"target", s.dataset.target},
            {"variables", vars},
            {"smoothings", smooth},
            {"importance", s.multivariate() ? importance_json(s.importance) : json(nullptr)}};
}

/// A mosaic axis: a variable (under some smoothing) aligned to raw time.
struct AxisSeries {
    std::string name;
    std::size_t offset = 0; // raw index of values[0]
    const std::vector<double>* values = nullptr;
};

/// Resolves `key` as a variable id (under `smoothing`) or, failing that, as a
/// smoothing label of the target variable.
inline AxisSeries resolve_axis(const RunStore& s, const std::string& key, const std::string& smoothing) {
    const auto& vars = s.dataset.variables;
    for (std::size_t c = 0; c < vars.size(); ++c)
        if (vars[c].id == key) {
            const auto& e = series_for(s, core::parse_smoothing(smoothing));
            return {key, static_cast<std::size_t>(e.smoothing.lag()), &e.values[c]};
        }
    if (const auto* e = s.find_series(key))
        return {key, static_cast<std::size_t>(e->smoothing.lag()), &e->values[s.dataset.target_index()]};
    throw Error(ErrorCode::UnknownTarget, "unknown variable or smoothing '" + key + "'");
}

inline json mosaic_json(const visprep::MosaicGrid& m, const std::string& mode, const std::optional<std::string>& color) {
    json values = json::array();
    for (const auto& v : m.cell_values) values.push_back(optional_json(v));
    return {{"x", m.x_variable}, {"y", m.y_variable}, {"grid", m.grid},          {"mode", mode},
            {"color", optional_json(color)},      {"x_edges", m.x_edges},      {"y_edges", m.y_edges},
            {"cell_values", values},              {"cell_counts", m.cell_counts}};
}

/// Mean of `color` per cell when a color variable applies (defaults to the
/// target for variable pairs of a multivariate dataset); point density
/// otherwise.
inline json matrix_payload(const RunStore& s, const std::string& x, const std::string& y, std::size_t grid,
                           const std::string& smoothing = "Raw", std::optional<std::string> color = std::nullopt) {
    const auto ax = resolve_axis(s, x, smoothing);
    const auto ay = resolve_axis(s, y, smoothing);
    const bool both_variables =
        std::any_of(s.dataset.variables.begin(), s.dataset.variables.end(), [&](const auto& v) { return v.id == x; }) &&
        std::any_of(s.dataset.variables.begin(), s.dataset.variables.end(), [&](const auto& v) { return v.id == y; });
    if (!color && both_variables && s.multivariate()) color = s.dataset.target;
    std::optional<AxisSeries> ac;
    if (color) ac = resolve_axis(s, *color, smoothing);

    std::size_t begin = std::max(ax.offset, ay.offset);
    std::size_t end = std::min(ax.offset + ax.values->size(), ay.offset + ay.values->size());
    if (ac) {
        begin = std::max(begin, ac->offset);
        end = std::min(end, ac->offset + ac->values->size());
    }
    if (end <= begin) throw Error(ErrorCode::SeriesTooShort, "axes do not overlap in time");
    std::vector<double> xs, ys, cs;
    for (std::size_t t = begin; t < end; ++t) {
        xs.push_back((*ax.values)[t - ax.offset]);
        ys.push_back((*ay.values)[t - ay.offset]);
        if (ac) cs.push_back((*ac->values)[t - ac->offset]);
    }
    auto m = ac ? visprep::mosaic_matrix(xs, ys, cs, grid) : visprep::mosaic_density(xs, ys, grid);
    m.x_variable = x;
    m.y_variable = y;
    json j = mosaic_json(m, ac ? "mean" : "density", color);
    j["smoothing"] = smoothing;
    j["points"] = xs.size();
    return j;
}

/// Default g = 5 matrices: all variable pairs colored by the target, or all
/// smoothing pairs by density for a univariate dataset.
inline json mosaic_overview(const RunStore& s, std::size_t grid = 5) {
    json cells = json::array();
    if (s.multivariate()) {
        for (const auto& a : s.dataset.variables)
            for (const auto& b : s.dataset.variables) cells.push_back(matrix_payload(s, a.id, b.id, grid));
    } else {
        for (const auto& a : s.series)
            for (const auto& b : s.series)
                cells.push_back(matrix_payload(s, a.smoothing.label(), b.smoothing.label(), grid));
    }
    return {{"grid", grid}, {"matrices", cells}};
}

inline json horizon_payload(const RunStore& s, const std::string& variable, const std::string& smoothing = "Raw") {
    const auto& vars = s.dataset.variables;
    const auto it = std::find_if(vars.begin(), vars.end(), [&](const auto& v) { return v.id == variable; });
    if (it == vars.end()) throw Error(ErrorCode::UnknownTarget, "unknown variable '" + variable + "'");
    const auto& e = series_for(s, core::parse_smoothing(smoothing));
    const auto h = visprep::horizon_bands(e.values[static_cast<std::size_t>(it - vars.begin())], variable);
    json bands = json::array(), fills = json::array();
    for (const auto& l : h.layers) {
        bands.push_back(l.band);
        fills.push_back(l.fill);
    }
    return {{"variable", variable},
            {"smoothing", e.smoothing.label()},
            {"time_offset", e.smoothing.lag()},
            {"band_count", visprep::HorizonBands::band_count},
            {"min", h.min},
            {"max", h.max},
            {"band_height", h.band_height},
            {"band", bands},
            {"fill", fills}};
}

// ---- prediction comparator ---------------------------------------------------

using Point2 = std::array<double, 2>;
using Polygon = std::vector<Point2>;

/// Even-odd ray casting.
inline bool point_in_polygon(const Polygon& poly, double x, double y) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) inside = !inside;
    }
    return inside;
}

inline std::vector<Polygon> parse_polygons(const json& j) {
    std::vector<Polygon> out;
    if (j.is_null()) return out;
    if (!j.is_array()) throw Error(ErrorCode::MalformedPolygon, "polygons must be an array");
    for (const auto& p : j) {
        if (!p.is_array() || p.size() < 3)
            throw Error(ErrorCode::MalformedPolygon, "a polygon needs at least 3 vertices");
        Polygon poly;
        for (const auto& v : p) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw Error(ErrorCode::MalformedPolygon, "vertices must be [x, y] number pairs");
            const Point2 q{v[0].get<double>(), v[1].get<double>()};
            if (!std::isfinite(q[0]) || !std::isfinite(q[1]))
                throw Error(ErrorCode::MalformedPolygon, "vertices must be finite");
            poly.push_back(q);
        }
        out.push_back(std::move(poly));
    }
    return out;
}

struct PredictionQuery {
    std::vector<std::string> reps; // empty = every ok representation
    visprep::ValueMetric axes = visprep::ValueMetric::Corr;
    std::vector<Polygon> polygons;
    std::size_t sample = 1000;
    std::optional<std::uint64_t> seed;
};

struct ScatterPoint {
    const RepresentationRecord* rep = nullptr;
    std::size_t window = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Scatter of (value metric, RMSE) per window. Points without a correlation
/// are left out of the corr axes and counted as omitted.
inline json predictions_payload(const RunStore& s, const PredictionQuery& q) {
    std::vector<const RepresentationRecord*> reps;
    if (q.reps.empty()) {
        for (const auto& r : s.representations)
            if (r.ok()) reps.push_back(&r);
    } else {
        for (const auto& id : q.reps) {
            const auto* r = s.find(id);
            if (!r) throw Error(ErrorCode::UnknownRepresentation, "unknown representation '" + id + "'");
            if (!r->ok()) throw Error(ErrorCode::UnknownRepresentation, "representation '" + id + "' failed");
            reps.push_back(r);
        }
    }
    if (q.sample < 1) throw Error(ErrorCode::InvalidConfig, "sample size must be >= 1");
    const bool corr = q.axes == visprep::ValueMetric::Corr;
    std::vector<ScatterPoint> points;
    std::size_t omitted = 0;
    for (const auto* r : reps)
        for (const auto& w : r->windows) {
            if (corr && !w.corr) {
                ++omitted;
                continue;
            }
            points.push_back({r, w.window, corr ? *w.corr : w.shap, w.rmse});
        }
    const auto& scheme = scheme_for(s, q.axes);
    const auto idx = visprep::sample_indices(points.size(), q.sample, q.seed.value_or(s.model.seed));

    auto row = [&](const ScatterPoint& p) {
        const auto& w = p.rep->windows[p.window];
        return json{{"representation", p.rep->id}, {"window", p.window},         {"start", w.start},
                    {"x", p.x},                    {"y", p.y},                   {"cell", visprep::vsup_quantize(p.x, p.y, scheme)},
                    {"rmse", w.rmse},              {"corr", optional_json(w.corr)}, {"shap", w.shap}};
    };
    json sampled = json::array();
    for (auto i : idx) {
        const auto& p = points[i];
        sampled.push_back({{"representation", p.rep->id},
                           {"window", p.window},
                           {"x", p.x},
                           {"y", p.y},
                           {"cell", visprep::vsup_quantize(p.x, p.y, scheme)}});
    }
    json selected = json::array();
    if (q.polygons.empty()) {
        for (auto i : idx) selected.push_back(row(points[i]));
    } else {
        for (const auto& p : points)
            if (std::any_of(q.polygons.begin(), q.polygons.end(),
                            [&](const Polygon& poly) { return point_in_polygon(poly, p.x, p.y); }))
                selected.push_back(row(p));
    }
    json ids = json::array();
    for (const auto* r : reps) ids.push_back(r->id);
    return {{"axes", {corr ? "corr" : "shap", "rmse"}},
            {"representations", ids},
            {"total", points.size()},
            {"omitted", omitted},
            {"sampled", sampled},
            {"selected", selected},
            {"scheme", to_json(scheme)}};
}

} // namespace timetuner::store
