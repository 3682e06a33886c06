#pragma once

#include <map>
#include <string>

#include "timetuner/forecaster/model.hpp"
#include "timetuner/store/payloads.hpp"

namespace timetuner::store {

namespace detail {

/// Writes files under a root and remembers their checksums.
class StoreWriter {
public:
    explicit StoreWriter(fs::path root) : root_(std::move(root)) {}

    void text(const std::string& rel, const json& j) { bytes(rel, dump_json(j)); }

    void array(const std::string& stem, const Array& a, json extra = json::object()) {
        bytes(stem + ".f64", encode_f64(a.data));
        text(stem + ".json", array_header(a, std::move(extra)));
    }

    void bytes(const std::string& rel, const std::string& data) {
        write_file(root_ / rel, data);
        checksums_[rel] = fnv1a_hex(data);
    }

    const std::map<std::string, std::string>& checksums() const { return checksums_; }

private:
    fs::path root_;
    std::map<std::string, std::string> checksums_;
};

inline json tensors_json(const forecaster::Layout& l) {
    json out = json::array();
    for (const auto& t : l.tensors)
        out.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", t.offset}, {"size", t.size}});
    return out;
}

inline std::string series_stem(const SeriesEntry& e) { return "series/" + e.smoothing.label(); }

} // namespace detail

/// Writes the store to `root`. Files are rewritten in full, so a re-run with
/// the same inputs leaves identical bytes. Returns the manifest.
inline json save_store(const RunStore& s, const fs::path& root) {
    fs::create_directories(root);
    // Drop artifacts of an earlier run so the directory holds exactly this store.
    if (fs::exists(root / "manifest.json"))
        for (const char* sub : {"dataset", "series", "reps", "shared"}) fs::remove_all(root / sub);
    detail::StoreWriter w(root);

    w.text("dataset/timestamps.json", {{"labels", s.dataset.time_labels}});
    for (const auto& e : s.series) {
        Array a;
        a.shape = {e.values.size(), e.length()};
        for (const auto& v : e.values) a.data.insert(a.data.end(), v.begin(), v.end());
        w.array(detail::series_stem(e), a,
                {{"smoothing", e.smoothing.label()}, {"time_offset", e.smoothing.lag()}, {"variables", s.dataset.variable_ids()}});
    }

    const std::size_t k = s.dataset.variables.size();
    for (const auto& r : s.representations) {
        const std::string dir = "reps/" + r.dir() + "/";
        w.text(dir + "summary.json", summary_json(r));
        if (!r.ok()) continue;
        w.text(dir + "windows.json", windows_json(r));
        w.array(dir + "predictions", r.predictions, {{"units", "target"}});
        w.array(dir + "attributions", r.attributions, {{"features", r.feature_labels}, {"base", r.shap_base}});
        Array m;
        m.data = r.model_parameters;
        m.shape = {m.data.size()};
        const forecaster::Layout layout(s.model, s.transform.window_length, k);
        w.array(dir + "model", m, {{"config", to_json(s.model)}, {"tensors", detail::tensors_json(layout)},
                                   {"window", s.transform.window_length}, {"variables", k}});
    }

    if (s.vsup_corr) w.text("shared/vsup_corr.json", to_json(*s.vsup_corr));
    if (s.vsup_shap) w.text("shared/vsup_shap.json", to_json(*s.vsup_shap));
    w.text("shared/importance.json", importance_json(s.importance));
    w.text("shared/profile.json", representations_payload(s));
    if (s.find_series("Raw")) {
        w.text("shared/mosaic.json", mosaic_overview(s));
        for (const auto& v : s.dataset.variables) {
            try {
                w.text("shared/horizon/" + v.id + ".json", horizon_payload(s, v.id));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ConstantSeries) throw;
            }
        }
    }

    json manifest = manifest_payload(s);
    manifest["files"] = w.checksums();
    write_file(root / "manifest.json", dump_json(manifest));
    return manifest;
}

inline json load_manifest(const fs::path& root) {
    if (!fs::exists(root / "manifest.json"))
        throw Error(ErrorCode::StoreNotFound, "no run store at '" + root.string() + "'");
    return read_json(root / "manifest.json");
}

/// Reads a store written by save_store, verifying every file checksum.
inline RunStore load_store(const fs::path& root) {
    const json manifest = load_manifest(root);
    if (manifest.value("format", "") != format_version)
        throw Error(ErrorCode::MalformedInput, "unsupported store format");
    const auto& files = manifest.at("files");
    auto read = [&](const std::string& rel) {
        const auto it = files.find(rel);
        if (it == files.end()) throw Error(ErrorCode::MalformedInput, "manifest does not list " + rel);
        std::string data = read_file(root / rel);
        if (fnv1a_hex(data) != it->get<std::string>())
            throw Error(ErrorCode::MalformedInput, "checksum mismatch for " + rel);
        return data;
    };
    auto read_j = [&](const std::string& rel) {
        try {
            return json::parse(read(rel));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedInput, rel + ": " + e.what());
        }
    };
    auto read_array = [&](const std::string& stem) {
        const json h = read_j(stem + ".json");
        Array a;
        a.shape = h.at("shape").get<std::vector<std::size_t>>();
        a.data = decode_f64(read(stem + ".f64"));
        std::size_t n = 1;
        for (auto d : a.shape) n *= d;
        if (n != a.data.size()) throw Error(ErrorCode::MalformedInput, stem + ": shape does not match payload");
        return a;
    };

    RunStore s;
    const auto& ds = manifest.at("dataset");
    s.dataset.name = ds.at("name").get<std::string>();
    s.dataset.frequency = ds.at("frequency").get<std::string>();
    s.dataset.target = ds.at("target").get<std::string>();
    for (const auto& v : ds.at("variables")) {
        VariableInfo info{v.at("id").get<std::string>(), v.at("display_name").get<std::string>(), std::nullopt};
        if (!v.at("unit").is_null()) info.unit = v.at("unit").get<std::string>();
        s.dataset.variables.push_back(std::move(info));
    }
    s.dataset.time_labels = read_j("dataset/timestamps.json").at("labels").get<std::vector<std::string>>();
    s.transform = transform_from_json(manifest.at("transform"));
    s.model = model_config_from_json(manifest.at("model"));
    s.shap_segments = manifest.at("shap_segments").get<std::size_t>();

    for (const auto& label : manifest.at("series")) {
        SeriesEntry e;
        e.smoothing = core::parse_smoothing(label.get<std::string>());
        const Array a = read_array(detail::series_stem(e));
        if (a.shape.size() != 2) throw Error(ErrorCode::MalformedInput, "series arrays must be 2-d");
        for (std::size_t c = 0; c < a.shape[0]; ++c)
            e.values.emplace_back(a.data.begin() + static_cast<std::ptrdiff_t>(c * a.shape[1]),
                                  a.data.begin() + static_cast<std::ptrdiff_t>((c + 1) * a.shape[1]));
        s.series.push_back(std::move(e));
    }

    for (const auto& entry : manifest.at("representations")) {
        RepresentationRecord r;
        r.id = entry.at("id").get<std::string>();
        r.smoothing = core::parse_smoothing(entry.at("smoothing").get<std::string>());
        r.skip = entry.at("skip").get<std::size_t>();
        const std::string dir = entry.at("dir").get<std::string>() + "/";
        if (dir != "reps/" + r.dir() + "/") throw Error(ErrorCode::MalformedInput, "unexpected directory for " + r.id);
        apply_summary(r, read_j(dir + "summary.json"));
        if (r.ok()) {
            r.windows = windows_from_json(read_j(dir + "windows.json"));
            if (r.windows.size() != r.n_windows)
                throw Error(ErrorCode::MalformedInput, r.id + ": window rows differ from n_windows");
            r.predictions = read_array(dir + "predictions");
            r.attributions = read_array(dir + "attributions");
            r.model_parameters = read_array(dir + "model").data;
        }
        s.representations.push_back(std::move(r));
    }

    if (files.contains("shared/vsup_corr.json")) s.vsup_corr = vsup_from_json(read_j("shared/vsup_corr.json"));
    if (files.contains("shared/vsup_shap.json")) s.vsup_shap = vsup_from_json(read_j("shared/vsup_shap.json"));
    s.importance = importance_from_json(read_j("shared/importance.json"));
    return s;
}

/// Rebuilds the trained network of a representation.
inline forecaster::ForecastModel<double> load_model(const RunStore& s, const RepresentationRecord& r) {
    auto model = forecaster::init_model(s.model, s.transform.window_length, s.dataset.variables.size());
    if (model.parameter_count() != r.model_parameters.size())
        throw Error(ErrorCode::ShapeMismatch, r.id + ": stored parameters do not match the model layout");
    model.parameters().assign(r.model_parameters.begin(), r.model_parameters.end());
    return model;
}

} // namespace timetuner::store
