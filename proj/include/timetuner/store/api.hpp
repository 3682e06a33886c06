#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timetuner/store/persistence.hpp"

namespace timetuner::store {

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

namespace detail {

inline int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline std::string percent_decode(std::string_view s, bool plus_as_space) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            const int hi = hex_digit(s[i + 1]), lo = hex_digit(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(plus_as_space && s[i] == '+' ? ' ' : s[i]);
    }
    return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline std::map<std::string, std::string> parse_query(std::string_view q) {
    std::map<std::string, std::string> out;
    if (q.empty()) return out;
    for (const auto& part : split(q, '&')) {
        if (part.empty()) continue;
        const auto eq = part.find('=');
        const auto key = percent_decode(std::string_view(part).substr(0, eq), true);
        out[key] = eq == std::string::npos ? "" : percent_decode(std::string_view(part).substr(eq + 1), true);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
    T v{};
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw Error(ErrorCode::InvalidConfig, std::string("bad ") + what + " '" + text + "'");
    return v;
}

inline visprep::ValueMetric parse_metric(const std::string& m) {
    if (m == "corr") return visprep::ValueMetric::Corr;
    if (m == "shap") return visprep::ValueMetric::Shap;
    throw Error(ErrorCode::InvalidConfig, "metric must be corr or shap, got '" + m + "'");
}

/// True when `id` names a representation the configuration language can
/// express ("<smoothing>/Sk-<s>", s >= 1).
inline bool well_formed_id(const std::string& id) {
    const auto pos = id.find("/Sk-");
    if (pos == std::string::npos) return false;
    const auto digits = id.substr(pos + 4);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 9) return false;
    if (std::stoul(digits) < 1) return false;
    try {
        return core::representation_id(core::parse_smoothing(id.substr(0, pos)), std::stoul(digits)) == id;
    } catch (const Error&) {
        return false;
    }
}

inline int status_of(ErrorCode c) {
    switch (c) {
    case ErrorCode::UnknownRepresentation:
    case ErrorCode::UnknownWindow:
    case ErrorCode::UnknownTarget:
    case ErrorCode::StoreNotFound: return 404;
    case ErrorCode::MalformedPolygon:
    case ErrorCode::InvalidConfig:
    case ErrorCode::MalformedInput: return 400;
    default: return 422;
    }
}

} // namespace detail

/// Read-only JSON API over a loaded store. `handle` is const and touches no
/// shared mutable state, so any number of threads may call it.
class Api {
public:
    Api(RunStore store, json manifest) : store_(std::move(store)), manifest_(std::move(manifest)) {}

    static Api open(const fs::path& root) { return Api(load_store(root), load_manifest(root)); }

    const RunStore& store() const { return store_; }

    /// `target` is the raw request target (percent-encoded path plus query).
    Response handle(const std::string& method, const std::string& target, const std::string& body = {}) const {
        try {
            return route(method, target, body);
        } catch (const Error& e) {
            return error(detail::status_of(e.code()), std::string(to_string(e.code())), e.what());
        } catch (const json::exception& e) {
            return error(400, "malformed_input", e.what());
        } catch (const std::exception& e) {
            return error(500, "internal", e.what());
        }
    }

    static Response error(int status, const std::string& code, const std::string& message) {
        return {status, json{{"code", code}, {"message", message}}.dump()};
    }

private:
    static Response ok(const json& j) { return {200, j.dump()}; }

    Response route(const std::string& method, const std::string& target, const std::string& body) const {
        const auto qpos = target.find('?');
        const std::string_view raw_path = std::string_view(target).substr(0, qpos);
        const auto query = detail::parse_query(qpos == std::string::npos ? std::string_view{}
                                                                         : std::string_view(target).substr(qpos + 1));
        std::vector<std::string> seg;
        for (const auto& s : detail::split(raw_path, '/'))
            if (!s.empty()) seg.push_back(detail::percent_decode(s, false));
        if (!seg.empty() && seg[0] == "api") seg.erase(seg.begin());

        auto q = [&](const std::string& key) -> std::optional<std::string> {
            const auto it = query.find(key);
            if (it == query.end()) return std::nullopt;
            return it->second;
        };
        const bool get = method == "GET";
        auto only_get = [&]() {
            if (!get) throw MethodNotAllowed{};
        };

        try {
            if (seg.size() == 1 && seg[0] == "manifest") {
                only_get();
                return ok(manifest_);
            }
            if (seg.size() == 1 && seg[0] == "representations") {
                only_get();
                return ok(representations_payload(store_));
            }
            if (!seg.empty() && seg[0] == "representations") {
                only_get();
                return representation_route(std::vector<std::string>(seg.begin() + 1, seg.end()), q);
            }
            if (seg.size() == 1 && seg[0] == "variables") {
                only_get();
                return ok(variables_payload(store_));
            }
            if (seg.size() == 2 && seg[0] == "variables" && seg[1] == "matrix") {
                only_get();
                const auto x = q("x"), y = q("y");
                if (!x || !y) throw Error(ErrorCode::InvalidConfig, "x and y are required");
                const auto grid = q("grid") ? detail::parse_number<std::size_t>(*q("grid"), "grid") : std::size_t{5};
                if (grid < 2 || grid > 100) throw Error(ErrorCode::InvalidConfig, "grid must lie in [2, 100]");
                return ok(matrix_payload(store_, *x, *y, grid, q("smoothing").value_or("Raw"), q("color")));
            }
            if (seg.size() == 3 && seg[0] == "variables" && seg[2] == "horizon") {
                only_get();
                return ok(horizon_payload(store_, seg[1], q("smoothing").value_or("Raw")));
            }
            if (seg.size() == 1 && seg[0] == "vsup") {
                only_get();
                return ok(to_json(scheme_for(store_, detail::parse_metric(q("metric").value_or("corr")))));
            }
            if (seg.size() == 1 && seg[0] == "predictions") {
                if (method != "GET" && method != "POST") throw MethodNotAllowed{};
                return ok(predictions_payload(store_, prediction_query(q, method == "POST" ? body : std::string{})));
            }
        } catch (const MethodNotAllowed&) {
            return error(405, "method_not_allowed", method + " is not supported here");
        }
        return error(404, "not_found", "no endpoint " + std::string(raw_path));
    }

    struct MethodNotAllowed {};

    template <typename Q>
    Response representation_route(const std::vector<std::string>& rest, const Q& q) const {
        // Ids contain '/': accept it encoded as %2F (one segment) or verbatim
        // (two segments), preferring the longer match.
        std::string id;
        std::size_t used = 0;
        for (std::size_t n = std::min<std::size_t>(2, rest.size()); n >= 1; --n) {
            std::string cand = rest[0];
            for (std::size_t i = 1; i < n; ++i) cand += "/" + rest[i];
            if (store_.find(cand) || detail::well_formed_id(cand)) {
                id = cand;
                used = n;
                break;
            }
        }
        if (used == 0) return error(404, "unknown_representation", "unknown representation '" + rest[0] + "'");
        const auto* r = store_.find(id);
        if (!r)
            return error(404, "requires_pipeline_run",
                         "representation '" + id + "' was not computed in this run; run the pipeline with it");
        const std::vector<std::string> tail(rest.begin() + static_cast<std::ptrdiff_t>(used), rest.end());
        if (tail.empty()) return ok(representation_payload(store_, *r));
        if (!r->ok())
            return error(422, "representation_failed", "representation '" + id + "' failed: " + r->error);
        if (tail.size() == 1 && tail[0] == "stripe") {
            const auto pixels = q("pixels") ? detail::parse_number<std::size_t>(*q("pixels"), "pixels") : std::size_t{800};
            const auto metric = detail::parse_metric(q("metric").value_or("corr"));
            const auto mode = q("mode").value_or("vsup");
            if (mode != "vsup" && mode != "single") throw Error(ErrorCode::InvalidConfig, "mode must be vsup or single");
            const auto single = q("single").value_or("value");
            if (single != "value" && single != "rmse") throw Error(ErrorCode::InvalidConfig, "single must be value or rmse");
            return ok(stripe_payload(store_, *r, pixels, metric,
                                     mode == "vsup" ? StripeMode::Bivariate : StripeMode::Single, single == "rmse"));
        }
        if (tail.size() == 1 && tail[0] == "layout") {
            const auto width = q("width") ? detail::parse_number<double>(*q("width"), "width") : 800.0;
            return ok(layout_payload(store_, *r, width));
        }
        if (tail.size() == 1 && tail[0] == "windows") return ok(windows_json(*r));
        if (tail.size() == 2 && tail[0] == "windows")
            return ok(window_payload(store_, *r, detail::parse_number<std::size_t>(tail[1], "window index")));
        return error(404, "not_found", "no endpoint under representation '" + id + "'");
    }

    template <typename Q>
    PredictionQuery prediction_query(const Q& q, const std::string& body) const {
        PredictionQuery pq;
        json b = json::object();
        if (!body.empty()) {
            b = json::parse(body);
            if (!b.is_object()) throw Error(ErrorCode::MalformedInput, "request body must be an object");
        }
        if (b.contains("reps")) {
            pq.reps = b.at("reps").get<std::vector<std::string>>();
        } else if (const auto reps = q("reps"); reps && !reps->empty()) {
            pq.reps = detail::split(*reps, ',');
        }
        const auto axes = b.contains("axes") ? b.at("axes").get<std::string>() : q("axes").value_or("corr");
        pq.axes = detail::parse_metric(axes);
        if (b.contains("polygons")) pq.polygons = parse_polygons(b.at("polygons"));
        if (b.contains("sample")) pq.sample = b.at("sample").get<std::size_t>();
        else if (q("sample")) pq.sample = detail::parse_number<std::size_t>(*q("sample"), "sample");
        if (b.contains("seed")) pq.seed = b.at("seed").get<std::uint64_t>();
        else if (q("seed")) pq.seed = detail::parse_number<std::uint64_t>(*q("seed"), "seed");
        return pq;
    }

    RunStore store_;
    json manifest_;
};

} // namespace timetuner::store
