#pragma once

#include <sstream>
#include <string>

#include "timetuner/store/payloads.hpp"

namespace timetuner::store {

namespace detail {

inline std::string csv_field(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }
    return v.dump();
}

} // namespace detail

inline const std::vector<std::string>& profile_columns() {
    static const std::vector<std::string> cols{"id",          "smoothing", "skip",          "status",     "n_windows",
                                               "train_error", "val_error", "acf",           "acf_lag",    "adf_statistic",
                                               "stationary",  "error"};
    return cols;
}

/// Profile table as CSV, one row per representation in store order.
inline std::string profile_csv(const RunStore& s) {
    std::ostringstream os;
    const auto& cols = profile_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : s.representations) {
        const json row = profile_row(r);
        for (std::size_t i = 0; i < cols.size(); ++i)
            os << (i ? "," : "") << detail::csv_field(row.contains(cols[i]) ? row.at(cols[i]) : json(nullptr));
        os << "\n";
    }
    return os.str();
}

inline std::string profile_report_json(const RunStore& s) { return dump_json(representations_payload(s)); }

} // namespace timetuner::store
