#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "timetuner/error.hpp"

namespace timetuner::store {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// FNV-1a, 64 bit, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const fs::path& path, std::string_view bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedInput, path.string() + ": " + e.what());
    }
}

/// Little-endian IEEE-754 binary64 encoding.
inline std::string encode_f64(const std::vector<double>& values) {
    std::string out(values.size() * 8, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) out[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    return out;
}

inline std::vector<double> decode_f64(std::string_view bytes) {
    if (bytes.size() % 8 != 0) throw Error(ErrorCode::MalformedInput, "f64 payload size is not a multiple of 8");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]))
                    << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

/// Row-major array of doubles with a shape.
struct Array {
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

/// Shape sidecar: {"dtype": "<f8", "order": "C", "shape": [...]} plus any
/// extra fields.
inline json array_header(const Array& a, json extra = json::object()) {
    extra["dtype"] = "<f8";
    extra["order"] = "C";
    extra["shape"] = a.shape;
    return extra;
}

inline Array load_array(const fs::path& bin, const fs::path& header) {
    const json h = read_json(header);
    Array a;
    a.shape = h.at("shape").get<std::vector<std::size_t>>();
    a.data = decode_f64(read_file(bin));
    std::size_t n = 1;
    for (auto d : a.shape) n *= d;
    if (n != a.data.size()) throw Error(ErrorCode::MalformedInput, bin.string() + ": shape does not match payload");
    return a;
}

} // namespace timetuner::store
