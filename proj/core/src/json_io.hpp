// Private JSON helpers shared by the readers. Field accessors throw
// FieldError with a dotted path; callers translate it into a ParseError
// (line-oriented) or a document-level ParseError.
#pragma once

#include "bridgewatch/config.hpp"
#include "bridgewatch/error.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace bridgewatch::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct FieldError {
    Errc code;  // MissingField, OutOfRangeValue, or SchemaViolation for type errors
    std::string reason;
};

[[noreturn]] inline void field_fail(Errc code, std::string reason) {
    throw FieldError{code, std::move(reason)};
}

inline std::string join_path(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string index_path(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline const json& field(const json& obj, std::string_view key, const std::string& path) {
    if (!obj.is_object()) {
        field_fail(Errc::SchemaViolation, (path.empty() ? "record" : path) + ": expected object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        field_fail(Errc::MissingField, join_path(path, key) + ": missing");
    }
    return *it;
}

inline const json* opt_field(const json& obj, std::string_view key) {
    if (!obj.is_object()) {
        return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return nullptr;
    }
    return &*it;
}

inline std::int64_t as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        field_fail(Errc::SchemaViolation, path + ": expected integer");
    }
    return v.get<std::int64_t>();
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        field_fail(Errc::SchemaViolation, path + ": expected number");
    }
    return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        field_fail(Errc::SchemaViolation, path + ": expected string");
    }
    return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) {
        field_fail(Errc::SchemaViolation, path + ": expected boolean");
    }
    return v.get<bool>();
}

inline const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) {
        field_fail(Errc::SchemaViolation, path + ": expected array");
    }
    return v;
}

inline std::int64_t int_field(const json& obj, std::string_view key, const std::string& path) {
    return as_int(field(obj, key, path), join_path(path, key));
}

inline double number_field(const json& obj, std::string_view key, const std::string& path) {
    return as_number(field(obj, key, path), join_path(path, key));
}

inline std::string string_field(const json& obj, std::string_view key, const std::string& path) {
    return as_string(field(obj, key, path), join_path(path, key));
}

inline std::optional<double> opt_number(const json& obj, std::string_view key, const std::string& path) {
    const json* v = opt_field(obj, key);
    if (v == nullptr) {
        return std::nullopt;
    }
    return as_number(*v, join_path(path, key));
}

inline std::optional<std::string> opt_string(const json& obj, std::string_view key, const std::string& path) {
    const json* v = opt_field(obj, key);
    if (v == nullptr) {
        return std::nullopt;
    }
    return as_string(*v, join_path(path, key));
}

/// Parses a whole document and runs `read` on it; any failure becomes a
/// ParseError with line 0.
template <typename Read>
auto read_document(std::string_view bytes, Read read) {
    json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (doc.is_discarded()) {
        throw ParseError(Errc::SchemaViolation, 0, "invalid JSON document");
    }
    try {
        return read(doc);
    } catch (const FieldError& e) {
        throw ParseError(e.code, 0, e.reason);
    }
}

json config_to_json(const AnalysisConfig& config);
AnalysisConfig config_from_json(const json& doc);

}  // namespace bridgewatch::detail
