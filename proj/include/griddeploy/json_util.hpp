#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "griddeploy/errors.hpp"

namespace griddeploy {

using nlohmann::json;

namespace detail {

inline std::pair<int, int> line_column_of_offset(std::string_view text, std::size_t offset) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

} // namespace detail

// Parse a JSON document, converting nlohmann's diagnostics into a ParseError
// with a line/column position.
inline json parse_json_document(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        auto [line, column] = detail::line_column_of_offset(text, offset);
        throw ParseError(std::string("JSON syntax error: ") + e.what(), line, column);
    }
}

inline void expect_object(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
}

inline void expect_array(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + ": expected an array");
}

// Unknown keys are rejected; missing required keys are reported by the typed getters.
inline void check_keys(const json& obj, const std::string& ctx,
                       std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ParseError(ctx + ": unknown key \"" + it.key() + "\"");
    }
}

inline const json& get_member(const json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(ctx + ": missing required key \"" + key + "\"");
    return *it;
}

inline std::string get_string(const json& obj, const char* key, const std::string& ctx) {
    const json& v = get_member(obj, key, ctx);
    if (!v.is_string()) throw ParseError(ctx + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline std::int64_t get_int(const json& obj, const char* key, const std::string& ctx) {
    const json& v = get_member(obj, key, ctx);
    if (!v.is_number_integer()) throw ParseError(ctx + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

inline double get_number(const json& v, const std::string& ctx) {
    if (!v.is_number()) throw ParseError(ctx + ": expected a number");
    return v.get<double>();
}

inline bool get_bool_or(const json& obj, const char* key, bool fallback, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw ParseError(ctx + "." + key + ": expected a boolean");
    return it->get<bool>();
}

inline void require_format_version(const json& obj, const std::string& ctx) {
    std::int64_t v = get_int(obj, "formatVersion", ctx);
    if (v != 1) throw ParseError(ctx + ": unsupported formatVersion " + std::to_string(v));
}

// Shortest unambiguous decimal for human-facing output: integers print bare,
// fractions keep their digits ("10.2", "0", "100").
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

} // namespace griddeploy
