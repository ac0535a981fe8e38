#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "nsl/errors.hpp"
#include "nsl/resources.hpp"

namespace nsl {

using json = nlohmann::json;

// Typed field access that reports schema violations as ParseError with the
// offending context and key.
template <typename T>
T field(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(ctx + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    if (!j.contains(key)) return fallback;
    return field<T>(j, key, ctx);
}

// Object member by reference, for iterating a nested object in place. The
// `_or_empty` form yields an empty object when the key is absent.
const json& member_object(const json& j, const char* key, const std::string& ctx);
const json& member_object_or_empty(const json& j, const char* key, const std::string& ctx);

json parse_json_text(const std::string& text, const std::string& ctx);
json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Dotted attribute paths, e.g. "network_reqs.performance.throughput_mbps".
// A purely numeric segment indexes an array.
std::vector<std::string> split_path(const std::string& path);
const json* lookup_path(const json& doc, const std::string& path);
// Replaces the value at an existing path; returns false when it does not
// resolve.
bool assign_path(json& doc, const std::string& path, const json& value);

json to_json(const ResourceVector& r);
ResourceVector resource_vector_from_json(const json& j, const std::string& ctx);
json to_json(const PerformanceVector& p);
PerformanceVector performance_from_json(const json& j, const std::string& ctx);
json to_json(const TimeWindow& w);
TimeWindow window_from_json(const json& j, const std::string& ctx);

}  // namespace nsl
