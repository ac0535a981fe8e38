#include "nsl/json_util.hpp"

#include <fstream>
#include <sstream>

namespace nsl {

json parse_json_text(const std::string& text, const std::string& ctx) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(ctx + ": " + e.what());
    }
}

const json& member_object(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
    if (!it->is_object()) throw ParseError(ctx + ": field '" + key + "' must be an object");
    return *it;
}

const json& member_object_or_empty(const json& j, const char* key, const std::string& ctx) {
    static const json empty = json::object();
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    return j.contains(key) ? member_object(j, key, ctx) : empty;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write '" + path + "'");
    out << text;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

namespace {

bool is_index(const std::string& s) {
    return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

template <typename Json>
Json* walk(Json& doc, const std::string& path) {
    if (path.empty()) return nullptr;
    Json* cur = &doc;
    for (const auto& seg : split_path(path)) {
        if (seg.empty()) return nullptr;
        if (cur->is_object()) {
            auto it = cur->find(seg);
            if (it == cur->end()) return nullptr;
            cur = &*it;
        } else if (cur->is_array() && is_index(seg)) {
            const auto idx = std::stoul(seg);
            if (idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        } else {
            return nullptr;
        }
    }
    return cur;
}

}  // namespace

const json* lookup_path(const json& doc, const std::string& path) { return walk(doc, path); }

bool assign_path(json& doc, const std::string& path, const json& value) {
    json* target = walk(doc, path);
    if (target == nullptr) return false;
    *target = value;
    return true;
}

json to_json(const ResourceVector& r) {
    return json{{"vcpu", r.vcpu}, {"mem_gb", r.mem_gb}, {"storage_gb", r.storage_gb}};
}

ResourceVector resource_vector_from_json(const json& j, const std::string& ctx) {
    ResourceVector r{field<std::int64_t>(j, "vcpu", ctx), field<std::int64_t>(j, "mem_gb", ctx),
                     field<std::int64_t>(j, "storage_gb", ctx)};
    if (!r.non_negative()) throw ParseError(ctx + ": resource components must be >= 0");
    return r;
}

json to_json(const PerformanceVector& p) {
    return json{{"throughput_mbps", p.throughput_mbps},
                {"max_sessions", p.max_sessions},
                {"max_latency_ms", p.max_latency_ms}};
}

PerformanceVector performance_from_json(const json& j, const std::string& ctx) {
    PerformanceVector p{field<double>(j, "throughput_mbps", ctx),
                        field<std::int64_t>(j, "max_sessions", ctx),
                        field<double>(j, "max_latency_ms", ctx)};
    if (!p.valid()) throw ParseError(ctx + ": performance components must be > 0");
    return p;
}

json to_json(const TimeWindow& w) {
    return json{{"start", w.start}, {"end", w.end}, {"recurrence", to_string(w.recurrence)}};
}

TimeWindow window_from_json(const json& j, const std::string& ctx) {
    TimeWindow w{field<std::int64_t>(j, "start", ctx), field<std::int64_t>(j, "end", ctx),
                 recurrence_from_string(field_or<std::string>(j, "recurrence", "ONCE", ctx))};
    if (!w.well_formed()) throw ParseError(ctx + ": malformed time window");
    return w;
}

}  // namespace nsl
