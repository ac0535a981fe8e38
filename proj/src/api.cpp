#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string_view>

#include "nsl/json_util.hpp"
#include "nsl/api.hpp"

namespace nsl {

std::optional<std::string> TenantRegistry::authenticate(const std::string& header) const {
    static const std::string prefix = "Bearer ";
    if (header.rfind(prefix, 0) != 0) return std::nullopt;
    auto it = tenant_by_token.find(header.substr(prefix.size()));
    if (it == tenant_by_token.end()) return std::nullopt;
    return it->second;
}

TenantRegistry tenants_from_json(const json& j) {
    TenantRegistry r;
    for (const auto& t : field<json>(j, "tenants", "tenants")) {
        const auto token = field<std::string>(t, "token", "tenant");
        if (!r.tenant_by_token.emplace(token, field<std::string>(t, "id", "tenant")).second) {
            throw ParseError("tenants: duplicate token");
        }
    }
    return r;
}

TenantRegistry load_tenants(const std::string& path) { return tenants_from_json(read_json_file(path)); }

namespace {

std::vector<std::string> url_segments(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path.substr(0, path.find('?')));
    std::string p;
    while (std::getline(ss, p, '/')) {
        if (!p.empty()) parts.push_back(p);
    }
    return parts;
}

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", code}, {"message", message}}};
}

int status_for(const std::string& code) {
    if (code == "UnknownOrder" || code == "UnknownTemplate" || code == "UnknownPop") return 404;
    if (code == "IllegalTransition" || code == "OutsideActiveWindow" || code == "CapacityRaced") return 409;
    if (code == "ParseError" || code == "InvalidRequest") return 400;
    if (code == "ExposureDenied") return 403;
    return 500;
}

json body_json(const ApiRequest& req) {
    if (req.body.empty()) return json::object();
    json j = parse_json_text(req.body, "request body");
    if (!j.is_object()) throw ParseError("request body: expected a JSON object");
    return j;
}

}  // namespace

ApiResponse ApiRouter::handle(const ApiRequest& req) const {
    // Header names are case-insensitive.
    auto auth = std::find_if(req.headers.begin(), req.headers.end(), [](const auto& h) {
        return std::equal(h.first.begin(), h.first.end(), std::string_view("authorization").begin(),
                          std::string_view("authorization").end(),
                          [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; });
    });
    const auto tenant = auth == req.headers.end() ? std::nullopt : tenants_.authenticate(auth->second);
    if (!tenant) return error_response(401, "Unauthorized", "missing or invalid bearer token");

    const auto parts = url_segments(req.path);
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";

    // Orders of other tenants are reported as absent.
    auto owned = [&](const std::string& id) {
        ServiceOrder o = orch_.order(id);
        if (o.tenant_id != *tenant) throw UnknownOrder("unknown order '" + id + "'");
        return o;
    };

    try {
        if (get && parts == std::vector<std::string>{"catalog", "templates"}) {
            json list = json::array();
            for (const auto& [id, t] : orch_.catalog().templates) list.push_back(to_json(t));
            return {200, {{"templates", list}}};
        }
        if (parts.size() == 1 && parts[0] == "orders") {
            if (get) {
                json list = json::array();
                for (const auto& o : orch_.orders()) {
                    if (o.tenant_id == *tenant) list.push_back(to_json(o));
                }
                return {200, {{"orders", list}}};
            }
            if (post) {
                const json b = body_json(req);
                std::optional<std::string> parent;
                if (b.contains("parent_order_id")) parent = owned(field<std::string>(b, "parent_order_id", "order")).id;
                const auto overrides = field_or<Overrides>(b, "overrides", {}, "order");
                auto o = orch_.submit(*tenant, field<std::string>(b, "template_id", "order"), overrides, parent);
                return {201, to_json(o)};
            }
        }
        if (parts.size() >= 2 && parts[0] == "orders") {
            const ServiceOrder o = owned(parts[1]);
            if (get && parts.size() == 2) return {200, to_json(o)};
            if (post && parts.size() == 3 && parts[2] == "process") return {200, to_json(orch_.process(o.id))};
            if (post && parts.size() == 3 && parts[2] == "validate") return {200, to_json(orch_.validate(o.id))};
        }
        if (parts.size() == 3 && parts[0] == "slices") {
            const ServiceOrder o = owned(parts[1]);
            const std::string& op = parts[2];
            if (post && op == "activate") {
                const json b = body_json(req);
                std::optional<std::int64_t> at;
                if (b.contains("at_minute")) at = field<std::int64_t>(b, "at_minute", "activate");
                orch_.activate(o.id, at);
                return {200, to_json(orch_.order(o.id))};
            }
            if (post && op == "terminate") {
                orch_.terminate(o.id);
                return {200, to_json(orch_.order(o.id))};
            }
            if (post && op == "trace") {
                const json b = body_json(req);
                std::vector<double> loads;
                if (b.contains("csv")) {
                    loads = parse_load_trace(field<std::string>(b, "csv", "trace"));
                } else {
                    loads = field<std::vector<double>>(b, "loads", "trace");
                }
                json events = json::array();
                for (const auto& e : orch_.feed_trace(o.id, loads)) events.push_back(to_json(e));
                return {200, {{"events", events}}};
            }
            if (get && op == "events") {
                json events = json::array();
                for (const auto& e : orch_.events_of(o.id)) events.push_back(to_json(e));
                json history = json::array();
                if (orch_.descriptor(o.id)) {
                    for (const auto& h : orch_.history(o.id)) history.push_back(to_json(h));
                }
                return {200, {{"events", events}, {"history", history}}};
            }
            if (get && op == "metrics") return {200, {{"metrics", orch_.visible_metrics(o.id)}}};
            if (get && op == "descriptor") {
                auto d = orch_.descriptor(o.id);
                if (!d) throw UnknownOrder("slice '" + o.id + "' has no descriptor yet");
                return {200, to_json(*d)};
            }
        }
        return error_response(404, "NotFound", "no route for " + req.method + " " + req.path);
    } catch (const AttributeError& e) {
        ApiResponse r = error_response(422, e.code(), e.what());
        r.body["field"] = e.path();
        return r;
    } catch (const Error& e) {
        return error_response(status_for(e.code()), e.code(), e.what());
    } catch (const json::exception& e) {
        return error_response(400, "ParseError", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "Internal", e.what());
    }
}

struct ApiServer::Impl {
    httplib::Server server;
};

ApiServer::ApiServer(const ApiRouter& router) : impl_(std::make_unique<Impl>()) {
    auto adapt = [&router](const httplib::Request& hreq, httplib::Response& hres) {
        ApiRequest req{hreq.method, hreq.path, {}, hreq.body};
        for (const auto& [k, v] : hreq.headers) req.headers[k] = v;
        const ApiResponse res = router.handle(req);
        hres.status = res.status;
        hres.set_content(res.body.dump(), "application/json");
    };
    impl_->server.Get(R"(/.*)", adapt);
    impl_->server.Post(R"(/.*)", adapt);
}

ApiServer::~ApiServer() = default;

int ApiServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw InvalidRequest("cannot listen on " + host + ":" + std::to_string(port));
    return bound;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() { impl_->server.stop(); }

void serve(const ApiRouter& router, const std::string& host, int port) {
    ApiServer server(router);
    server.bind(host, port);
    server.listen();
}

}  // namespace nsl
