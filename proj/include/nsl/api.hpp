#pragma once

// Tenant-facing HTTP surface over the orchestrator.

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "nsl/orchestrator.hpp"

namespace nsl {

struct TenantRegistry {
    std::map<std::string, std::string> tenant_by_token;
    std::optional<std::string> authenticate(const std::string& authorization_header) const;
};

TenantRegistry tenants_from_json(const json& j);
TenantRegistry load_tenants(const std::string& path);

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> headers;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    json body;
};

// Pure request dispatch; the HTTP server only adapts to it.
class ApiRouter {
public:
    ApiRouter(Orchestrator& orch, TenantRegistry tenants) : orch_(orch), tenants_(std::move(tenants)) {}
    ApiResponse handle(const ApiRequest& req) const;

private:
    Orchestrator& orch_;
    TenantRegistry tenants_;
};

// HTTP adapter over a router. `listen` blocks until `stop` is called from
// another thread.
class ApiServer {
public:
    explicit ApiServer(const ApiRouter& router);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds host:port, or an ephemeral port when `port` is 0; returns the port.
    int bind(const std::string& host, int port);
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Blocks serving `router` on host:port.
void serve(const ApiRouter& router, const std::string& host, int port);

}  // namespace nsl
