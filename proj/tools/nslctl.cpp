// nslctl: command-line front end over a data directory.
//
// Exit codes: 0 success, 1 order rejected, 2 usage, parse or state error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#ifdef NSL_WITH_PORTAL
#include "nsl/api.hpp"
#else
#include "nsl/orchestrator.hpp"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? v : fallback;
}

// "path=value" with value parsed as JSON, or taken as a string when it is
// not valid JSON.
nsl::Overrides parse_overrides(const std::vector<std::string>& sets) {
    nsl::Overrides out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw nsl::ParseError("--set expects path=value, got '" + s + "'");
        const std::string value = s.substr(eq + 1);
        nsl::json v = nsl::json::parse(value, nullptr, false);
        out[s.substr(0, eq)] = v.is_discarded() ? nsl::json(value) : v;
    }
    return out;
}

void print_verdict(const nsl::ProcessOutcome& o) {
    if (o.verdict.admitted) {
        std::cout << o.order.id << " " << nsl::to_string(o.order.status) << "\n";
        if (o.placement) {
            for (const auto& a : o.placement->assignment) {
                std::cout << "  " << nsl::to_string(a.first) << " -> " << a.second << "\n";
            }
        }
        return;
    }
    std::cout << o.order.id << " REJECTED cause=" << o.verdict.cause << "\n";
    if (!o.verdict.detail.empty()) std::cout << "  " << o.verdict.detail << "\n";
}

std::string pop_table(const nsl::InfrastructureMap& map) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %-8s %-14s %6s %8s %10s\n", "POP", "REGION", "CAPABILITIES", "VCPU",
                  "MEM_GB", "STORAGE_GB");
    out += line;
    for (const auto& p : map.pops) {
        std::string caps;
        for (const auto& c : p.capabilities) caps += (caps.empty() ? "" : ",") + c;
        std::snprintf(line, sizeof line, "%-14s %-8s %-14s %6lld %8lld %10lld\n", p.id.c_str(), p.region.c_str(),
                      caps.empty() ? "-" : caps.c_str(), static_cast<long long>(p.capacity.vcpu),
                      static_cast<long long>(p.capacity.mem_gb), static_cast<long long>(p.capacity.storage_gb));
        out += line;
    }
    std::snprintf(line, sizeof line, "%-14s %-14s %-14s %10s %5s\n", "WAN", "A", "B", "MBPS", "CLASS");
    out += line;
    for (const auto& l : map.wan_links) {
        std::snprintf(line, sizeof line, "%-14s %-14s %-14s %10lld %5d\n", l.id.c_str(), l.endpoint_a.c_str(),
                      l.endpoint_b.c_str(), static_cast<long long>(l.capacity_mbps), l.reliability_class);
        out += line;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network slice orchestrator control"};
    app.require_subcommand(1);
    std::string data_dir = env_or("NSL_DATA_DIR", ".");
    app.add_option("--data-dir", data_dir, "Data directory (env NSL_DATA_DIR)");

    auto open = [&] { return nsl::open_data_dir(data_dir, nsl::system_clock_minutes()); };

    // catalog
    auto* catalog = app.add_subcommand("catalog", "Service catalog");
    catalog->require_subcommand(1);
    auto* lint = catalog->add_subcommand("lint", "Load and cross-validate a catalog directory");
    std::string catalog_dir;
    lint->add_option("dir", catalog_dir, "Catalog directory (default: <data-dir>/catalog)");
    lint->callback([&] {
        const std::string dir = catalog_dir.empty() ? (fs::path(data_dir) / "catalog").string() : catalog_dir;
        const nsl::Catalog cat = nsl::load_catalog(dir);
        std::size_t levels = 0;
        for (const auto& [id, n] : cat.nsds) {
            for (const auto& f : n.flavors) levels += f.instantiation_levels.size();
        }
        std::cout << "ok: " << cat.vnfs.size() << " vnfs, " << cat.nsds.size() << " ns descriptors, " << levels
                  << " instantiation levels, " << cat.templates.size() << " templates\n";
        for (const auto& [id, t] : cat.templates) {
            for (const auto& w : nsl::map_topology(cat, t.defaults.topology).warnings) {
                std::cout << "warning: template " << id << ": " << w << "\n";
            }
        }
    });

    // infra
    auto* infra = app.add_subcommand("infra", "Infrastructure map");
    infra->require_subcommand(1);
    auto* infra_load = infra->add_subcommand("load", "Validate a map and install it as <data-dir>/infra.json");
    std::string infra_file;
    infra_load->add_option("file", infra_file, "Infrastructure file")->required();
    infra_load->callback([&] {
        const nsl::InfrastructureMap map = nsl::load_infra(infra_file);
        fs::create_directories(data_dir);
        nsl::write_text_file((fs::path(data_dir) / "infra.json").string(), nsl::to_json(map).dump(2) + "\n");
        std::cout << "installed " << map.pops.size() << " pops, " << map.wan_links.size() << " wan links\n";
    });
    auto* infra_show = infra->add_subcommand("show", "Print PoPs and WAN links");
    infra_show->callback([&] { std::cout << pop_table(open()->infrastructure()); });

    // order
    auto* order = app.add_subcommand("order", "Service orders");
    order->require_subcommand(1);
    auto* submit = order->add_subcommand("submit", "Submit an order from a template");
    std::string tenant = "provider", template_id;
    std::vector<std::string> sets;
    std::string parent;
    submit->add_option("--tenant", tenant, "Tenant id");
    submit->add_option("--template", template_id, "Template id")->required();
    submit->add_option("--set", sets, "Override, path=value (repeatable)");
    submit->add_option("--parent", parent, "Order this one re-negotiates");
    submit->callback([&] {
        auto orch = open();
        std::optional<std::string> p;
        if (!parent.empty()) p = parent;
        std::cout << orch->submit(tenant, template_id, parse_overrides(sets), p).id << "\n";
    });
    std::string order_id;
    auto* process = order->add_subcommand("process", "Design, admit, place, reserve and prepare");
    process->add_option("id", order_id, "Order id")->required();
    auto* status = order->add_subcommand("status", "Print an order");
    status->add_option("id", order_id, "Order id")->required();
    status->callback([&] { std::cout << nsl::to_json(open()->order(order_id)).dump(2) << "\n"; });

    // slice
    auto* slice = app.add_subcommand("slice", "Slice runtime");
    slice->require_subcommand(1);
    std::string slice_id;
    auto* activate = slice->add_subcommand("activate", "Activate a prepared slice");
    activate->add_option("id", slice_id, "Slice id")->required();
    std::optional<std::int64_t> at_minute;
    activate->add_option("--at", at_minute, "Activation minute (default: now)");
    activate->callback([&] {
        auto orch = open();
        orch->activate(slice_id, at_minute);
        std::cout << slice_id << " " << nsl::to_string(orch->order(slice_id).status) << "\n";
    });
    auto* simulate = slice->add_subcommand("simulate", "Feed an hourly load trace");
    simulate->add_option("id", slice_id, "Slice id")->required();
    std::string trace_file;
    bool chart = false;
    simulate->add_option("--trace", trace_file, "Load trace, one value per hour")->required();
    simulate->add_flag("--chart", chart, "Print the per-hour step chart instead of the events");
    simulate->callback([&] {
        auto orch = open();
        const auto events = orch->feed_trace(slice_id, nsl::parse_load_trace(nsl::read_text_file(trace_file)));
        std::cout << (chart ? nsl::format_step_chart(orch->history(slice_id)) : nsl::format_events(events));
    });
    auto* descriptor = slice->add_subcommand("descriptor", "Print the slice descriptor");
    descriptor->add_option("id", slice_id, "Slice id")->required();
    descriptor->callback([&] {
        const auto d = open()->descriptor(slice_id);
        if (!d) throw nsl::IllegalTransition("order " + slice_id + " has no descriptor");
        std::cout << nsl::serialize(*d);
    });
    auto* terminate = slice->add_subcommand("terminate", "Release a slice");
    terminate->add_option("id", slice_id, "Slice id")->required();
    terminate->callback([&] {
        auto orch = open();
        orch->terminate(slice_id);
        std::cout << slice_id << " " << nsl::to_string(orch->order(slice_id).status) << "\n";
    });

    // reservations
    auto* reservations = app.add_subcommand("reservations", "Reservation ledger");
    reservations->require_subcommand(1);
    auto* exp = reservations->add_subcommand("export", "Per-PoP, per-window utilization table");
    exp->callback([&] { std::cout << nsl::utilization_table(open()->infrastructure()); });

#ifdef NSL_WITH_PORTAL
    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string host = "127.0.0.1", tenants_file;
    std::optional<int> port;
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--port", port, "Listen port (env NSL_PORT, then config)");
    serve->add_option("--tenants", tenants_file, "Tenant registry (default: <data-dir>/tenants.json)");
    serve->callback([&] {
        auto orch = open();
        const int p = port ? *port : std::stoi(env_or("NSL_PORT", std::to_string(orch->config().port)));
        const std::string tf = tenants_file.empty() ? (fs::path(data_dir) / "tenants.json").string() : tenants_file;
        nsl::ApiRouter router(*orch, nsl::load_tenants(tf));
        std::cerr << "listening on " << host << ":" << p << "\n";
        nsl::serve(router, host, p);
    });
#endif

    int rc = 0;
    process->callback([&] {
        const auto outcome = open()->process(order_id);
        print_verdict(outcome);
        if (!outcome.verdict.admitted) rc = kExitRejected;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const nsl::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return rc;
}
