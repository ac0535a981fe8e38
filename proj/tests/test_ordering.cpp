#include <doctest.h>

#include <set>

#include "support/scenario.hpp"

using namespace nsl;
using namespace nsl::testkit;

namespace {

const Catalog& fixture_catalog() {
    static const Catalog cat = load_catalog(fixtures_dir() + "/catalog");
    return cat;
}

// Paths whose values differ; objects recurse, anything else compares whole.
void diff_paths(const json& a, const json& b, const std::string& prefix, std::set<std::string>& out) {
    if (a.is_object() && b.is_object()) {
        std::set<std::string> keys;
        for (const auto& [k, v] : a.items()) keys.insert(k);
        for (const auto& [k, v] : b.items()) keys.insert(k);
        for (const auto& k : keys) {
            const std::string p = prefix.empty() ? k : prefix + "." + k;
            diff_paths(a.value(k, json()), b.value(k, json()), p, out);
        }
        return;
    }
    if (a != b) out.insert(prefix);
}

}  // namespace

TEST_CASE("an order without overrides carries the template defaults") {
    const auto& cat = fixture_catalog();
    const ServiceOrder o = submit_order(cat, "tenant-a", "embb", {}, "ord-1", 5);
    CHECK(o.status == OrderStatus::Submitted);
    CHECK(o.created_at == 5);
    CHECK(effective_requirements(cat, o) == cat.templates.at("embb").defaults);
}

TEST_CASE("in-range overrides are applied") {
    const auto& cat = fixture_catalog();
    const ServiceOrder o =
        submit_order(cat, "tenant-a", "embb", {{"network_reqs.performance.throughput_mbps", 500}}, "ord-1", 0);
    CHECK(effective_requirements(cat, o).network_reqs.performance.throughput_mbps == 500.0);
}

TEST_CASE("policy violations carry the attribute path") {
    const auto& cat = fixture_catalog();
    try {
        submit_order(cat, "t", "embb", {{"network_reqs.performance.max_latency_ms", 1}}, "ord-1", 0);
        FAIL("expected OutOfRange");
    } catch (const OutOfRange& e) {
        CHECK(e.path() == "network_reqs.performance.max_latency_ms");
    }
    CHECK_THROWS_AS(submit_order(cat, "t", "embb", {{"topology", json::array({"cache"})}}, "ord-1", 0),
                    ForbiddenAttribute);
    CHECK_THROWS_AS(submit_order(cat, "t", "embb", {{"geo_reqs.cache", json::array({"east"})}}, "ord-1", 0),
                    OutOfRange);
    CHECK_THROWS_AS(submit_order(cat, "t", "nope", {}, "ord-1", 0), UnknownTemplate);
    // Boundaries are inclusive.
    CHECK_NOTHROW(submit_order(cat, "t", "embb", {{"network_reqs.performance.max_latency_ms", 10}}, "ord-1", 0));
    CHECK_NOTHROW(submit_order(cat, "t", "embb", {{"network_reqs.performance.max_latency_ms", 50}}, "ord-1", 0));
}

TEST_CASE("overlay changes exactly the overridden paths") {
    const auto& tmpl = fixture_catalog().templates.at("embb");
    const Overrides o{{"network_reqs.performance.throughput_mbps", 250},
                      {"network_reqs.performance.max_sessions", 3000},
                      {"geo_reqs.cache", json::array({"south"})}};
    std::set<std::string> changed;
    diff_paths(to_json(tmpl.defaults), to_json(effective_requirements(tmpl, o)), "", changed);
    std::set<std::string> expected;
    for (const auto& [path, v] : o) expected.insert(path);
    CHECK(changed == expected);
}

TEST_CASE("overlay is idempotent and leaves other paths alone") {
    const json doc = to_json(fixture_catalog().templates.at("embb").defaults);
    const Overrides o{{"network_reqs.performance.max_latency_ms", 30}};
    const json once = overlay(doc, o);
    CHECK(overlay(once, o) == once);
    CHECK(overlay(doc, {}) == doc);
    CHECK(once["geo_reqs"] == doc["geo_reqs"]);
}

TEST_CASE("only declared transitions are accepted") {
    using S = OrderStatus;
    const std::set<std::pair<S, S>> declared{{S::Submitted, S::Designed}, {S::Submitted, S::Rejected},
                                             {S::Designed, S::Admitted},  {S::Designed, S::Rejected},
                                             {S::Admitted, S::Reserved},  {S::Admitted, S::Designed},
                                             {S::Reserved, S::Prepared},  {S::Prepared, S::Active},
                                             {S::Prepared, S::Terminated}, {S::Active, S::Terminated}};
    for (S from : all_order_statuses()) {
        for (S to : all_order_statuses()) {
            ServiceOrder o;
            o.status = from;
            const bool legal = declared.contains({from, to});
            CHECK(is_legal_transition(from, to) == legal);
            if (legal) {
                CHECK_NOTHROW(o.transition(to));
                CHECK(o.status == to);
            } else {
                CHECK_THROWS_AS(o.transition(to), IllegalTransition);
                CHECK(o.status == from);
            }
        }
    }
}

TEST_CASE("orders round-trip through json") {
    const auto& cat = fixture_catalog();
    ServiceOrder o = submit_order(cat, "tenant-a", "embb", {{"network_reqs.performance.throughput_mbps", 700}}, "ord-9", 42);
    o.parent_order_id = "ord-3";
    CHECK(order_from_json(to_json(o)) == o);
    o.reject("geolocation", "no pop");
    CHECK(o.status == OrderStatus::Rejected);
    CHECK(order_from_json(to_json(o)) == o);
}

TEST_CASE("order book serializes mutations of one order") {
    OrderBook book;
    ServiceOrder o;
    o.id = book.next_id();
    book.insert(o);
    CHECK(book.get(o.id).has_value());
    CHECK_FALSE(book.get("missing").has_value());
    CHECK_THROWS_AS(book.mutate("missing", [](ServiceOrder&) {}), UnknownOrder);
    book.mutate(o.id, [](ServiceOrder& s) { s.transition(OrderStatus::Designed); });
    CHECK(book.get(o.id)->status == OrderStatus::Designed);
}
