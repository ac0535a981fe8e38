#include <doctest.h>

#include <algorithm>

#include "support/scenario.hpp"

using namespace nsl;
using namespace nsl::testkit;

namespace {

CatalogSources fixture_sources() {
    const std::string dir = fixtures_dir() + "/catalog/";
    return {read_json_file(dir + "vnfs.json")["vnfs"], read_json_file(dir + "nsds.json")["nsds"],
            read_json_file(dir + "templates.json")["templates"]};
}

json simple_nsd(const std::string& id, const std::vector<std::string>& nested, int count) {
    json nested_choice = json::object();
    for (const auto& n : nested) nested_choice[n] = {{"flavor_id", "f"}, {"il_id", "il-1"}};
    return {{"id", id},
            {"vnf_refs", {"v"}},
            {"nested_ns_refs", nested},
            {"flavors",
             {{{"id", "f"},
               {"active_vnfs", {"v"}},
               {"instantiation_levels",
                {{{"id", "il-1"},
                  {"vnf_plans", {{"v", {{"instance_count", count}, {"resource_level", "small"}}}}},
                  {"declared_capacity", {{"throughput_mbps", 1}, {"max_sessions", 1}, {"max_latency_ms", 1}}},
                  {"nested_triplets", nested_choice}}}}}}}};
}

json simple_vnf() {
    return {{"id", "v"}, {"function_tag", "x"}, {"resource_levels", {{"small", {{"vcpu", 2}, {"mem_gb", 4}, {"storage_gb", 10}}}}}};
}

// Independent tree walk over the descriptors: sum of count x demand of every
// leaf plan reachable from the triplet.
ResourceVector tree_demand(const Catalog& cat, const Triplet& t) {
    const auto& nsd = cat.nsds.at(t.nsd_id);
    const auto& flavor = *std::find_if(nsd.flavors.begin(), nsd.flavors.end(), [&](const auto& f) { return f.id == t.flavor_id; });
    const auto& il = *std::find_if(flavor.instantiation_levels.begin(), flavor.instantiation_levels.end(),
                                   [&](const auto& l) { return l.id == t.il_id; });
    ResourceVector sum;
    for (const auto& [vnf, plan] : il.vnf_plans) {
        sum += cat.vnfs.at(vnf).resource_levels.at(plan.resource_level) * plan.instance_count;
    }
    for (const auto& [nested, choice] : il.nested_triplets) {
        sum += tree_demand(cat, {nested, choice.flavor_id, choice.il_id});
    }
    return sum;
}

}  // namespace

TEST_CASE("empty sources give an empty catalog") {
    const Catalog cat = load_catalog(CatalogSources{});
    CHECK(cat.vnfs.empty());
    CHECK(cat.nsds.empty());
    CHECK(cat.templates.empty());
}

TEST_CASE("composite NS with two VNFs and a nested simple NS loads") {
    const Catalog cat = load_catalog(fixture_sources());
    const NsDescriptor* n = cat.find_nsd("nsd-secure-cdn");
    REQUIRE(n != nullptr);
    CHECK(n->vnf_refs.size() == 2);
    REQUIRE(n->nested_ns_refs == std::vector<std::string>{"nsd-cdn"});
    CHECK(cat.find_nsd(n->nested_ns_refs[0]) != nullptr);
    CHECK(cat.function_chain("nsd-secure-cdn") == std::vector<std::string>{"fw", "dpi", "cache"});
}

TEST_CASE("nesting cycles are rejected") {
    CatalogSources src;
    src.vnfs.push_back(simple_vnf());
    src.nsds.push_back(simple_nsd("A", {"B"}, 1));
    src.nsds.push_back(simple_nsd("B", {"A"}, 1));
    CHECK_THROWS_AS(load_catalog(src), CyclicNesting);
}

TEST_CASE("dangling references are rejected") {
    CatalogSources src;
    src.nsds.push_back(simple_nsd("A", {}, 1));
    CHECK_THROWS_AS(load_catalog(src), DanglingRef);
}

TEST_CASE("a composite level must name each nested triplet") {
    CatalogSources src;
    src.vnfs.push_back(simple_vnf());
    src.nsds.push_back(simple_nsd("B", {}, 1));
    json a = simple_nsd("A", {"B"}, 1);
    a["flavors"][0]["instantiation_levels"][0]["nested_triplets"] = json::object();
    src.nsds.push_back(a);
    const Catalog cat = load_catalog(src);
    CHECK_THROWS_AS(resolve_triplet(cat, {"A", "f", "il-1"}), NestedTripletMissing);
    CHECK_NOTHROW(resolve_triplet(cat, {"B", "f", "il-1"}));
}

TEST_CASE("resolving a simple triplet") {
    CatalogSources src;
    src.vnfs.push_back(simple_vnf());
    src.nsds.push_back(simple_nsd("one", {}, 1));
    src.nsds.push_back(simple_nsd("three", {}, 3));
    const Catalog cat = load_catalog(src);

    const auto one = resolve_triplet(cat, {"one", "f", "il-1"});
    REQUIRE(one.vnfs.size() == 1);
    CHECK(one.vnfs[0].key == "one/v");
    CHECK(one.vnfs[0].demand == ResourceVector{2, 4, 10});
    CHECK(one.aggregate() == ResourceVector{2, 4, 10});

    CHECK(resolve_triplet(cat, {"three", "f", "il-1"}).aggregate() == ResourceVector{6, 12, 30});
    CHECK_THROWS_AS(resolve_triplet(cat, {"three", "f", "il-9"}), DanglingRef);
}

TEST_CASE("resolved aggregate equals the expansion tree sum") {
    const Catalog cat = load_catalog(fixture_sources());
    int checked = 0;
    for (const auto& [id, nsd] : cat.nsds) {
        for (const auto& f : nsd.flavors) {
            for (const auto& il : f.instantiation_levels) {
                const Triplet t{id, f.id, il.id};
                CHECK(resolve_triplet(cat, t).aggregate() == tree_demand(cat, t));
                ++checked;
            }
        }
    }
    CHECK(checked == 12);

    const auto d = resolve_triplet(cat, {"nsd-secure-cdn", "standard", "il-1"});
    std::vector<std::string> keys;
    for (const auto& v : d.vnfs) keys.push_back(v.key);
    CHECK(keys == std::vector<std::string>{"nsd-secure-cdn/vnf-fw", "nsd-secure-cdn/vnf-dpi",
                                           "nsd-secure-cdn/nsd-cdn/vnf-cache"});
    REQUIRE(d.links.size() == 1);
    CHECK(d.links[0].endpoint_a == "nsd-secure-cdn/vnf-fw");
}

TEST_CASE("loading is independent of entry order") {
    const CatalogSources src = fixture_sources();
    const Catalog base = load_catalog(src);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        CatalogSources shuffled = src;
        for (json* arr : {&shuffled.vnfs, &shuffled.nsds, &shuffled.templates}) {
            std::vector<json> items(arr->begin(), arr->end());
            std::shuffle(items.begin(), items.end(), rng);
            *arr = items;
        }
        CHECK(load_catalog(shuffled) == base);
    }
}

TEST_CASE("catalog json round-trips") {
    const Catalog cat = load_catalog(fixtures_dir() + "/catalog");
    const json j = to_json(cat);
    CHECK(load_catalog(CatalogSources{j["vnfs"], j["nsds"], j["templates"]}) == cat);
}

TEST_CASE("plan invariants are enforced on load") {
    CatalogSources src;
    src.vnfs.push_back(simple_vnf());
    json n = simple_nsd("A", {}, 1);
    n["flavors"][0]["instantiation_levels"][0]["vnf_plans"]["v"]["reliability"] = {{"backup_count", 1}};
    src.nsds.push_back(n);
    CHECK_THROWS_AS(load_catalog(src), ParseError);
}
