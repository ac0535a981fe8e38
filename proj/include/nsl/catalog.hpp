#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsl/json_util.hpp"
#include "nsl/resources.hpp"

namespace nsl {

struct ConfigPrimitive {
    std::string name;
    std::vector<std::string> params;
    bool operator==(const ConfigPrimitive&) const = default;
};

struct VnfDescriptor {
    std::string id;
    std::string function_tag;
    std::map<std::string, ResourceVector> resource_levels;
    std::vector<ConfigPrimitive> config_primitives;
    bool operator==(const VnfDescriptor&) const = default;
};

// Connects two VNFs of the same NS descriptor.
struct VirtualLinkTemplate {
    std::string id;
    std::string endpoint_a;
    std::string endpoint_b;
    bool operator==(const VirtualLinkTemplate&) const = default;
};

enum class AffinityKind { SamePop, DifferentPop };

// Binary constraint between the instance group of the owning plan and the
// instance group of `peer` (which may be the owning VNF itself).
struct AffinityRule {
    AffinityKind kind = AffinityKind::SamePop;
    std::string peer;
    bool operator==(const AffinityRule&) const = default;
};

// Extension block kept beside the standard plan fields. The last
// `backup_count` instances of a plan are backups.
struct ReliabilityReq {
    int backup_count = 0;
    bool requires_ha_pop = false;
    bool operator==(const ReliabilityReq&) const = default;
};

struct VnfPlan {
    int instance_count = 1;
    std::string resource_level;
    std::vector<AffinityRule> affinity_rules;
    ReliabilityReq reliability;
    bool operator==(const VnfPlan&) const = default;
};

struct LinkPlan {
    std::int64_t bitrate_mbps = 0;
    int reliability_class = 1;
    bool operator==(const LinkPlan&) const = default;
};

struct NestedChoice {
    std::string flavor_id;
    std::string il_id;
    bool operator==(const NestedChoice&) const = default;
};

struct NsInstantiationLevel {
    std::string id;
    std::map<std::string, VnfPlan> vnf_plans;
    std::map<std::string, LinkPlan> link_plans;
    PerformanceVector declared_capacity;
    // Composite descriptors name the deployment option of each nested NS.
    std::map<std::string, NestedChoice> nested_triplets;
    bool operator==(const NsInstantiationLevel&) const = default;
};

struct NsFlavor {
    std::string id;
    std::vector<std::string> active_vnfs;
    std::vector<std::string> active_links;
    std::set<std::string> feature_tags;
    std::vector<NsInstantiationLevel> instantiation_levels;  // sorted by id

    const NsInstantiationLevel* find_il(const std::string& il_id) const;
    bool operator==(const NsFlavor&) const = default;
};

struct NsDescriptor {
    std::string id;
    std::vector<std::string> vnf_refs;
    std::vector<std::string> nested_ns_refs;
    std::vector<VirtualLinkTemplate> virtual_links;
    std::vector<NsFlavor> flavors;  // sorted by id

    const NsFlavor* find_flavor(const std::string& flavor_id) const;
    bool operator==(const NsDescriptor&) const = default;
};

struct Triplet {
    std::string nsd_id;
    std::string flavor_id;
    std::string il_id;
    friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

std::string to_string(const Triplet& t);

struct NslInstantiationLevel {
    std::string id;
    std::vector<Triplet> triplets;
    bool operator==(const NslInstantiationLevel&) const = default;
};

// Tenant-adjustable bound for one attribute path: a numeric interval, an
// enumerated set of admissible values, or both.
struct AllowedRange {
    std::optional<double> min;
    std::optional<double> max;
    std::vector<json> choices;
    bool operator==(const AllowedRange&) const = default;
};

struct NetworkReqs {
    PerformanceVector performance;
    std::set<std::string> functional;
    bool operator==(const NetworkReqs&) const = default;
};

struct OperationalReqs {
    std::set<std::string> visible_metrics;
    std::set<std::string> allowed_actions;
    bool operator==(const OperationalReqs&) const = default;
};

// Inter-NS connectivity declared at template level between two topology
// nodes.
struct TemplateLink {
    std::string id;
    std::string from_node;
    std::string to_node;
    std::int64_t bitrate_mbps = 0;
    int reliability_class = 1;
    bool operator==(const TemplateLink&) const = default;
};

struct SliceRequirements {
    std::vector<std::string> topology;
    NetworkReqs network_reqs;
    std::vector<TimeWindow> temporal_reqs;
    std::map<std::string, std::set<std::string>> geo_reqs;
    OperationalReqs operational_reqs;
    std::vector<TemplateLink> virtual_links;
    bool operator==(const SliceRequirements&) const = default;
};

struct ServiceTemplate {
    std::string id;
    std::string description;
    SliceRequirements defaults;
    std::map<std::string, AllowedRange> customizable;
    bool operator==(const ServiceTemplate&) const = default;
};

// Immutable after load; entries are kept in canonical id order.
class Catalog {
public:
    std::map<std::string, VnfDescriptor> vnfs;
    std::map<std::string, NsDescriptor> nsds;
    std::map<std::string, ServiceTemplate> templates;

    const VnfDescriptor* find_vnf(const std::string& id) const;
    const NsDescriptor* find_nsd(const std::string& id) const;
    const ServiceTemplate* find_template(const std::string& id) const;

    // Function tags of an NS descriptor: its own VNFs in declaration order,
    // followed by each nested NS's chain.
    std::vector<std::string> function_chain(const std::string& nsd_id) const;

    bool operator==(const Catalog&) const = default;
};

struct CatalogSources {
    json vnfs = json::array();
    json nsds = json::array();
    json templates = json::array();
};

// Builds and cross-validates a catalog. Throws ParseError, DanglingRef,
// CyclicNesting.
Catalog load_catalog(const CatalogSources& sources);
// Reads vnfs.json, nsds.json and templates.json from `dir`; absent files are
// treated as empty.
Catalog load_catalog(const std::string& dir);

json to_json(const Catalog& cat);
json to_json(const VnfDescriptor& v);
json to_json(const NsDescriptor& n);
json to_json(const ServiceTemplate& t);
json to_json(const SliceRequirements& r);
json to_json(const AllowedRange& r);
json to_json(const Triplet& t);
json to_json(const NslInstantiationLevel& il);

SliceRequirements requirements_from_json(const json& j, const std::string& ctx);
Triplet triplet_from_json(const json& j);
NslInstantiationLevel nsl_il_from_json(const json& j);

// --- Resolution -----------------------------------------------------------

struct ResolvedAffinity {
    AffinityKind kind = AffinityKind::SamePop;
    std::string peer_key;
    bool operator==(const ResolvedAffinity&) const = default;
};

// One VNF plan after expansion. `key` is the descriptor path qualified VNF
// id, e.g. "nsd_a/vnf_x" or "nsd_a/nsd_nested/vnf_y".
struct ResolvedVnf {
    std::string key;
    std::string vnf_id;
    std::string function_tag;
    int instance_count = 1;
    std::string resource_level;
    ResourceVector demand;  // per instance
    std::vector<ResolvedAffinity> affinity;
    ReliabilityReq reliability;
    bool operator==(const ResolvedVnf&) const = default;
};

struct ResolvedLink {
    std::string key;
    std::string endpoint_a;  // ResolvedVnf key
    std::string endpoint_b;
    std::int64_t bitrate_mbps = 0;
    int reliability_class = 1;
    bool operator==(const ResolvedLink&) const = default;
};

struct ResolvedDeployment {
    std::vector<ResolvedVnf> vnfs;
    std::vector<ResolvedLink> links;

    ResourceVector aggregate() const;
    const ResolvedVnf* find(const std::string& key) const;
    bool operator==(const ResolvedDeployment&) const = default;
};

// Flattens a triplet, expanding nested NSs with the triplets their parent
// level designates. Throws DanglingRef, NestedTripletMissing.
ResolvedDeployment resolve_triplet(const Catalog& cat, const Triplet& t);
ResolvedDeployment resolve_triplet(const Catalog& cat, const Triplet& t,
                                   const std::string& key_prefix);

json to_json(const ResolvedDeployment& d);

}  // namespace nsl
