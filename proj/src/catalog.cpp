#include "nsl/catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>

namespace nsl {

const NsInstantiationLevel* NsFlavor::find_il(const std::string& il_id) const {
    for (const auto& il : instantiation_levels) {
        if (il.id == il_id) return &il;
    }
    return nullptr;
}

const NsFlavor* NsDescriptor::find_flavor(const std::string& flavor_id) const {
    for (const auto& f : flavors) {
        if (f.id == flavor_id) return &f;
    }
    return nullptr;
}

std::string to_string(const Triplet& t) {
    return "(" + t.nsd_id + ", " + t.flavor_id + ", " + t.il_id + ")";
}

const VnfDescriptor* Catalog::find_vnf(const std::string& id) const {
    auto it = vnfs.find(id);
    return it == vnfs.end() ? nullptr : &it->second;
}

const NsDescriptor* Catalog::find_nsd(const std::string& id) const {
    auto it = nsds.find(id);
    return it == nsds.end() ? nullptr : &it->second;
}

const ServiceTemplate* Catalog::find_template(const std::string& id) const {
    auto it = templates.find(id);
    return it == templates.end() ? nullptr : &it->second;
}

std::vector<std::string> Catalog::function_chain(const std::string& nsd_id) const {
    const NsDescriptor* nsd = find_nsd(nsd_id);
    if (nsd == nullptr) throw DanglingRef("unknown NS descriptor '" + nsd_id + "'");
    std::vector<std::string> chain;
    for (const auto& v : nsd->vnf_refs) chain.push_back(find_vnf(v)->function_tag);
    for (const auto& n : nsd->nested_ns_refs) {
        auto sub = function_chain(n);
        chain.insert(chain.end(), sub.begin(), sub.end());
    }
    return chain;
}

// --- parsing --------------------------------------------------------------

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void require_unique(const std::vector<std::string>& v, const std::string& ctx) {
    std::set<std::string> seen;
    for (const auto& s : v) {
        if (!seen.insert(s).second) throw ParseError(ctx + ": duplicate entry '" + s + "'");
    }
}

AffinityKind affinity_from_string(const std::string& s, const std::string& ctx) {
    if (s == "SAME_POP") return AffinityKind::SamePop;
    if (s == "DIFFERENT_POP") return AffinityKind::DifferentPop;
    throw ParseError(ctx + ": unknown affinity kind '" + s + "'");
}

std::string to_string(AffinityKind k) { return k == AffinityKind::SamePop ? "SAME_POP" : "DIFFERENT_POP"; }

VnfDescriptor parse_vnf(const json& j) {
    VnfDescriptor v;
    v.id = field<std::string>(j, "id", "vnf");
    const std::string ctx = "vnf '" + v.id + "'";
    v.function_tag = field<std::string>(j, "function_tag", ctx);
    if (v.function_tag.empty()) throw ParseError(ctx + ": empty function_tag");
    for (const auto& [level, rv] : member_object(j, "resource_levels", ctx).items()) {
        v.resource_levels[level] = resource_vector_from_json(rv, ctx + " level '" + level + "'");
    }
    if (v.resource_levels.empty()) throw ParseError(ctx + ": needs at least one resource level");
    for (const auto& pj : field_or<json>(j, "config_primitives", json::array(), ctx)) {
        v.config_primitives.push_back({field<std::string>(pj, "name", ctx),
                                       field_or<std::vector<std::string>>(pj, "params", {}, ctx)});
    }
    return v;
}

NsInstantiationLevel parse_il(const json& j, const std::string& parent) {
    NsInstantiationLevel il;
    il.id = field<std::string>(j, "id", parent);
    const std::string ctx = parent + " il '" + il.id + "'";
    for (const auto& [vnf, pj] : member_object(j, "vnf_plans", ctx).items()) {
        const std::string pctx = ctx + " plan '" + vnf + "'";
        VnfPlan plan;
        plan.instance_count = field<int>(pj, "instance_count", pctx);
        plan.resource_level = field<std::string>(pj, "resource_level", pctx);
        for (const auto& aj : field_or<json>(pj, "affinity_rules", json::array(), pctx)) {
            plan.affinity_rules.push_back(
                {affinity_from_string(field<std::string>(aj, "kind", pctx), pctx),
                 field<std::string>(aj, "peer", pctx)});
        }
        if (pj.contains("reliability")) {
            const json& rj = pj["reliability"];
            plan.reliability.backup_count = field_or<int>(rj, "backup_count", 0, pctx);
            plan.reliability.requires_ha_pop = field_or<bool>(rj, "requires_ha_pop", false, pctx);
        }
        if (plan.instance_count < 1) throw ParseError(pctx + ": instance_count must be >= 1");
        if (plan.reliability.backup_count < 0 ||
            plan.reliability.backup_count >= plan.instance_count) {
            throw ParseError(pctx + ": backup_count must be in [0, instance_count)");
        }
        il.vnf_plans[vnf] = std::move(plan);
    }
    for (const auto& [link, lj] : member_object_or_empty(j, "link_plans", ctx).items()) {
        const std::string lctx = ctx + " link plan '" + link + "'";
        LinkPlan lp{field<std::int64_t>(lj, "bitrate_mbps", lctx),
                    field_or<int>(lj, "reliability_class", 1, lctx)};
        if (lp.bitrate_mbps < 0) throw ParseError(lctx + ": negative bitrate");
        if (lp.reliability_class < 1 || lp.reliability_class > 3) {
            throw ParseError(lctx + ": reliability_class must be in 1..3");
        }
        il.link_plans[link] = lp;
    }
    il.declared_capacity = performance_from_json(field<json>(j, "declared_capacity", ctx), ctx);
    for (const auto& [nested, nj] : member_object_or_empty(j, "nested_triplets", ctx).items()) {
        il.nested_triplets[nested] = {field<std::string>(nj, "flavor_id", ctx),
                                      field<std::string>(nj, "il_id", ctx)};
    }
    return il;
}

NsDescriptor parse_nsd(const json& j) {
    NsDescriptor n;
    n.id = field<std::string>(j, "id", "nsd");
    const std::string ctx = "nsd '" + n.id + "'";
    n.vnf_refs = field_or<std::vector<std::string>>(j, "vnf_refs", {}, ctx);
    n.nested_ns_refs = field_or<std::vector<std::string>>(j, "nested_ns_refs", {}, ctx);
    require_unique(n.vnf_refs, ctx + " vnf_refs");
    require_unique(n.nested_ns_refs, ctx + " nested_ns_refs");
    for (const auto& lj : field_or<json>(j, "virtual_links", json::array(), ctx)) {
        n.virtual_links.push_back({field<std::string>(lj, "id", ctx),
                                   field<std::string>(lj, "endpoint_a", ctx),
                                   field<std::string>(lj, "endpoint_b", ctx)});
    }
    for (const auto& fj : field<json>(j, "flavors", ctx)) {
        NsFlavor f;
        f.id = field<std::string>(fj, "id", ctx);
        const std::string fctx = ctx + " flavor '" + f.id + "'";
        f.active_vnfs = field_or<std::vector<std::string>>(fj, "active_vnfs", {}, fctx);
        f.active_links = field_or<std::vector<std::string>>(fj, "active_links", {}, fctx);
        for (const auto& t : field_or<std::vector<std::string>>(fj, "feature_tags", {}, fctx)) {
            f.feature_tags.insert(t);
        }
        for (const auto& ij : field<json>(fj, "instantiation_levels", fctx)) {
            f.instantiation_levels.push_back(parse_il(ij, fctx));
        }
        std::sort(f.instantiation_levels.begin(), f.instantiation_levels.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        n.flavors.push_back(std::move(f));
    }
    std::sort(n.flavors.begin(), n.flavors.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return n;
}

AllowedRange parse_range(const json& j, const std::string& ctx) {
    AllowedRange r;
    if (j.contains("min")) r.min = field<double>(j, "min", ctx);
    if (j.contains("max")) r.max = field<double>(j, "max", ctx);
    if (j.contains("choices")) {
        for (const auto& c : field<json>(j, "choices", ctx)) r.choices.push_back(c);
    }
    const bool has_interval = r.min || r.max;
    if (!has_interval && r.choices.empty()) throw ParseError(ctx + ": empty allowed range");
    if (r.min && r.max && *r.min > *r.max) throw ParseError(ctx + ": min > max");
    return r;
}

std::set<std::string> string_set(const json& j, const char* key, const std::string& ctx) {
    auto v = field_or<std::vector<std::string>>(j, key, {}, ctx);
    return {v.begin(), v.end()};
}

ServiceTemplate parse_template(const json& j) {
    ServiceTemplate t;
    t.id = field<std::string>(j, "id", "template");
    const std::string ctx = "template '" + t.id + "'";
    t.description = field_or<std::string>(j, "description", "", ctx);
    t.defaults = requirements_from_json(j, ctx);
    const json doc = to_json(t.defaults);
    for (const auto& [path, rj] : member_object_or_empty(j, "customizable", ctx).items()) {
        const std::string rctx = ctx + " customizable '" + path + "'";
        if (lookup_path(doc, path) == nullptr) {
            throw ParseError(rctx + ": path does not exist in the template");
        }
        t.customizable[path] = parse_range(rj, rctx);
    }
    return t;
}

// --- cross validation -------------------------------------------------------

void validate_nsd(const Catalog& cat, const NsDescriptor& n) {
    const std::string ctx = "nsd '" + n.id + "'";
    for (const auto& v : n.vnf_refs) {
        if (!cat.find_vnf(v)) throw DanglingRef(ctx + ": unknown vnf '" + v + "'");
    }
    for (const auto& sub : n.nested_ns_refs) {
        if (!cat.find_nsd(sub)) throw DanglingRef(ctx + ": unknown nested nsd '" + sub + "'");
    }
    std::vector<std::string> link_ids;
    for (const auto& l : n.virtual_links) {
        if (!contains(n.vnf_refs, l.endpoint_a) || !contains(n.vnf_refs, l.endpoint_b)) {
            throw DanglingRef(ctx + " link '" + l.id + "': endpoint is not a vnf of the descriptor");
        }
        link_ids.push_back(l.id);
    }
    require_unique(link_ids, ctx + " virtual_links");
    if (n.flavors.empty()) throw ParseError(ctx + ": needs at least one flavor");
    std::vector<std::string> flavor_ids;
    for (const auto& f : n.flavors) flavor_ids.push_back(f.id);
    require_unique(flavor_ids, ctx + " flavors");

    for (const auto& f : n.flavors) {
        const std::string fctx = ctx + " flavor '" + f.id + "'";
        if (f.active_vnfs.empty() && n.nested_ns_refs.empty()) {
            throw ParseError(fctx + ": active set is empty");
        }
        for (const auto& v : f.active_vnfs) {
            if (!contains(n.vnf_refs, v)) throw DanglingRef(fctx + ": inactive vnf '" + v + "'");
        }
        for (const auto& l : f.active_links) {
            if (!contains(link_ids, l)) throw DanglingRef(fctx + ": unknown link '" + l + "'");
        }
        if (f.instantiation_levels.empty()) throw ParseError(fctx + ": needs at least one level");
        std::vector<std::string> il_ids;
        for (const auto& il : f.instantiation_levels) il_ids.push_back(il.id);
        require_unique(il_ids, fctx + " instantiation_levels");

        for (const auto& il : f.instantiation_levels) {
            const std::string ictx = fctx + " il '" + il.id + "'";
            for (const auto& [vnf, plan] : il.vnf_plans) {
                if (!contains(f.active_vnfs, vnf)) {
                    throw DanglingRef(ictx + ": plan for vnf '" + vnf + "' outside the flavor");
                }
                const VnfDescriptor* vd = cat.find_vnf(vnf);
                if (!vd->resource_levels.contains(plan.resource_level)) {
                    throw DanglingRef(ictx + ": unknown resource level '" + plan.resource_level + "'");
                }
                for (const auto& rule : plan.affinity_rules) {
                    if (!il.vnf_plans.contains(rule.peer)) {
                        throw DanglingRef(ictx + ": affinity peer '" + rule.peer + "' has no plan");
                    }
                }
            }
            for (const auto& [link, lp] : il.link_plans) {
                if (!contains(f.active_links, link)) {
                    throw DanglingRef(ictx + ": plan for link '" + link + "' outside the flavor");
                }
                auto it = std::find_if(n.virtual_links.begin(), n.virtual_links.end(),
                                       [&](const auto& l) { return l.id == link; });
                if (!il.vnf_plans.contains(it->endpoint_a) || !il.vnf_plans.contains(it->endpoint_b)) {
                    throw DanglingRef(ictx + ": link '" + link + "' endpoint has no plan");
                }
            }
            for (const auto& [nested, choice] : il.nested_triplets) {
                if (!contains(n.nested_ns_refs, nested)) {
                    throw DanglingRef(ictx + ": '" + nested + "' is not a nested NS");
                }
                const NsDescriptor* sub = cat.find_nsd(nested);
                const NsFlavor* sf = sub->find_flavor(choice.flavor_id);
                if (sf == nullptr || sf->find_il(choice.il_id) == nullptr) {
                    throw DanglingRef(ictx + ": nested triplet for '" + nested + "' does not resolve");
                }
            }
        }
    }
}

void check_acyclic(const Catalog& cat) {
    enum class Mark { None, Active, Done };
    std::map<std::string, Mark> mark;
    std::function<void(const std::string&, std::vector<std::string>&)> visit =
        [&](const std::string& id, std::vector<std::string>& stack) {
            auto& m = mark[id];
            if (m == Mark::Done) return;
            if (m == Mark::Active) {
                std::string cycle;
                for (const auto& s : stack) cycle += s + " -> ";
                throw CyclicNesting("nested NS cycle: " + cycle + id);
            }
            m = Mark::Active;
            stack.push_back(id);
            for (const auto& sub : cat.nsds.at(id).nested_ns_refs) visit(sub, stack);
            stack.pop_back();
            mark[id] = Mark::Done;
        };
    for (const auto& [id, _] : cat.nsds) {
        std::vector<std::string> stack;
        visit(id, stack);
    }
}

void validate_template(const ServiceTemplate& t) {
    const std::string ctx = "template '" + t.id + "'";
    if (t.defaults.topology.empty()) throw ParseError(ctx + ": empty topology");
    for (const auto& [tag, regions] : t.defaults.geo_reqs) {
        if (!contains(t.defaults.topology, tag)) {
            throw ParseError(ctx + ": geo requirement for '" + tag + "' not in topology");
        }
    }
}

json entries_of(const json& j, const char* wrapper) {
    if (j.is_null()) return json::array();
    if (j.is_object() && j.contains(wrapper)) return j[wrapper];
    if (!j.is_array()) throw ParseError(std::string(wrapper) + ": expected an array of entries");
    return j;
}

}  // namespace

SliceRequirements requirements_from_json(const json& j, const std::string& ctx) {
    SliceRequirements r;
    r.topology = field<std::vector<std::string>>(j, "topology", ctx);
    const json nj = field<json>(j, "network_reqs", ctx);
    r.network_reqs.performance = performance_from_json(field<json>(nj, "performance", ctx), ctx);
    r.network_reqs.functional = string_set(nj, "functional", ctx);
    for (const auto& wj : field_or<json>(j, "temporal_reqs", json::array(), ctx)) {
        r.temporal_reqs.push_back(window_from_json(wj, ctx));
    }
    for (const auto& [tag, regions] : member_object_or_empty(j, "geo_reqs", ctx).items()) {
        auto v = regions.get<std::vector<std::string>>();
        r.geo_reqs[tag] = {v.begin(), v.end()};
    }
    const json oj = field_or<json>(j, "operational_reqs", json::object(), ctx);
    r.operational_reqs.visible_metrics = string_set(oj, "visible_metrics", ctx);
    r.operational_reqs.allowed_actions = string_set(oj, "allowed_actions", ctx);
    for (const auto& lj : field_or<json>(j, "virtual_links", json::array(), ctx)) {
        TemplateLink l{field<std::string>(lj, "id", ctx), field<std::string>(lj, "from", ctx),
                       field<std::string>(lj, "to", ctx), field<std::int64_t>(lj, "bitrate_mbps", ctx),
                       field_or<int>(lj, "reliability_class", 1, ctx)};
        if (!contains(r.topology, l.from_node) || !contains(r.topology, l.to_node)) {
            throw ParseError(ctx + ": template link '" + l.id + "' endpoint not in topology");
        }
        r.virtual_links.push_back(std::move(l));
    }
    return r;
}

Catalog load_catalog(const CatalogSources& sources) {
    Catalog cat;
    for (const auto& vj : entries_of(sources.vnfs, "vnfs")) {
        auto v = parse_vnf(vj);
        const std::string id = v.id;
        if (!cat.vnfs.emplace(id, std::move(v)).second) throw ParseError("duplicate vnf '" + id + "'");
    }
    for (const auto& nj : entries_of(sources.nsds, "nsds")) {
        auto n = parse_nsd(nj);
        const std::string id = n.id;
        if (!cat.nsds.emplace(id, std::move(n)).second) throw ParseError("duplicate nsd '" + id + "'");
    }
    for (const auto& tj : entries_of(sources.templates, "templates")) {
        auto t = parse_template(tj);
        const std::string id = t.id;
        if (!cat.templates.emplace(id, std::move(t)).second) {
            throw ParseError("duplicate template '" + id + "'");
        }
    }
    for (const auto& [_, n] : cat.nsds) validate_nsd(cat, n);
    check_acyclic(cat);
    for (const auto& [_, t] : cat.templates) validate_template(t);
    return cat;
}

Catalog load_catalog(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ParseError("catalog directory '" + dir + "' not found");
    auto read = [&](const char* name) -> json {
        const fs::path p = fs::path(dir) / name;
        return fs::exists(p) ? read_json_file(p.string()) : json::array();
    };
    return load_catalog(CatalogSources{read("vnfs.json"), read("nsds.json"), read("templates.json")});
}

// --- serialization ----------------------------------------------------------

json to_json(const VnfDescriptor& v) {
    json levels = json::object();
    for (const auto& [k, r] : v.resource_levels) levels[k] = to_json(r);
    json prims = json::array();
    for (const auto& p : v.config_primitives) prims.push_back({{"name", p.name}, {"params", p.params}});
    return json{{"id", v.id},
                {"function_tag", v.function_tag},
                {"resource_levels", levels},
                {"config_primitives", prims}};
}

json to_json(const NsDescriptor& n) {
    json links = json::array();
    for (const auto& l : n.virtual_links) {
        links.push_back({{"id", l.id}, {"endpoint_a", l.endpoint_a}, {"endpoint_b", l.endpoint_b}});
    }
    json flavors = json::array();
    for (const auto& f : n.flavors) {
        json ils = json::array();
        for (const auto& il : f.instantiation_levels) {
            json plans = json::object();
            for (const auto& [vnf, p] : il.vnf_plans) {
                json rules = json::array();
                for (const auto& r : p.affinity_rules) {
                    rules.push_back({{"kind", to_string(r.kind)}, {"peer", r.peer}});
                }
                plans[vnf] = {{"instance_count", p.instance_count},
                              {"resource_level", p.resource_level},
                              {"affinity_rules", rules},
                              {"reliability",
                               {{"backup_count", p.reliability.backup_count},
                                {"requires_ha_pop", p.reliability.requires_ha_pop}}}};
            }
            json lplans = json::object();
            for (const auto& [l, lp] : il.link_plans) {
                lplans[l] = {{"bitrate_mbps", lp.bitrate_mbps}, {"reliability_class", lp.reliability_class}};
            }
            json nested = json::object();
            for (const auto& [k, c] : il.nested_triplets) {
                nested[k] = {{"flavor_id", c.flavor_id}, {"il_id", c.il_id}};
            }
            ils.push_back({{"id", il.id},
                           {"vnf_plans", plans},
                           {"link_plans", lplans},
                           {"declared_capacity", to_json(il.declared_capacity)},
                           {"nested_triplets", nested}});
        }
        flavors.push_back({{"id", f.id},
                           {"active_vnfs", f.active_vnfs},
                           {"active_links", f.active_links},
                           {"feature_tags", f.feature_tags},
                           {"instantiation_levels", ils}});
    }
    return json{{"id", n.id},
                {"vnf_refs", n.vnf_refs},
                {"nested_ns_refs", n.nested_ns_refs},
                {"virtual_links", links},
                {"flavors", flavors}};
}

json to_json(const SliceRequirements& r) {
    json windows = json::array();
    for (const auto& w : r.temporal_reqs) windows.push_back(to_json(w));
    json geo = json::object();
    for (const auto& [tag, regions] : r.geo_reqs) geo[tag] = regions;
    json links = json::array();
    for (const auto& l : r.virtual_links) {
        links.push_back({{"id", l.id},
                         {"from", l.from_node},
                         {"to", l.to_node},
                         {"bitrate_mbps", l.bitrate_mbps},
                         {"reliability_class", l.reliability_class}});
    }
    return json{{"topology", r.topology},
                {"network_reqs",
                 {{"performance", to_json(r.network_reqs.performance)},
                  {"functional", r.network_reqs.functional}}},
                {"temporal_reqs", windows},
                {"geo_reqs", geo},
                {"operational_reqs",
                 {{"visible_metrics", r.operational_reqs.visible_metrics},
                  {"allowed_actions", r.operational_reqs.allowed_actions}}},
                {"virtual_links", links}};
}

json to_json(const AllowedRange& r) {
    json j = json::object();
    if (r.min) j["min"] = *r.min;
    if (r.max) j["max"] = *r.max;
    if (!r.choices.empty()) j["choices"] = r.choices;
    return j;
}

json to_json(const ServiceTemplate& t) {
    json j = to_json(t.defaults);
    j["id"] = t.id;
    j["description"] = t.description;
    json custom = json::object();
    for (const auto& [path, range] : t.customizable) custom[path] = to_json(range);
    j["customizable"] = custom;
    return j;
}

json to_json(const Catalog& cat) {
    json vnfs = json::array(), nsds = json::array(), templates = json::array();
    for (const auto& [_, v] : cat.vnfs) vnfs.push_back(to_json(v));
    for (const auto& [_, n] : cat.nsds) nsds.push_back(to_json(n));
    for (const auto& [_, t] : cat.templates) templates.push_back(to_json(t));
    return json{{"vnfs", vnfs}, {"nsds", nsds}, {"templates", templates}};
}

json to_json(const Triplet& t) {
    return json{{"nsd_id", t.nsd_id}, {"flavor_id", t.flavor_id}, {"il_id", t.il_id}};
}

Triplet triplet_from_json(const json& j) {
    return {field<std::string>(j, "nsd_id", "triplet"), field<std::string>(j, "flavor_id", "triplet"),
            field<std::string>(j, "il_id", "triplet")};
}

json to_json(const NslInstantiationLevel& il) {
    json ts = json::array();
    for (const auto& t : il.triplets) ts.push_back(to_json(t));
    return json{{"id", il.id}, {"triplets", ts}};
}

NslInstantiationLevel nsl_il_from_json(const json& j) {
    NslInstantiationLevel il;
    il.id = field<std::string>(j, "id", "nsl-il");
    for (const auto& tj : field<json>(j, "triplets", "nsl-il '" + il.id + "'")) {
        il.triplets.push_back(triplet_from_json(tj));
    }
    if (il.triplets.empty()) throw ParseError("nsl-il '" + il.id + "': needs at least one triplet");
    return il;
}

// --- resolution ---------------------------------------------------------------

ResourceVector ResolvedDeployment::aggregate() const {
    ResourceVector total;
    for (const auto& v : vnfs) total += v.demand * v.instance_count;
    return total;
}

const ResolvedVnf* ResolvedDeployment::find(const std::string& key) const {
    for (const auto& v : vnfs) {
        if (v.key == key) return &v;
    }
    return nullptr;
}

namespace {

void expand(const Catalog& cat, const Triplet& t, const std::string& prefix, ResolvedDeployment& out,
            int depth) {
    if (depth > 64) throw CyclicNesting("nesting too deep at " + to_string(t));
    const NsDescriptor* nsd = cat.find_nsd(t.nsd_id);
    if (nsd == nullptr) throw DanglingRef("unknown nsd '" + t.nsd_id + "'");
    const NsFlavor* flavor = nsd->find_flavor(t.flavor_id);
    if (flavor == nullptr) throw DanglingRef("unknown flavor in " + to_string(t));
    const NsInstantiationLevel* il = flavor->find_il(t.il_id);
    if (il == nullptr) throw DanglingRef("unknown instantiation level in " + to_string(t));

    for (const auto& vnf : nsd->vnf_refs) {
        auto it = il->vnf_plans.find(vnf);
        if (it == il->vnf_plans.end()) continue;
        const VnfPlan& plan = it->second;
        const VnfDescriptor* vd = cat.find_vnf(vnf);
        if (vd == nullptr) throw DanglingRef("unknown vnf '" + vnf + "'");
        auto level = vd->resource_levels.find(plan.resource_level);
        if (level == vd->resource_levels.end()) {
            throw DanglingRef("unknown resource level '" + plan.resource_level + "' of '" + vnf + "'");
        }
        ResolvedVnf rv;
        rv.key = prefix + "/" + vnf;
        rv.vnf_id = vnf;
        rv.function_tag = vd->function_tag;
        rv.instance_count = plan.instance_count;
        rv.resource_level = plan.resource_level;
        rv.demand = level->second;
        for (const auto& rule : plan.affinity_rules) {
            rv.affinity.push_back({rule.kind, prefix + "/" + rule.peer});
        }
        rv.reliability = plan.reliability;
        out.vnfs.push_back(std::move(rv));
    }
    for (const auto& link : nsd->virtual_links) {
        auto it = il->link_plans.find(link.id);
        if (it == il->link_plans.end()) continue;
        out.links.push_back({prefix + "/" + link.id, prefix + "/" + link.endpoint_a,
                             prefix + "/" + link.endpoint_b, it->second.bitrate_mbps,
                             it->second.reliability_class});
    }
    for (const auto& nested : nsd->nested_ns_refs) {
        auto it = il->nested_triplets.find(nested);
        if (it == il->nested_triplets.end()) {
            throw NestedTripletMissing(to_string(t) + " does not choose a triplet for nested NS '" +
                                       nested + "'");
        }
        expand(cat, Triplet{nested, it->second.flavor_id, it->second.il_id}, prefix + "/" + nested,
               out, depth + 1);
    }
}

}  // namespace

ResolvedDeployment resolve_triplet(const Catalog& cat, const Triplet& t) {
    return resolve_triplet(cat, t, t.nsd_id);
}

ResolvedDeployment resolve_triplet(const Catalog& cat, const Triplet& t, const std::string& key_prefix) {
    ResolvedDeployment out;
    expand(cat, t, key_prefix, out, 0);
    return out;
}

json to_json(const ResolvedDeployment& d) {
    json vnfs = json::array();
    for (const auto& v : d.vnfs) {
        json aff = json::array();
        for (const auto& a : v.affinity) aff.push_back({{"kind", to_string(a.kind)}, {"peer", a.peer_key}});
        vnfs.push_back({{"key", v.key},
                        {"vnf_id", v.vnf_id},
                        {"function_tag", v.function_tag},
                        {"instance_count", v.instance_count},
                        {"resource_level", v.resource_level},
                        {"demand", to_json(v.demand)},
                        {"affinity", aff},
                        {"backup_count", v.reliability.backup_count},
                        {"requires_ha_pop", v.reliability.requires_ha_pop}});
    }
    json links = json::array();
    for (const auto& l : d.links) {
        links.push_back({{"key", l.key},
                         {"endpoint_a", l.endpoint_a},
                         {"endpoint_b", l.endpoint_b},
                         {"bitrate_mbps", l.bitrate_mbps},
                         {"reliability_class", l.reliability_class}});
    }
    return json{{"vnfs", vnfs}, {"links", links}};
}

}  // namespace nsl
