#include "nsl/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

namespace nsl {

// --- traffic profiles ---------------------------------------------------------

TrafficProfile TrafficProfile::flat() {
    TrafficProfile p;
    p.hourly_load.fill(1.0);
    p.source = Source::Flat;
    return p;
}

TrafficProfile TrafficProfile::from_loads(const std::vector<double>& loads, Source source) {
    if (loads.size() != kHoursPerDay) {
        throw ParseError("traffic profile needs 24 entries, got " + std::to_string(loads.size()));
    }
    TrafficProfile p;
    std::copy(loads.begin(), loads.end(), p.hourly_load.begin());
    p.source = source;
    p.validate();
    return p;
}

void TrafficProfile::validate() const {
    double peak = 0.0;
    for (double v : hourly_load) {
        if (!(v > 0.0 && v <= 1.0)) throw ParseError("traffic profile entries must be in (0, 1]");
        peak = std::max(peak, v);
    }
    if (peak != 1.0) throw ParseError("traffic profile peak must be exactly 1.0 (the target hour)");
}

std::vector<double> parse_load_trace(const std::string& text) {
    std::vector<double> loads;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
                   line.end());
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument(cell);
            loads.push_back(v);
        } catch (const std::exception&) {
            if (loads.empty()) continue;  // header row
            throw ParseError("bad load value '" + cell + "'");
        }
    }
    for (double v : loads) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError("load values must be finite and >= 0");
    }
    return loads;
}

TrafficProfile parse_profile_csv(const std::string& text) {
    return TrafficProfile::from_loads(parse_load_trace(text));
}

TrafficProfile load_profile_csv(const std::string& path) { return parse_profile_csv(read_text_file(path)); }

// --- topology mapping ---------------------------------------------------------

TopologyCover map_topology(const Catalog& cat, const std::vector<std::string>& topology) {
    std::vector<std::pair<std::string, std::vector<std::string>>> chains;
    for (const auto& [id, _] : cat.nsds) chains.emplace_back(id, cat.function_chain(id));

    TopologyCover cover;
    std::size_t pos = 0;
    while (pos < topology.size()) {
        std::size_t best_len = 0;
        std::vector<std::string> best;
        for (const auto& [id, chain] : chains) {
            if (chain.empty() || chain.size() > topology.size() - pos) continue;
            if (!std::equal(chain.begin(), chain.end(), topology.begin() + static_cast<long>(pos))) continue;
            if (chain.size() > best_len) {
                best_len = chain.size();
                best.clear();
            }
            if (chain.size() == best_len) best.push_back(id);
        }
        if (best.empty()) {
            throw UncoverableTopology("no NS descriptor covers node '" + topology[pos] + "' at position " +
                                      std::to_string(pos));
        }
        if (best.size() > 1) {
            std::string ids;
            for (const auto& b : best) ids += (ids.empty() ? "" : ", ") + b;
            cover.warnings.push_back("AmbiguousCover at position " + std::to_string(pos) + ": {" + ids +
                                     "}; chose '" + best.front() + "'");
        }
        cover.nsd_ids.push_back(best.front());
        pos += best_len;
    }
    return cover;
}

// --- triplet selection ---------------------------------------------------------

Triplet select_triplet(const Catalog& cat, const std::string& nsd_id, const NetworkReqs& reqs, double load) {
    const NsDescriptor* nsd = cat.find_nsd(nsd_id);
    if (nsd == nullptr) throw DanglingRef("unknown nsd '" + nsd_id + "'");
    bool any_flavor = false;
    std::optional<std::tuple<ResourceVector, std::string, std::string>> best;
    for (const auto& flavor : nsd->flavors) {
        if (!std::includes(flavor.feature_tags.begin(), flavor.feature_tags.end(), reqs.functional.begin(),
                           reqs.functional.end())) {
            continue;
        }
        any_flavor = true;
        for (const auto& il : flavor.instantiation_levels) {
            if (!covers(il.declared_capacity, reqs.performance, load)) continue;
            auto key = std::make_tuple(resolve_triplet(cat, {nsd_id, flavor.id, il.id}).aggregate(), flavor.id,
                                       il.id);
            if (!best || key < *best) best = std::move(key);
        }
    }
    if (!any_flavor) throw NoFlavorMatches("no flavor of '" + nsd_id + "' offers the required features");
    if (!best) throw NoIlMeetsPerformance("no instantiation level of '" + nsd_id + "' meets the performance");
    return {nsd_id, std::get<1>(*best), std::get<2>(*best)};
}

// --- slice levels ----------------------------------------------------------------

PerformanceVector nsl_capacity(const Catalog& cat, const NslInstantiationLevel& il) {
    PerformanceVector cap;
    bool first = true;
    for (const auto& t : il.triplets) {
        const NsDescriptor* nsd = cat.find_nsd(t.nsd_id);
        if (nsd == nullptr) throw DanglingRef("unknown nsd '" + t.nsd_id + "'");
        const NsFlavor* f = nsd->find_flavor(t.flavor_id);
        const NsInstantiationLevel* nil = f ? f->find_il(t.il_id) : nullptr;
        if (nil == nullptr) throw DanglingRef("triplet " + to_string(t) + " does not resolve");
        const auto& c = nil->declared_capacity;
        if (first) {
            cap = c;
            first = false;
        } else {
            cap.throughput_mbps = std::min(cap.throughput_mbps, c.throughput_mbps);
            cap.max_sessions = std::min(cap.max_sessions, c.max_sessions);
            cap.max_latency_ms = std::max(cap.max_latency_ms, c.max_latency_ms);
        }
    }
    return cap;
}

ResourceVector nsl_cost(const Catalog& cat, const NslInstantiationLevel& il) {
    ResourceVector total;
    for (const auto& t : il.triplets) total += resolve_triplet(cat, t).aggregate();
    return total;
}

std::vector<std::string> triplet_prefixes(const NslInstantiationLevel& il) {
    std::map<std::string, int> seen;
    std::vector<std::string> out;
    for (const auto& t : il.triplets) {
        const int n = ++seen[t.nsd_id];
        out.push_back(n == 1 ? t.nsd_id : t.nsd_id + "#" + std::to_string(n));
    }
    return out;
}

ResolvedDeployment resolve_slice(const Catalog& cat, const NslInstantiationLevel& il,
                                 const SliceRequirements& reqs) {
    ResolvedDeployment out;
    const auto prefixes = triplet_prefixes(il);
    for (std::size_t i = 0; i < il.triplets.size(); ++i) {
        auto part = resolve_triplet(cat, il.triplets[i], prefixes[i]);
        out.vnfs.insert(out.vnfs.end(), part.vnfs.begin(), part.vnfs.end());
        out.links.insert(out.links.end(), part.links.begin(), part.links.end());
    }
    auto anchor = [&](const std::string& tag) -> std::string {
        for (const auto& v : out.vnfs) {
            if (v.function_tag == tag) return v.key;
        }
        throw DanglingRef("no deployed VNF provides node '" + tag + "'");
    };
    for (const auto& l : reqs.virtual_links) {
        out.links.push_back({"slice/" + l.id, anchor(l.from_node), anchor(l.to_node), l.bitrate_mbps,
                             l.reliability_class});
    }
    return out;
}

std::vector<NslInstantiationLevel> NslDesign::il_set() const {
    auto out = optional_ils;
    out.push_back(target_il);
    return out;
}

const NslInstantiationLevel* NslDesign::find_il(const std::string& id) const {
    if (target_il.id == id) return &target_il;
    for (const auto& il : optional_ils) {
        if (il.id == id) return &il;
    }
    return nullptr;
}

double NslDesign::served_load(const std::string& id) const {
    return served_fraction(il_capacity.at(id), required);
}

// --- design construction ------------------------------------------------------

namespace {

struct LevelOption {
    Triplet triplet;
    PerformanceVector capacity;
    ResourceVector cost;
};

// Whether every VNF/link of `candidate` is present in `target` with no more
// instances, demand or bitrate, so the candidate fits inside the target's
// placement and reservations.
bool fits_inside(const ResolvedDeployment& candidate, const ResolvedDeployment& target) {
    for (const auto& v : candidate.vnfs) {
        const ResolvedVnf* t = target.find(v.key);
        if (t == nullptr || v.instance_count > t->instance_count || !v.demand.fits_within(t->demand)) return false;
    }
    for (const auto& l : candidate.links) {
        auto t = std::find_if(target.links.begin(), target.links.end(), [&](const auto& x) { return x.key == l.key; });
        if (t == target.links.end() || l.bitrate_mbps > t->bitrate_mbps ||
            l.reliability_class > t->reliability_class) {
            return false;
        }
    }
    return true;
}

std::vector<LevelOption> scaling_options(const Catalog& cat, const Triplet& target) {
    const NsFlavor* flavor = cat.find_nsd(target.nsd_id)->find_flavor(target.flavor_id);
    const NsInstantiationLevel* target_level = flavor->find_il(target.il_id);
    const auto target_resolved = resolve_triplet(cat, target);
    std::vector<LevelOption> out;
    for (const auto& il : flavor->instantiation_levels) {
        if (!dominates(target_level->declared_capacity, il.declared_capacity)) continue;
        Triplet t{target.nsd_id, target.flavor_id, il.id};
        const auto resolved = resolve_triplet(cat, t);
        if (!fits_inside(resolved, target_resolved)) continue;
        out.push_back({t, il.declared_capacity, resolved.aggregate()});
    }
    std::sort(out.begin(), out.end(), [](const LevelOption& a, const LevelOption& b) {
        return std::tie(a.cost, a.triplet.il_id) < std::tie(b.cost, b.triplet.il_id);
    });
    return out;
}

}  // namespace

NslDesign build_design(const Catalog& cat, const std::string& order_id, const SliceRequirements& reqs,
                       const TrafficProfile& profile) {
    const auto cover = map_topology(cat, reqs.topology);
    NslDesign d;
    d.order_id = order_id;
    d.required = reqs.network_reqs.performance;

    std::vector<Triplet> target;
    for (const auto& nsd : cover.nsd_ids) target.push_back(select_triplet(cat, nsd, reqs.network_reqs));

    std::vector<std::vector<LevelOption>> options;
    for (const auto& t : target) options.push_back(scaling_options(cat, t));

    // Minimal combination per hour; hours sharing a combination are counted.
    std::map<std::vector<Triplet>, int> combos;
    for (double load : profile.hourly_load) {
        std::vector<Triplet> combo;
        for (std::size_t i = 0; i < target.size(); ++i) {
            auto it = std::find_if(options[i].begin(), options[i].end(),
                                   [&](const LevelOption& o) { return covers(o.capacity, d.required, load); });
            combo.push_back(it->triplet);  // the target level always qualifies
        }
        ++combos[combo];
    }
    combos.erase(target);

    NslInstantiationLevel target_il{"", target};
    const PerformanceVector target_cap = nsl_capacity(cat, target_il);

    struct Candidate {
        NslInstantiationLevel il;
        PerformanceVector capacity;
        ResourceVector cost;
        int hours;
    };
    std::vector<Candidate> optional;
    for (const auto& [combo, hours] : combos) {
        NslInstantiationLevel il{"", combo};
        const auto cap = nsl_capacity(cat, il);
        if (cap == target_cap || !dominates(target_cap, cap)) continue;
        optional.push_back({il, cap, nsl_cost(cat, il), hours});
    }
    if (optional.size() > kMaxOptionalIls) {
        std::stable_sort(optional.begin(), optional.end(), [](const Candidate& a, const Candidate& b) {
            return std::tie(b.hours, a.cost) < std::tie(a.hours, b.cost);
        });
        optional.resize(kMaxOptionalIls);
    }
    std::sort(optional.begin(), optional.end(), [&](const Candidate& a, const Candidate& b) {
        const double fa = served_fraction(a.capacity, d.required);
        const double fb = served_fraction(b.capacity, d.required);
        return std::tie(fa, a.cost, a.il.triplets) < std::tie(fb, b.cost, b.il.triplets);
    });

    int n = 0;
    for (auto& c : optional) {
        c.il.id = "nslil-" + std::to_string(++n);
        d.il_capacity[c.il.id] = c.capacity;
        d.il_cost[c.il.id] = c.cost;
        d.optional_ils.push_back(c.il);
    }
    target_il.id = "nslil-" + std::to_string(++n);
    d.il_capacity[target_il.id] = target_cap;
    d.il_cost[target_il.id] = nsl_cost(cat, target_il);
    d.target_il = std::move(target_il);
    return d;
}

std::string design_rejection_cause(const std::string& error_code) {
    if (error_code == "UncoverableTopology") return "topology";
    if (error_code == "NoFlavorMatches") return "functionality";
    if (error_code == "NoIlMeetsPerformance") return "performance";
    return error_code;
}

NslDesign build_design(const Catalog& cat, ServiceOrder& order, const TrafficProfile& profile) {
    if (order.status != OrderStatus::Submitted) {
        throw IllegalTransition("order '" + order.id + "' is " + to_string(order.status) + ", expected SUBMITTED");
    }
    try {
        auto d = build_design(cat, order.id, effective_requirements(cat, order), profile);
        order.transition(OrderStatus::Designed);
        return d;
    } catch (const Error& e) {
        order.reject(design_rejection_cause(e.code()), e.what());
        throw;
    }
}

json to_json(const NslDesign& d) {
    json optional = json::array();
    for (const auto& il : d.optional_ils) optional.push_back(to_json(il));
    json caps = json::object(), costs = json::object();
    for (const auto& [id, c] : d.il_capacity) caps[id] = to_json(c);
    for (const auto& [id, c] : d.il_cost) costs[id] = to_json(c);
    return json{{"order_id", d.order_id},
                {"target_il", to_json(d.target_il)},
                {"optional_ils", optional},
                {"il_capacity", caps},
                {"il_cost", costs},
                {"required", to_json(d.required)}};
}

NslDesign design_from_json(const json& j) {
    NslDesign d;
    d.order_id = field<std::string>(j, "order_id", "design");
    d.target_il = nsl_il_from_json(field<json>(j, "target_il", "design"));
    for (const auto& il : field<json>(j, "optional_ils", "design")) d.optional_ils.push_back(nsl_il_from_json(il));
    for (const auto& [id, c] : member_object(j, "il_capacity", "design").items()) {
        d.il_capacity[id] = performance_from_json(c, "design");
    }
    for (const auto& [id, c] : member_object(j, "il_cost", "design").items()) {
        d.il_cost[id] = resource_vector_from_json(c, "design");
    }
    d.required = performance_from_json(field<json>(j, "required", "design"), "design");
    return d;
}

}  // namespace nsl
