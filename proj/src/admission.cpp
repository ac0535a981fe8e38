#include "nsl/admission.hpp"

#include <algorithm>
#include <tuple>

#include "nsl/problem.hpp"

namespace nsl {

std::string to_string(const InstanceRef& r) { return r.vnf_key + "[" + std::to_string(r.index) + "]"; }

CandidateSet compute_candidates(const std::vector<AbstractPopView>& view,
                                const std::map<std::string, std::set<std::string>>& geo_reqs,
                                const ResolvedDeployment& plans) {
    CandidateSet out;
    for (const auto& v : plans.vnfs) {
        const auto geo = geo_reqs.find(v.function_tag);
        auto region_ok = [&](const AbstractPopView& p) {
            return geo == geo_reqs.end() || geo->second.count(p.region) > 0;
        };
        std::set<std::string> pops;
        bool any_region = false;
        for (const auto& p : view) {
            if (!region_ok(p)) continue;
            any_region = true;
            if (v.reliability.requires_ha_pop && p.capabilities.count("HA") == 0) continue;
            pops.insert(p.pop_id);
        }
        if (pops.empty()) {
            if (!any_region) {
                throw EmptyCandidateSet("geolocation", "no PoP in an allowed region for " + v.key);
            }
            throw EmptyCandidateSet("reliability", "no HA-capable PoP in an allowed region for " + v.key);
        }
        for (int i = 0; i < v.instance_count; ++i) out[{v.key, i}] = pops;
    }
    return out;
}

AdmissionRequest make_request(ResolvedDeployment deployment, CandidateSet candidates,
                              std::vector<TimeWindow> windows) {
    if (windows.empty()) windows.push_back({0, kForeverMinutes, Recurrence::Once});
    for (const auto& w : windows) {
        if (!w.well_formed()) throw InvalidRequest("malformed time window");
    }
    std::sort(windows.begin(), windows.end(), [](const TimeWindow& a, const TimeWindow& b) {
        return std::tie(a.start, a.end, a.recurrence) < std::tie(b.start, b.end, b.recurrence);
    });
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t j = i + 1; j < windows.size(); ++j) {
            if (windows_overlap(windows[i], windows[j])) throw InvalidRequest("overlapping time windows");
        }
    }
    return {std::move(deployment), std::move(candidates), std::move(windows)};
}

std::string to_string(InfeasibleCause c) {
    switch (c) {
        case InfeasibleCause::Capacity: return "CAPACITY";
        case InfeasibleCause::Affinity: return "AFFINITY";
        case InfeasibleCause::Connectivity: return "CONNECTIVITY";
    }
    return "CAPACITY";
}

InfeasibleCause infeasible_cause_from_string(const std::string& s) {
    if (s == "CAPACITY") return InfeasibleCause::Capacity;
    if (s == "AFFINITY") return InfeasibleCause::Affinity;
    if (s == "CONNECTIVITY") return InfeasibleCause::Connectivity;
    throw ParseError("unknown infeasibility cause '" + s + "'");
}

namespace {

std::string capacity_binding(const PlacementProblem& p) {
    // Report the instance group whose candidates are the most oversubscribed.
    std::map<std::string, ResourceVector> group_demand;
    std::map<std::string, ResourceVector> group_room;
    for (const auto& inst : p.instances) {
        group_demand[inst.ref.vnf_key] += inst.demand;
        if (!group_room.count(inst.ref.vnf_key)) {
            ResourceVector room;
            for (int c : inst.candidates) room += p.pop_residual[c];
            group_room[inst.ref.vnf_key] = room;
        }
    }
    for (const auto& [key, demand] : group_demand) {
        if (!demand.fits_within(group_room[key])) {
            return "PoP residual capacity: " + key + " needs " + to_string(demand) + ", candidates offer " +
                   to_string(group_room[key]);
        }
    }
    ResourceVector total;
    ResourceVector room;
    for (const auto& inst : p.instances) total += inst.demand;
    for (const auto& r : p.pop_residual) room += r;
    return "PoP residual capacity: demand " + to_string(total) + " against residual " + to_string(room) +
           " under the placement constraints";
}

std::string affinity_binding(const PlacementProblem& p) {
    // Smallest set of rules, in declaration order, that is already unsatisfiable.
    PlacementProblem q = p;
    q.rules.clear();
    for (auto& r : q.rules_of) r.clear();
    for (std::size_t r = 0; r < p.rules.size(); ++r) {
        q.rules.push_back(p.rules[r]);
        q.rules_of[p.rules[r].a].push_back(static_cast<int>(r));
        q.rules_of[p.rules[r].b].push_back(static_cast<int>(r));
        if (!first_feasible(q, false, false)) return "affinity rule: " + p.rules[r].origin;
    }
    return "affinity rules with candidate sets";
}

std::string connectivity_binding(const PlacementProblem& p) {
    for (std::size_t l = 0; l < p.links.size(); ++l) {
        const auto& link = p.links[l];
        bool any = false;
        for (int a : p.instances[link.inst_a].candidates) {
            for (int b : p.instances[link.inst_b].candidates) any = any || p.link_routable(static_cast<int>(l), a, b);
        }
        if (!any) {
            return "virtual link " + link.key + ": no WAN path of class >= " + std::to_string(link.min_class) +
                   " with " + std::to_string(link.bitrate) + " Mbps residual";
        }
    }
    return "virtual links: WAN residual bitrate insufficient for a joint routing";
}

}  // namespace

FeasibilityResult check_feasibility(const InfrastructureMap& map, const AdmissionRequest& req) {
    const PlacementProblem p = PlacementProblem::build(map, req);
    for (const auto& inst : p.instances) {
        if (inst.candidates.empty()) throw InvalidRequest("empty candidate set for " + to_string(inst.ref));
    }
    FeasibilityResult result;
    if (auto found = first_feasible(p)) {
        result.solution = p.to_solution(found->assign, found->routing);
        return result;
    }
    if (!first_feasible(p, false, false)) {
        result.infeasible = Infeasible{InfeasibleCause::Affinity, affinity_binding(p)};
    } else if (!first_feasible(p, true, false)) {
        result.infeasible = Infeasible{InfeasibleCause::Capacity, capacity_binding(p)};
    } else {
        result.infeasible = Infeasible{InfeasibleCause::Connectivity, connectivity_binding(p)};
    }
    return result;
}

std::optional<std::string> find_violation(const InfrastructureMap& map, const AdmissionRequest& req,
                                          const FeasibleSolution& sol) {
    std::map<std::string, ResourceVector> load;
    for (const auto& v : req.deployment.vnfs) {
        for (int i = 0; i < v.instance_count; ++i) {
            const InstanceRef ref{v.key, i};
            auto at = sol.assignment.find(ref);
            if (at == sol.assignment.end()) return "unassigned instance " + to_string(ref);
            auto cands = req.candidates.find(ref);
            if (cands == req.candidates.end() || !cands->second.count(at->second)) {
                return to_string(ref) + " placed outside its candidate set";
            }
            load[at->second] += v.demand;
        }
    }
    std::size_t expected = 0;
    for (const auto& v : req.deployment.vnfs) expected += static_cast<std::size_t>(v.instance_count);
    if (sol.assignment.size() != expected) return "assignment names an instance outside the request";
    for (const auto& [pop, amount] : load) {
        for (const auto& w : req.windows) {
            if (!amount.fits_within(residual_capacity(map, pop, w))) {
                return "PoP " + pop + " over residual capacity";
            }
        }
    }
    auto pop_of = [&](const std::string& key, int i) { return sol.assignment.at({key, i}); };
    for (const auto& v : req.deployment.vnfs) {
        for (const auto& rule : v.affinity) {
            const ResolvedVnf* peer = req.deployment.find(rule.peer_key);
            if (peer == nullptr) return "affinity peer " + rule.peer_key + " missing";
            const bool same = rule.kind == AffinityKind::SamePop;
            for (int i = 0; i < v.instance_count; ++i) {
                for (int j = 0; j < peer->instance_count; ++j) {
                    if (peer->key == v.key && i == j) continue;
                    if (same != (pop_of(v.key, i) == pop_of(peer->key, j))) {
                        return "affinity violated between " + to_string(InstanceRef{v.key, i}) + " and " +
                               to_string(InstanceRef{peer->key, j});
                    }
                }
            }
        }
        const int primaries = v.instance_count - v.reliability.backup_count;
        for (int k = primaries; k < v.instance_count; ++k) {
            for (int j = 0; j < primaries; ++j) {
                if (pop_of(v.key, k) == pop_of(v.key, j)) return "backup co-located with primary in " + v.key;
            }
        }
    }
    std::map<std::string, std::int64_t> wan_load;
    for (const auto& l : req.deployment.links) {
        auto route = sol.link_routes.find(l.key);
        if (route == sol.link_routes.end()) return "virtual link " + l.key + " has no route";
        std::string at = pop_of(l.endpoint_a, 0);
        const std::string to = pop_of(l.endpoint_b, 0);
        if (at == to) {
            if (!route->second.empty()) return "co-located link " + l.key + " routed over the WAN";
            continue;
        }
        if (route->second.empty() || route->second.size() > static_cast<std::size_t>(kMaxRouteHops)) {
            return "virtual link " + l.key + " route length out of bounds";
        }
        std::set<std::string> visited{at};
        for (const auto& hop : route->second) {
            const WanLink* w = map.find_link(hop);
            if (w == nullptr) return "unknown WAN link " + hop;
            if (w->reliability_class < l.reliability_class) return "WAN link " + hop + " below reliability class";
            if (w->endpoint_a == at) {
                at = w->endpoint_b;
            } else if (w->endpoint_b == at) {
                at = w->endpoint_a;
            } else {
                return "route of " + l.key + " is not contiguous";
            }
            if (!visited.insert(at).second) return "route of " + l.key + " revisits a PoP";
            wan_load[hop] += l.bitrate_mbps;
        }
        if (at != to) return "route of " + l.key + " does not reach its endpoint";
    }
    for (const auto& [link, bitrate] : wan_load) {
        for (const auto& w : req.windows) {
            if (bitrate > residual_bitrate(map, link, w)) return "WAN link " + link + " over residual bitrate";
        }
    }
    return std::nullopt;
}

AdmissionRequest build_request(const Catalog& cat, const ServiceOrder& order, const NslDesign& design,
                               const std::vector<AbstractPopView>& view) {
    const SliceRequirements reqs = effective_requirements(cat, order);
    ResolvedDeployment deployment = resolve_slice(cat, design.target_il, reqs);
    CandidateSet candidates = compute_candidates(view, reqs.geo_reqs, deployment);
    return make_request(std::move(deployment), std::move(candidates), reqs.temporal_reqs);
}

AdmissionVerdict evaluate_admission(const Catalog& cat, const ServiceOrder& order, const NslDesign& design,
                                    const InfrastructureMap& map) {
    AdmissionVerdict verdict;
    try {
        verdict.request = build_request(cat, order, design, abstract_view(map));
    } catch (const EmptyCandidateSet& e) {
        verdict.cause = e.cause();
        verdict.detail = e.what();
        return verdict;
    }
    FeasibilityResult result = check_feasibility(map, *verdict.request);
    if (!result.feasible()) {
        verdict.cause = to_string(result.infeasible->cause);
        verdict.detail = result.infeasible->binding_constraint;
        return verdict;
    }
    const SliceRequirements reqs = effective_requirements(cat, order);
    verdict.admitted = true;
    verdict.solution = std::move(result.solution);
    verdict.sla = SlaRecord{order.id, order.tenant_id, reqs.network_reqs.performance, verdict.request->windows,
                            design.target_il.id};
    return verdict;
}

AdmissionVerdict admit(const Catalog& cat, ServiceOrder& order, const NslDesign& design,
                       const InfrastructureMap& map) {
    if (order.status != OrderStatus::Designed) {
        throw IllegalTransition("order " + order.id + " is " + to_string(order.status) + ", not DESIGNED");
    }
    AdmissionVerdict v = evaluate_admission(cat, order, design, map);
    if (v.admitted) {
        order.transition(OrderStatus::Admitted);
    } else {
        order.reject(v.cause, v.detail);
    }
    return v;
}

json to_json(const InstanceRef& r) { return {{"vnf_key", r.vnf_key}, {"index", r.index}}; }

json to_json(const FeasibleSolution& s) {
    json assignment = json::array();
    for (const auto& [ref, pop] : s.assignment) {
        assignment.push_back({{"vnf_key", ref.vnf_key}, {"index", ref.index}, {"pop_id", pop}});
    }
    json routes = json::object();
    for (const auto& [key, hops] : s.link_routes) routes[key] = hops;
    return {{"assignment", assignment}, {"link_routes", routes}};
}

FeasibleSolution solution_from_json(const json& j) {
    FeasibleSolution s;
    for (const auto& a : field<json>(j, "assignment", "solution")) {
        s.assignment[{field<std::string>(a, "vnf_key", "assignment"), field<int>(a, "index", "assignment")}] =
            field<std::string>(a, "pop_id", "assignment");
    }
    for (const auto& [key, hops] : member_object(j, "link_routes", "solution").items()) {
        s.link_routes[key] = hops.get<std::vector<std::string>>();
    }
    return s;
}

json to_json(const SlaRecord& s) {
    json windows = json::array();
    for (const auto& w : s.windows) windows.push_back(to_json(w));
    return {{"order_id", s.order_id},
            {"tenant_id", s.tenant_id},
            {"performance", to_json(s.performance)},
            {"windows", windows},
            {"target_il", s.target_il}};
}

SlaRecord sla_from_json(const json& j) {
    SlaRecord s;
    s.order_id = field<std::string>(j, "order_id", "sla");
    s.tenant_id = field<std::string>(j, "tenant_id", "sla");
    s.performance = performance_from_json(field<json>(j, "performance", "sla"), "sla.performance");
    for (const auto& w : field<json>(j, "windows", "sla")) s.windows.push_back(window_from_json(w, "sla.windows"));
    s.target_il = field<std::string>(j, "target_il", "sla");
    return s;
}

json to_json(const AdmissionVerdict& v) {
    json j{{"admitted", v.admitted}};
    if (!v.admitted) {
        j["cause"] = v.cause;
        j["detail"] = v.detail;
    }
    if (v.solution) j["solution"] = to_json(*v.solution);
    if (v.sla) j["sla"] = to_json(*v.sla);
    return j;
}

}  // namespace nsl
