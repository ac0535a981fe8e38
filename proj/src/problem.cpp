#include "nsl/problem.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace nsl {

PlacementProblem PlacementProblem::build(const InfrastructureMap& map, const AdmissionRequest& req) {
    if (req.windows.empty()) throw InvalidRequest("admission request without time windows");
    PlacementProblem p;
    for (const auto& pop : map.pops) {
        p.pop_ids.push_back(pop.id);
        ResourceVector r = residual_capacity(map, pop.id, req.windows.front());
        for (const auto& w : req.windows) r = cwise_min(r, residual_capacity(map, pop.id, w));
        p.pop_residual.push_back(r);
    }
    for (const auto& l : map.wan_links) {
        p.wan_ids.push_back(l.id);
        std::int64_t r = residual_bitrate(map, l.id, req.windows.front());
        for (const auto& w : req.windows) r = std::min(r, residual_bitrate(map, l.id, w));
        p.wan_residual.push_back(r);
    }

    std::map<InstanceRef, int> index;
    for (const auto& v : req.deployment.vnfs) {
        for (int i = 0; i < v.instance_count; ++i) {
            Instance inst;
            inst.ref = {v.key, i};
            inst.demand = v.demand;
            if (auto it = req.candidates.find(inst.ref); it != req.candidates.end()) {
                for (const auto& pop : it->second) {
                    auto idx = map.pop_index(pop);
                    if (!idx) throw UnknownPop("candidate PoP '" + pop + "' is not in the map");
                    inst.candidates.push_back(static_cast<int>(*idx));
                }
            }
            std::sort(inst.candidates.begin(), inst.candidates.end());
            index[inst.ref] = static_cast<int>(p.instances.size());
            p.instances.push_back(std::move(inst));
        }
    }

    auto group = [&](const std::string& key) {
        const ResolvedVnf* v = req.deployment.find(key);
        if (v == nullptr) throw InvalidRequest("unknown VNF key '" + key + "'");
        std::vector<int> out;
        for (int i = 0; i < v->instance_count; ++i) out.push_back(index.at({key, i}));
        return out;
    };
    for (const auto& v : req.deployment.vnfs) {
        for (const auto& rule : v.affinity) {
            const bool same = rule.kind == AffinityKind::SamePop;
            const std::string origin = std::string(same ? "SAME_POP" : "DIFFERENT_POP") + " " + v.key +
                                       (rule.peer_key == v.key ? "" : " ~ " + rule.peer_key);
            const auto mine = group(v.key);
            if (rule.peer_key == v.key) {
                for (std::size_t a = 0; a < mine.size(); ++a) {
                    for (std::size_t b = a + 1; b < mine.size(); ++b) p.rules.push_back({mine[a], mine[b], same, origin});
                }
            } else {
                for (int a : mine) {
                    for (int b : group(rule.peer_key)) p.rules.push_back({a, b, same, origin});
                }
            }
        }
        const int primaries = v.instance_count - v.reliability.backup_count;
        for (int k = primaries; k < v.instance_count; ++k) {
            for (int j = 0; j < primaries; ++j) {
                p.rules.push_back({index.at({v.key, k}), index.at({v.key, j}), false, "backup " + v.key});
            }
        }
    }
    for (const auto& l : req.deployment.links) {
        auto a = index.find({l.endpoint_a, 0});
        auto b = index.find({l.endpoint_b, 0});
        if (a == index.end() || b == index.end()) {
            throw InvalidRequest("virtual link '" + l.key + "' endpoint is not deployed");
        }
        p.links.push_back({l.key, a->second, b->second, l.bitrate_mbps, l.reliability_class});
    }

    p.rules_of.assign(p.instances.size(), {});
    p.links_of.assign(p.instances.size(), {});
    for (std::size_t r = 0; r < p.rules.size(); ++r) {
        p.rules_of[p.rules[r].a].push_back(static_cast<int>(r));
        p.rules_of[p.rules[r].b].push_back(static_cast<int>(r));
    }
    for (std::size_t l = 0; l < p.links.size(); ++l) {
        p.links_of[p.links[l].inst_a].push_back(static_cast<int>(l));
        if (p.links[l].inst_b != p.links[l].inst_a) p.links_of[p.links[l].inst_b].push_back(static_cast<int>(l));
    }

    // All simple paths up to kMaxRouteHops hops between every PoP pair.
    const int n = static_cast<int>(p.pop_ids.size());
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (wan, neighbour)
    for (std::size_t w = 0; w < map.wan_links.size(); ++w) {
        const int a = static_cast<int>(*map.pop_index(map.wan_links[w].endpoint_a));
        const int b = static_cast<int>(*map.pop_index(map.wan_links[w].endpoint_b));
        adj[a].push_back({static_cast<int>(w), b});
        adj[b].push_back({static_cast<int>(w), a});
    }
    p.paths_.assign(n, std::vector<std::vector<Path>>(n));
    for (int s = 0; s < n; ++s) {
        std::vector<bool> on_path(n, false);
        std::vector<int> wan;
        std::function<void(int, int)> walk = [&](int at, int min_class) {
            if (at != s) p.paths_[s][at].push_back({wan, min_class});
            if (static_cast<int>(wan.size()) == kMaxRouteHops) return;
            for (const auto& [w, next] : adj[at]) {
                if (on_path[next]) continue;
                on_path[next] = true;
                wan.push_back(w);
                walk(next, std::min(min_class, map.wan_links[w].reliability_class));
                wan.pop_back();
                on_path[next] = false;
            }
        };
        on_path[s] = true;
        walk(s, 3);
        for (auto& list : p.paths_[s]) {
            std::sort(list.begin(), list.end(), [](const Path& x, const Path& y) {
                if (x.wan.size() != y.wan.size()) return x.wan.size() < y.wan.size();
                return x.wan < y.wan;
            });
        }
    }
    return p;
}

const std::vector<PlacementProblem::Path>& PlacementProblem::paths(int pop_a, int pop_b) const {
    return paths_[pop_a][pop_b];
}

bool PlacementProblem::rules_allow(const std::vector<int>& assign, int inst, int pop) const {
    for (int r : rules_of[inst]) {
        const PairRule& rule = rules[r];
        const int other = rule.a == inst ? rule.b : rule.a;
        const int at = assign[other];
        if (at < 0) continue;
        if (rule.same != (at == pop)) return false;
    }
    return true;
}

bool PlacementProblem::link_routable(int l, int pop_a, int pop_b) const {
    if (pop_a == pop_b) return true;
    const Link& link = links[l];
    for (const auto& path : paths(pop_a, pop_b)) {
        if (path.min_class < link.min_class) continue;
        if (std::all_of(path.wan.begin(), path.wan.end(),
                        [&](int w) { return wan_residual[w] >= link.bitrate; })) {
            return true;
        }
    }
    return false;
}

std::optional<PlacementProblem::Routing> PlacementProblem::route(const std::vector<int>& assign,
                                                                 bool minimize) const {
    Routing current;
    current.path_choice.assign(links.size(), -1);
    std::vector<int> pending;
    for (std::size_t l = 0; l < links.size(); ++l) {
        if (assign[links[l].inst_a] != assign[links[l].inst_b]) pending.push_back(static_cast<int>(l));
    }
    std::vector<std::int64_t> used(wan_ids.size(), 0);
    std::optional<Routing> best;

    // Lower bound of the remaining links' cost: bitrate x fewest usable hops.
    std::vector<std::int64_t> tail_bound(pending.size() + 1, 0);
    for (std::size_t k = pending.size(); k-- > 0;) {
        const Link& link = links[pending[k]];
        std::int64_t hops = 0;
        for (const auto& path : paths(assign[link.inst_a], assign[link.inst_b])) {
            if (path.min_class >= link.min_class) {
                hops = static_cast<std::int64_t>(path.wan.size());
                break;
            }
        }
        tail_bound[k] = tail_bound[k + 1] + link.bitrate * hops;
    }

    std::function<bool(std::size_t)> go = [&](std::size_t k) -> bool {
        if (k == pending.size()) {
            if (!best || current.cost < best->cost) best = current;
            return !minimize;
        }
        if (minimize && best && current.cost + tail_bound[k] >= best->cost) return false;
        const Link& link = links[pending[k]];
        const auto& options = paths(assign[link.inst_a], assign[link.inst_b]);
        for (std::size_t pi = 0; pi < options.size(); ++pi) {
            const Path& path = options[pi];
            if (path.min_class < link.min_class) continue;
            if (!std::all_of(path.wan.begin(), path.wan.end(),
                             [&](int w) { return used[w] + link.bitrate <= wan_residual[w]; })) {
                continue;
            }
            for (int w : path.wan) used[w] += link.bitrate;
            current.path_choice[pending[k]] = static_cast<int>(pi);
            const std::int64_t added = link.bitrate * static_cast<std::int64_t>(path.wan.size());
            current.cost += added;
            const bool stop = go(k + 1);
            current.cost -= added;
            current.path_choice[pending[k]] = -1;
            for (int w : path.wan) used[w] -= link.bitrate;
            if (stop) return true;
        }
        return false;
    };
    go(0);
    return best;
}

bool PlacementProblem::placement_ok(const std::vector<int>& assign) const {
    std::vector<ResourceVector> used(pop_ids.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const int p = assign[i];
        if (p < 0) return false;
        if (!std::binary_search(instances[i].candidates.begin(), instances[i].candidates.end(), p)) return false;
        used[p] += instances[i].demand;
    }
    // Unused PoPs impose nothing, even when earlier bookings overrun them.
    for (std::size_t p = 0; p < used.size(); ++p) {
        if (!used[p].is_zero() && !used[p].fits_within(pop_residual[p])) return false;
    }
    for (const auto& r : rules) {
        if (r.same != (assign[r.a] == assign[r.b])) return false;
    }
    return true;
}

FeasibleSolution PlacementProblem::to_solution(const std::vector<int>& assign, const Routing& routing) const {
    FeasibleSolution sol;
    for (std::size_t i = 0; i < instances.size(); ++i) sol.assignment[instances[i].ref] = pop_ids[assign[i]];
    for (std::size_t l = 0; l < links.size(); ++l) {
        std::vector<std::string> hops;
        if (routing.path_choice[l] >= 0) {
            const auto& path = paths(assign[links[l].inst_a], assign[links[l].inst_b])[routing.path_choice[l]];
            for (int w : path.wan) hops.push_back(wan_ids[w]);
        }
        sol.link_routes[links[l].key] = std::move(hops);
    }
    return sol;
}

std::vector<int> PlacementProblem::search_order() const {
    std::vector<int> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return instances[a].candidates.size() < instances[b].candidates.size();
    });
    return order;
}

namespace {

// Backtracking search with optional relaxation of capacity and connectivity.
class Search {
public:
    Search(const PlacementProblem& p, bool capacity, bool connectivity)
        : p_(p), capacity_(capacity), connectivity_(connectivity), order_(p.search_order()),
          assign_(p.instances.size(), -1), used_(p.pop_ids.size()) {}

    bool run() { return dfs(0); }
    const std::vector<int>& assignment() const { return assign_; }
    const std::optional<PlacementProblem::Routing>& routing() const { return routing_; }

private:
    bool admissible(int inst, int pop) const {
        if (capacity_ && !(used_[pop] + p_.instances[inst].demand).fits_within(p_.pop_residual[pop])) return false;
        return p_.rules_allow(assign_, inst, pop);
    }

    bool links_allow(int inst, int pop) const {
        for (int l : p_.links_of[inst]) {
            const auto& link = p_.links[l];
            const int other = link.inst_a == inst ? link.inst_b : link.inst_a;
            const int at = other == inst ? pop : assign_[other];
            if (at < 0) continue;
            const int pa = link.inst_a == inst ? pop : at;
            const int pb = link.inst_b == inst ? pop : at;
            if (!p_.link_routable(l, pa, pb)) return false;
        }
        return true;
    }

    bool forward_ok(std::size_t depth) const {
        for (std::size_t k = depth + 1; k < order_.size(); ++k) {
            const int j = order_[k];
            const auto& cands = p_.instances[j].candidates;
            if (std::none_of(cands.begin(), cands.end(), [&](int q) { return admissible(j, q); })) return false;
        }
        return true;
    }

    bool dfs(std::size_t depth) {
        if (depth == order_.size()) {
            if (!connectivity_) {
                routing_ = PlacementProblem::Routing{std::vector<int>(p_.links.size(), -1), 0};
                return true;
            }
            routing_ = p_.route(assign_, false);
            return routing_.has_value();
        }
        const int inst = order_[depth];
        for (int pop : p_.instances[inst].candidates) {
            if (!admissible(inst, pop)) continue;
            if (connectivity_ && !links_allow(inst, pop)) continue;
            assign_[inst] = pop;
            used_[pop] += p_.instances[inst].demand;
            const bool ok = forward_ok(depth) && dfs(depth + 1);
            if (ok) return true;
            used_[pop] = used_[pop] - p_.instances[inst].demand;
            assign_[inst] = -1;
        }
        return false;
    }

    const PlacementProblem& p_;
    bool capacity_;
    bool connectivity_;
    std::vector<int> order_;
    std::vector<int> assign_;
    std::vector<ResourceVector> used_;
    std::optional<PlacementProblem::Routing> routing_;
};

}  // namespace

std::optional<Placement> first_feasible(const PlacementProblem& p, bool capacity, bool connectivity) {
    Search s(p, capacity, connectivity);
    if (!s.run()) return std::nullopt;
    return Placement{s.assignment(), *s.routing()};
}

}  // namespace nsl
