#include "nsl/placement.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <sstream>

namespace nsl {

std::string to_string(ObjectiveKind k) { return k == ObjectiveKind::MinEnergy ? "MIN_ENERGY" : "MIN_RESOURCE"; }

ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "MIN_RESOURCE") return ObjectiveKind::MinResource;
    if (s == "MIN_ENERGY") return ObjectiveKind::MinEnergy;
    throw ParseError("unknown objective kind '" + s + "'");
}

void Objective::validate() const {
    if (weights.vcpu <= 0 || weights.mem_gb <= 0 || weights.storage_gb <= 0) {
        throw InvalidRequest("objective weights must be positive");
    }
}

std::string to_string(const Cost& c) {
    return "(" + std::to_string(c.pops) + ", " + std::to_string(c.resource) + ")";
}

Cost solution_cost(const AdmissionRequest& req, const Objective& obj, const FeasibleSolution& sol) {
    Cost c;
    std::set<std::string> used;
    for (const auto& v : req.deployment.vnfs) {
        for (int i = 0; i < v.instance_count; ++i) {
            const std::string& pop = sol.assignment.at({v.key, i});
            used.insert(pop);
            if (!obj.preferred_pops.count(pop)) c.resource += v.demand.dot(obj.weights);
        }
    }
    for (const auto& l : req.deployment.links) {
        auto it = sol.link_routes.find(l.key);
        if (it != sol.link_routes.end()) c.resource += l.bitrate_mbps * static_cast<std::int64_t>(it->second.size());
    }
    if (obj.kind == ObjectiveKind::MinEnergy) c.pops = static_cast<std::int64_t>(used.size());
    return c;
}

bool in_exact_regime(const PlacementProblem& p) {
    return p.instances.size() <= kMaxExactInstances && p.pop_ids.size() <= kMaxExactPops;
}

namespace {

constexpr std::int64_t kUnroutable = -1;

// Per-instance and per-link cost tables shared by the kernels.
struct CostModel {
    CostModel(const PlacementProblem& p, const Objective& obj) : p(p), energy(obj.kind == ObjectiveKind::MinEnergy) {
        std::vector<bool> preferred(p.pop_ids.size());
        for (std::size_t q = 0; q < p.pop_ids.size(); ++q) preferred[q] = obj.preferred_pops.count(p.pop_ids[q]) > 0;
        inst_cost.resize(p.instances.size());
        for (std::size_t i = 0; i < p.instances.size(); ++i) {
            const std::int64_t base = p.instances[i].demand.dot(obj.weights);
            inst_cost[i].assign(p.pop_ids.size(), base);
            for (std::size_t q = 0; q < p.pop_ids.size(); ++q) {
                if (preferred[q]) inst_cost[i][q] = 0;
            }
        }
    }

    // bitrate x fewest hops over paths usable by the link alone.
    std::int64_t link_bound(int l, int pa, int pb) const {
        if (pa == pb) return 0;
        const auto& link = p.links[l];
        for (const auto& path : p.paths(pa, pb)) {
            if (path.min_class < link.min_class) continue;
            if (std::all_of(path.wan.begin(), path.wan.end(),
                            [&](int w) { return p.wan_residual[w] >= link.bitrate; })) {
                return link.bitrate * static_cast<std::int64_t>(path.wan.size());
            }
        }
        return kUnroutable;
    }

    std::optional<OptimizeResult> evaluate(const std::vector<int>& assign) const {
        if (!p.placement_ok(assign)) return std::nullopt;
        auto routing = p.route(assign, true);
        if (!routing) return std::nullopt;
        return OptimizeResult{{assign, *routing}, cost_of(assign, routing->cost)};
    }

    Cost cost_of(const std::vector<int>& assign, std::int64_t routing_cost) const {
        Cost c;
        c.resource = routing_cost;
        std::vector<bool> used(p.pop_ids.size(), false);
        for (std::size_t i = 0; i < assign.size(); ++i) {
            c.resource += inst_cost[i][assign[i]];
            used[assign[i]] = true;
        }
        if (energy) c.pops = std::count(used.begin(), used.end(), true);
        return c;
    }

    const PlacementProblem& p;
    bool energy;
    std::vector<std::vector<std::int64_t>> inst_cost;
};

struct Incumbent {
    bool found = false;
    Cost cost;
    std::vector<int> key;  // assignment listed in search order
    Placement placement;

    bool beaten_by(const Cost& c, const std::vector<int>& k) const {
        return !found || std::tie(c, k) < std::tie(cost, key);
    }
};

// Shared incumbent for the parallel kernel. Workers keep a local copy and
// refresh it when the version moves.
struct SharedIncumbent {
    std::mutex mu;
    std::atomic<std::uint64_t> version{0};
    Incumbent best;

    void offer(const Incumbent& cand) {
        std::lock_guard<std::mutex> lock(mu);
        if (best.beaten_by(cand.cost, cand.key)) {
            best = cand;
            version.fetch_add(1, std::memory_order_release);
        }
    }
};

class BranchAndBound {
public:
    BranchAndBound(const CostModel& m, SharedIncumbent* shared)
        : m_(m), p_(m.p), shared_(shared), order_(p_.search_order()), assign_(p_.instances.size(), -1),
          used_(p_.pop_ids.size()), pop_count_(p_.pop_ids.size(), 0) {
        suffix_min_.assign(order_.size() + 1, 0);
        for (std::size_t d = order_.size(); d-- > 0;) {
            const int i = order_[d];
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (int q : p_.instances[i].candidates) best = std::min(best, m_.inst_cost[i][q]);
            suffix_min_[d] = suffix_min_[d + 1] + (p_.instances[i].candidates.empty() ? 0 : best);
        }
    }

    const std::vector<int>& order() const { return order_; }

    // Places order_[depth] at `pop` if admissible; returns false otherwise.
    bool push(std::size_t depth, int pop) {
        const int inst = order_[depth];
        if (!(used_[pop] + p_.instances[inst].demand).fits_within(p_.pop_residual[pop])) return false;
        if (!p_.rules_allow(assign_, inst, pop)) return false;
        std::int64_t added = m_.inst_cost[inst][pop];
        for (int l : p_.links_of[inst]) {
            const auto& link = p_.links[l];
            const int other = link.inst_a == inst ? link.inst_b : link.inst_a;
            const int at = other == inst ? pop : assign_[other];
            if (at < 0) continue;
            const std::int64_t b =
                m_.link_bound(l, link.inst_a == inst ? pop : at, link.inst_b == inst ? pop : at);
            if (b == kUnroutable) return false;
            added += b;
        }
        assign_[inst] = pop;
        used_[pop] += p_.instances[inst].demand;
        if (pop_count_[pop]++ == 0) ++open_pops_;
        partial_ += added;
        added_.push_back(added);
        return true;
    }

    void pop_back(std::size_t depth) {
        const int inst = order_[depth];
        const int pop = assign_[inst];
        partial_ -= added_.back();
        added_.pop_back();
        if (--pop_count_[pop] == 0) --open_pops_;
        used_[pop] = used_[pop] - p_.instances[inst].demand;
        assign_[inst] = -1;
    }

    void search(std::size_t depth) {
        refresh();
        if (prune(depth)) return;
        if (depth == order_.size()) {
            leaf();
            return;
        }
        if (!forward_ok(depth)) return;
        for (int pop : p_.instances[order_[depth]].candidates) {
            if (!push(depth, pop)) continue;
            search(depth + 1);
            pop_back(depth);
        }
    }

    const Incumbent& best() const { return best_; }

private:
    void refresh() {
        if (shared_ == nullptr) return;
        const auto v = shared_->version.load(std::memory_order_acquire);
        if (v == seen_) return;
        std::lock_guard<std::mutex> lock(shared_->mu);
        if (shared_->best.found && best_.beaten_by(shared_->best.cost, shared_->best.key)) best_ = shared_->best;
        seen_ = shared_->version.load(std::memory_order_acquire);
    }

    bool prune(std::size_t depth) const {
        if (!best_.found) return false;
        const Cost bound{m_.energy ? open_pops_ : 0, partial_ + suffix_min_[depth]};
        if (bound > best_.cost) return true;
        if (bound < best_.cost) return false;
        for (std::size_t d = 0; d < depth; ++d) {
            const int mine = assign_[order_[d]];
            if (mine != best_.key[d]) return mine > best_.key[d];
        }
        return false;
    }

    bool forward_ok(std::size_t depth) const {
        for (std::size_t k = depth + 1; k < order_.size(); ++k) {
            const int j = order_[k];
            const auto& cands = p_.instances[j].candidates;
            const bool any = std::any_of(cands.begin(), cands.end(), [&](int q) {
                return (used_[q] + p_.instances[j].demand).fits_within(p_.pop_residual[q]) &&
                       p_.rules_allow(assign_, j, q);
            });
            if (!any) return false;
        }
        return true;
    }

    void leaf() {
        auto routing = p_.route(assign_, true);
        if (!routing) return;
        Incumbent cand;
        cand.found = true;
        cand.cost = m_.cost_of(assign_, routing->cost);
        cand.key.reserve(order_.size());
        for (int i : order_) cand.key.push_back(assign_[i]);
        if (!best_.beaten_by(cand.cost, cand.key)) return;
        cand.placement = {assign_, *routing};
        best_ = cand;
        if (shared_ != nullptr) shared_->offer(best_);
    }

    const CostModel& m_;
    const PlacementProblem& p_;
    SharedIncumbent* shared_;
    std::vector<int> order_;
    std::vector<int> assign_;
    std::vector<ResourceVector> used_;
    std::vector<int> pop_count_;
    std::int64_t open_pops_ = 0;
    std::int64_t partial_ = 0;
    std::vector<std::int64_t> added_;
    std::vector<std::int64_t> suffix_min_;
    std::uint64_t seen_ = 0;
    Incumbent best_;
};

std::optional<OptimizeResult> to_result(const Incumbent& inc) {
    if (!inc.found) return std::nullopt;
    return OptimizeResult{inc.placement, inc.cost};
}

}  // namespace

std::optional<OptimizeResult> evaluate_placement(const PlacementProblem& p, const Objective& obj,
                                                 const std::vector<int>& assign) {
    return CostModel(p, obj).evaluate(assign);
}

std::optional<OptimizeResult> optimize_exact_serial(const PlacementProblem& p, const Objective& obj) {
    const CostModel model(p, obj);
    BranchAndBound bb(model, nullptr);
    bb.search(0);
    return to_result(bb.best());
}

std::optional<OptimizeResult> optimize_exact_parallel(const PlacementProblem& p, const Objective& obj) {
    const CostModel model(p, obj);
    const std::size_t n = p.instances.size();
    if (n < 2) return optimize_exact_serial(p, obj);

    // Root and second-level choices become independent tasks.
    const std::vector<int> order = p.search_order();
    std::vector<std::pair<int, int>> tasks;
    for (int a : p.instances[order[0]].candidates) {
        for (int b : p.instances[order[1]].candidates) tasks.emplace_back(a, b);
    }
    SharedIncumbent shared;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        BranchAndBound bb(model, &shared);
        if (!bb.push(0, tasks[t].first)) continue;
        if (bb.push(1, tasks[t].second)) bb.search(2);
    }
    return to_result(shared.best);
}

std::optional<OptimizeResult> optimize_heuristic(const PlacementProblem& p, const Objective& obj) {
    const CostModel model(p, obj);
    const std::size_t n = p.instances.size();

    // Best-fit decreasing: largest demand first, cheapest admissible PoP,
    // tightest remaining room on ties.
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return p.instances[a].demand > p.instances[b].demand;
    });
    std::vector<int> assign(n, -1);
    std::vector<ResourceVector> used(p.pop_ids.size());
    bool complete = true;
    for (int inst : order) {
        int choice = -1;
        std::tuple<std::int64_t, std::int64_t, std::int64_t> choice_key{};
        for (int q : p.instances[inst].candidates) {
            const ResourceVector after = used[q] + p.instances[inst].demand;
            if (!after.fits_within(p.pop_residual[q]) || !p.rules_allow(assign, inst, q)) continue;
            std::int64_t cost = model.inst_cost[inst][q];
            bool routable = true;
            for (int l : p.links_of[inst]) {
                const auto& link = p.links[l];
                const int other = link.inst_a == inst ? link.inst_b : link.inst_a;
                const int at = other == inst ? q : assign[other];
                if (at < 0) continue;
                const std::int64_t b = model.link_bound(l, link.inst_a == inst ? q : at, link.inst_b == inst ? q : at);
                if (b == kUnroutable) {
                    routable = false;
                    break;
                }
                cost += b;
            }
            if (!routable) continue;
            const std::int64_t opens = (model.energy && used[q].is_zero()) ? 1 : 0;
            const ResourceVector room = p.pop_residual[q] - after;
            const std::tuple<std::int64_t, std::int64_t, std::int64_t> key{
                opens, cost, room.vcpu + room.mem_gb + room.storage_gb};
            if (choice < 0 || key < choice_key) {
                choice = q;
                choice_key = key;
            }
        }
        if (choice < 0) {
            complete = false;
            break;
        }
        assign[inst] = choice;
        used[choice] += p.instances[inst].demand;
    }

    std::optional<OptimizeResult> current;
    if (complete) current = model.evaluate(assign);
    if (!current) {
        auto witness = first_feasible(p);
        if (!witness) return std::nullopt;
        current = model.evaluate(witness->assign);
        if (!current) return std::nullopt;
    }

    // Descent over single moves and pairwise swaps until no strict gain.
    bool improved = true;
    while (improved) {
        improved = false;
        std::vector<int> trial = current->placement.assign;
        for (std::size_t i = 0; i < n && !improved; ++i) {
            for (int q : p.instances[i].candidates) {
                if (q == trial[i]) continue;
                const int was = trial[i];
                trial[i] = q;
                auto r = model.evaluate(trial);
                if (r && r->cost < current->cost) {
                    current = std::move(r);
                    improved = true;
                    break;
                }
                trial[i] = was;
            }
        }
        for (std::size_t i = 0; i < n && !improved; ++i) {
            for (std::size_t j = i + 1; j < n && !improved; ++j) {
                if (trial[i] == trial[j]) continue;
                std::swap(trial[i], trial[j]);
                auto r = model.evaluate(trial);
                if (r && r->cost < current->cost) {
                    current = std::move(r);
                    improved = true;
                } else {
                    std::swap(trial[i], trial[j]);
                }
            }
        }
    }
    return current;
}

FeasibleSolution optimize(const InfrastructureMap& map, const AdmissionRequest& req, const Objective& obj) {
    obj.validate();
    const PlacementProblem p = PlacementProblem::build(map, req);
    for (const auto& inst : p.instances) {
        if (inst.candidates.empty()) throw NoFeasibleSolution("empty candidate set for " + to_string(inst.ref));
    }
    auto result = in_exact_regime(p) ? optimize_exact_parallel(p, obj) : optimize_heuristic(p, obj);
    if (!result) throw NoFeasibleSolution("no placement satisfies the admission constraints");
    FeasibleSolution sol = p.to_solution(result->placement.assign, result->placement.routing);
    if (auto bad = find_violation(map, req, sol)) throw NoFeasibleSolution("optimizer result invalid: " + *bad);
    return sol;
}

// --- Reservation ledger ---------------------------------------------------

ResourceOrchestrator::ResourceOrchestrator(InfrastructureMap map) : map_(std::move(map)) {
    for (const auto& r : map_.reservations) {
        unsigned long long n = 0;
        if (std::sscanf(r.id.c_str(), "res-%llu", &n) == 1) issued_ = std::max<std::uint64_t>(issued_, n);
    }
}

InfrastructureMap ResourceOrchestrator::snapshot() const {
    std::shared_lock lock(mu_);
    return map_;
}

std::vector<Reservation> ResourceOrchestrator::reservations_of(const std::string& order_id) const {
    std::shared_lock lock(mu_);
    std::vector<Reservation> out;
    for (const auto& r : map_.reservations) {
        if (r.order_id == order_id) out.push_back(r);
    }
    return out;
}

std::uint64_t ResourceOrchestrator::issued() const {
    std::shared_lock lock(mu_);
    return issued_;
}

std::vector<Reservation> ResourceOrchestrator::commit_locked(std::vector<Reservation> items,
                                                             InfrastructureMap& candidate) {
    std::uint64_t next = issued_;
    for (auto& r : items) {
        if (!r.window.well_formed()) throw InvalidRequest("reservation window is malformed");
        if (r.target == ReservationTarget::Pop) {
            if (map_.find_pop(r.resource_id) == nullptr) throw UnknownPop("unknown PoP '" + r.resource_id + "'");
            if (!r.amount.non_negative() || !r.amount.any_positive()) {
                throw InvalidRequest("reservation amount must be positive in some component");
            }
        } else {
            if (map_.find_link(r.resource_id) == nullptr) {
                throw DanglingRef("unknown WAN link '" + r.resource_id + "'");
            }
            if (r.bitrate_mbps <= 0) throw InvalidRequest("reservation bitrate must be positive");
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "res-%06llu", static_cast<unsigned long long>(++next));
        r.id = buf;
        candidate.reservations.push_back(r);
    }
    for (const auto& r : items) {
        if (r.target == ReservationTarget::Pop) {
            if (!residual_capacity(candidate, r.resource_id, r.window).non_negative()) {
                throw CapacityRaced("PoP " + r.resource_id + " no longer has room for " + to_string(r.amount));
            }
        } else if (residual_bitrate(candidate, r.resource_id, r.window) < 0) {
            throw CapacityRaced("WAN link " + r.resource_id + " no longer has " + std::to_string(r.bitrate_mbps) +
                                " Mbps");
        }
    }
    issued_ = next;
    return items;
}

std::vector<Reservation> ResourceOrchestrator::commit(std::vector<Reservation> items) {
    std::unique_lock lock(mu_);
    InfrastructureMap candidate = map_;
    auto out = commit_locked(std::move(items), candidate);
    map_ = std::move(candidate);
    return out;
}

std::vector<Reservation> ResourceOrchestrator::replace(const std::string& order_id, std::vector<Reservation> items) {
    std::unique_lock lock(mu_);
    InfrastructureMap candidate = map_;
    std::erase_if(candidate.reservations, [&](const Reservation& r) { return r.order_id == order_id; });
    auto out = commit_locked(std::move(items), candidate);
    map_ = std::move(candidate);
    return out;
}

std::size_t ResourceOrchestrator::release(const std::string& order_id) {
    std::unique_lock lock(mu_);
    return std::erase_if(map_.reservations, [&](const Reservation& r) { return r.order_id == order_id; });
}

void ResourceOrchestrator::install(const std::string& order_id, const std::vector<Reservation>& items) {
    std::unique_lock lock(mu_);
    std::erase_if(map_.reservations, [&](const Reservation& r) { return r.order_id == order_id; });
    for (const auto& r : items) {
        map_.reservations.push_back(r);
        unsigned long long n = 0;
        if (std::sscanf(r.id.c_str(), "res-%llu", &n) == 1) issued_ = std::max<std::uint64_t>(issued_, n);
    }
}

void ResourceOrchestrator::reset(InfrastructureMap map, std::uint64_t issued) {
    std::unique_lock lock(mu_);
    map_ = std::move(map);
    issued_ = issued;
}

std::vector<Reservation> build_reservations(const std::string& order_id, const AdmissionRequest& req,
                                            const FeasibleSolution& sol, ReservationMode mode) {
    std::map<std::string, ResourceVector> per_pop;
    for (const auto& v : req.deployment.vnfs) {
        for (int i = 0; i < v.instance_count; ++i) per_pop[sol.assignment.at({v.key, i})] += v.demand;
    }
    std::map<std::string, std::int64_t> per_link;
    for (const auto& l : req.deployment.links) {
        auto it = sol.link_routes.find(l.key);
        if (it == sol.link_routes.end()) continue;
        for (const auto& hop : it->second) per_link[hop] += l.bitrate_mbps;
    }
    std::vector<Reservation> out;
    for (const auto& w : req.windows) {
        for (const auto& [pop, amount] : per_pop) {
            if (!amount.any_positive()) continue;
            Reservation r;
            r.order_id = order_id;
            r.target = ReservationTarget::Pop;
            r.resource_id = pop;
            r.amount = amount;
            r.window = w;
            r.mode = mode;
            out.push_back(r);
        }
        for (const auto& [link, bitrate] : per_link) {
            if (bitrate <= 0) continue;
            Reservation r;
            r.order_id = order_id;
            r.target = ReservationTarget::WanLink;
            r.resource_id = link;
            r.bitrate_mbps = bitrate;
            r.window = w;
            r.mode = mode;
            out.push_back(r);
        }
    }
    return out;
}

std::vector<Reservation> reserve(ResourceOrchestrator& ledger, ServiceOrder& order, const AdmissionRequest& req,
                                 const FeasibleSolution& sol, ReservationMode mode) {
    if (order.status != OrderStatus::Admitted) {
        throw IllegalTransition("order " + order.id + " is " + to_string(order.status) + ", not ADMITTED");
    }
    try {
        auto out = ledger.commit(build_reservations(order.id, req, sol, mode));
        order.transition(OrderStatus::Reserved);
        return out;
    } catch (const CapacityRaced&) {
        order.transition(OrderStatus::Designed);
        throw;
    }
}

std::string utilization_table(const InfrastructureMap& map) {
    std::ostringstream out;
    char line[256];
    int width = 3;
    for (const auto& pop : map.pops) width = std::max(width, static_cast<int>(pop.id.size()));
    std::snprintf(line, sizeof line, "%-*s %-24s %-18s %-18s %-18s %6s\n", width, "POP", "WINDOW", "HARD_PEAK",
                  "RESIDUAL", "CAPACITY", "UTIL%");
    out << line;
    auto fmt = [](const ResourceVector& r) {
        return std::to_string(r.vcpu) + "/" + std::to_string(r.mem_gb) + "/" + std::to_string(r.storage_gb);
    };
    for (const auto& pop : map.pops) {
        std::vector<TimeWindow> windows;
        for (const auto& r : map.reservations) {
            if (r.target == ReservationTarget::Pop && r.resource_id == pop.id &&
                std::find(windows.begin(), windows.end(), r.window) == windows.end()) {
                windows.push_back(r.window);
            }
        }
        std::sort(windows.begin(), windows.end(), [](const TimeWindow& a, const TimeWindow& b) {
            return std::tie(a.start, a.end, a.recurrence) < std::tie(b.start, b.end, b.recurrence);
        });
        for (const auto& w : windows) {
            const ResourceVector hard = peak_hard_load(map, pop.id, w);
            const ResourceVector residual = residual_capacity(map, pop.id, w);
            double util = 0.0;
            auto share = [](std::int64_t used, std::int64_t cap) {
                return cap > 0 ? 100.0 * static_cast<double>(used) / static_cast<double>(cap) : 0.0;
            };
            util = std::max({share(hard.vcpu, pop.capacity.vcpu), share(hard.mem_gb, pop.capacity.mem_gb),
                             share(hard.storage_gb, pop.capacity.storage_gb)});
            const std::string end = w.end == kForeverMinutes ? "inf" : std::to_string(w.end);
            const std::string window = std::to_string(w.start) + "-" + end + " " + to_string(w.recurrence);
            std::snprintf(line, sizeof line, "%-*s %-24s %-18s %-18s %-18s %6.1f\n", width, pop.id.c_str(), window.c_str(),
                          fmt(hard).c_str(), fmt(residual).c_str(), fmt(pop.capacity).c_str(), util);
            out << line;
        }
    }
    return out.str();
}

json to_json(const Objective& o) {
    return {{"kind", to_string(o.kind)},
            {"weights", to_json(o.weights)},
            {"preferred_pops", std::vector<std::string>(o.preferred_pops.begin(), o.preferred_pops.end())}};
}

Objective objective_from_json(const json& j) {
    Objective o;
    o.kind = objective_kind_from_string(field_or<std::string>(j, "kind", std::string("MIN_RESOURCE"), "objective"));
    if (j.contains("weights")) o.weights = resource_vector_from_json(j.at("weights"), "objective.weights");
    for (const auto& p : field_or<std::vector<std::string>>(j, "preferred_pops", {}, "objective")) {
        o.preferred_pops.insert(p);
    }
    o.validate();
    return o;
}

}  // namespace nsl
