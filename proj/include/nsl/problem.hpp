#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsl/admission.hpp"

namespace nsl {

inline constexpr int kMaxRouteHops = 4;

// Index-based form of an admission request against a capacity snapshot.
// Shared by the feasibility search and the placement optimizers.
class PlacementProblem {
public:
    struct Instance {
        InstanceRef ref;
        ResourceVector demand;
        std::vector<int> candidates;  // PoP indices, ascending
    };
    // Co-location (same) or separation constraint between two instances.
    struct PairRule {
        int a = 0;
        int b = 0;
        bool same = false;
        std::string origin;
    };
    struct Link {
        std::string key;
        int inst_a = 0;
        int inst_b = 0;
        std::int64_t bitrate = 0;
        int min_class = 1;
    };
    struct Path {
        std::vector<int> wan;  // WAN link indices from pop_a to pop_b
        int min_class = 3;
    };

    static PlacementProblem build(const InfrastructureMap& map, const AdmissionRequest& req);

    std::vector<std::string> pop_ids;
    std::vector<ResourceVector> pop_residual;  // tightest over the request windows
    std::vector<std::string> wan_ids;
    std::vector<std::int64_t> wan_residual;
    std::vector<Instance> instances;  // canonical (request) order
    std::vector<PairRule> rules;
    std::vector<Link> links;
    std::vector<std::vector<int>> rules_of;  // instance -> rule indices
    std::vector<std::vector<int>> links_of;  // instance -> link indices

    // Simple paths of at most kMaxRouteHops hops, shortest first, then by
    // WAN index sequence. Empty for a == b.
    const std::vector<Path>& paths(int pop_a, int pop_b) const;

    // Rules between `inst` and every instance already placed in `assign`
    // (-1 marks unplaced) hold when `inst` goes to `pop`.
    bool rules_allow(const std::vector<int>& assign, int inst, int pop) const;

    // Whether link `l` has at least one path meeting its class and bitrate,
    // ignoring other links' use.
    bool link_routable(int l, int pop_a, int pop_b) const;

    struct Routing {
        std::vector<int> path_choice;  // per link; -1 when co-located
        std::int64_t cost = 0;         // sum of bitrate x hops
    };

    // Routes every link of a complete assignment under shared WAN residuals.
    // With `minimize`, returns the cheapest routing (first in enumeration
    // order on ties); otherwise the first feasible one.
    std::optional<Routing> route(const std::vector<int>& assign, bool minimize) const;

    // Capacity and rule check of a complete assignment (routing excluded).
    bool placement_ok(const std::vector<int>& assign) const;

    FeasibleSolution to_solution(const std::vector<int>& assign, const Routing& routing) const;

    // Instance order for search: fewest candidates first, canonical order
    // on ties.
    std::vector<int> search_order() const;

private:
    std::vector<std::vector<std::vector<Path>>> paths_;
};

struct Placement {
    std::vector<int> assign;  // PoP index per instance, canonical order
    PlacementProblem::Routing routing;
};

// First solution found by backtracking with forward checking. Dropping
// `capacity` ignores PoP residuals; dropping `connectivity` skips routing.
std::optional<Placement> first_feasible(const PlacementProblem& p, bool capacity = true,
                                        bool connectivity = true);

}  // namespace nsl
