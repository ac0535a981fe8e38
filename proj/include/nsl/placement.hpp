#pragma once

#include <compare>
#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "nsl/admission.hpp"
#include "nsl/problem.hpp"

namespace nsl {

enum class ObjectiveKind { MinResource, MinEnergy };

std::string to_string(ObjectiveKind k);
ObjectiveKind objective_kind_from_string(const std::string& s);

// Instances placed on a preferred PoP cost nothing; elsewhere they cost
// weights . demand. Every link costs bitrate x hops.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::MinResource;
    ResourceVector weights{1, 1, 1};
    std::set<std::string> preferred_pops;

    // Throws InvalidRequest unless every weight is positive.
    void validate() const;
    bool operator==(const Objective&) const = default;
};

// Lexicographic. `pops` is the count of distinct PoPs for MIN_ENERGY and 0
// for MIN_RESOURCE.
struct Cost {
    std::int64_t pops = 0;
    std::int64_t resource = 0;
    friend auto operator<=>(const Cost&, const Cost&) = default;
};

std::string to_string(const Cost& c);

// Cost of a solution evaluated from its assignment and routes alone.
Cost solution_cost(const AdmissionRequest& req, const Objective& obj, const FeasibleSolution& sol);

inline constexpr std::size_t kMaxExactInstances = 10;
inline constexpr std::size_t kMaxExactPops = 8;

bool in_exact_regime(const PlacementProblem& p);

struct OptimizeResult {
    Placement placement;
    Cost cost;
};

// Branch and bound over the full search space. Among equal-cost placements
// the one whose assignment, listed in search order, is lexicographically
// smallest wins; the serial and parallel kernels therefore agree exactly.
std::optional<OptimizeResult> optimize_exact_serial(const PlacementProblem& p, const Objective& obj);
std::optional<OptimizeResult> optimize_exact_parallel(const PlacementProblem& p, const Objective& obj);

// Best-fit-decreasing construction followed by move and swap descent.
std::optional<OptimizeResult> optimize_heuristic(const PlacementProblem& p, const Objective& obj);

// Cost of a complete placement with its cheapest routing, or nullopt when
// the placement is infeasible.
std::optional<OptimizeResult> evaluate_placement(const PlacementProblem& p, const Objective& obj,
                                                 const std::vector<int>& assign);

// Exact regime uses the parallel branch and bound, otherwise the heuristic.
// The result is re-validated; throws NoFeasibleSolution when none exists.
FeasibleSolution optimize(const InfrastructureMap& map, const AdmissionRequest& req, const Objective& obj);

// Single-writer reservation ledger over the infrastructure map. Readers take
// snapshots; every mutation validates the new bookings against the current
// reservations before it becomes visible.
class ResourceOrchestrator {
public:
    explicit ResourceOrchestrator(InfrastructureMap map);

    InfrastructureMap snapshot() const;
    std::vector<Reservation> reservations_of(const std::string& order_id) const;

    // Assigns ids and appends `items`, all or none. Throws CapacityRaced when
    // a residual of an affected resource would turn negative.
    std::vector<Reservation> commit(std::vector<Reservation> items);
    // Drops the order's bookings and commits `items` in one step.
    std::vector<Reservation> replace(const std::string& order_id, std::vector<Reservation> items);
    // Returns the number of reservations removed.
    std::size_t release(const std::string& order_id);

    std::uint64_t issued() const;

    // Replaces the order's bookings with `items` verbatim, ids included.
    // Used when rebuilding state from recorded results.
    void install(const std::string& order_id, const std::vector<Reservation>& items);
    // Replaces the whole map and the id counter.
    void reset(InfrastructureMap map, std::uint64_t issued);

private:
    std::vector<Reservation> commit_locked(std::vector<Reservation> items, InfrastructureMap& candidate);

    mutable std::shared_mutex mu_;
    InfrastructureMap map_;
    std::uint64_t issued_ = 0;
};

// Bookings for a placement: one per PoP and window with the summed demand,
// one per WAN link and window with the summed bitrate of the routes over it.
std::vector<Reservation> build_reservations(const std::string& order_id, const AdmissionRequest& req,
                                            const FeasibleSolution& sol, ReservationMode mode);

// ADMITTED -> RESERVED. On CapacityRaced the order returns to DESIGNED and
// the error propagates.
std::vector<Reservation> reserve(ResourceOrchestrator& ledger, ServiceOrder& order, const AdmissionRequest& req,
                                 const FeasibleSolution& sol, ReservationMode mode);

// Per-PoP, per-window utilization: peak HARD and HARD+SOFT load against
// capacity, one row per distinct reservation window.
std::string utilization_table(const InfrastructureMap& map);

json to_json(const Objective& o);
Objective objective_from_json(const json& j);

}  // namespace nsl
