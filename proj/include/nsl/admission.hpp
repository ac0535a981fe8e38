#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsl/catalog.hpp"
#include "nsl/design.hpp"
#include "nsl/infra.hpp"
#include "nsl/ordering.hpp"

namespace nsl {

struct InstanceRef {
    std::string vnf_key;
    int index = 0;
    friend auto operator<=>(const InstanceRef&, const InstanceRef&) = default;
};

std::string to_string(const InstanceRef& r);

using CandidateSet = std::map<InstanceRef, std::set<std::string>>;

// Step 1 failure: some instance has no PoP satisfying location or capability.
class EmptyCandidateSet : public Error {
public:
    EmptyCandidateSet(std::string cause, const std::string& what)
        : Error("EmptyCandidateSet", what), cause_(std::move(cause)) {}
    // "geolocation" or "reliability"
    const std::string& cause() const noexcept { return cause_; }

private:
    std::string cause_;
};

// A PoP is a candidate for an instance iff its region is allowed for the
// instance's node tag (no entry: any region) and, when the plan asks for
// it, the PoP carries HA. Consults only the resource-agnostic view.
CandidateSet compute_candidates(const std::vector<AbstractPopView>& view,
                                const std::map<std::string, std::set<std::string>>& geo_reqs,
                                const ResolvedDeployment& plans);

// Far-future end used when an order states no temporal requirement.
inline constexpr std::int64_t kForeverMinutes = std::int64_t{1} << 50;

struct AdmissionRequest {
    ResolvedDeployment deployment;  // target level, resolved; links carry bitrate and class
    CandidateSet candidates;
    std::vector<TimeWindow> windows;  // sorted, non-overlapping

    bool operator==(const AdmissionRequest&) const = default;
};

// Sorts windows and rejects overlapping ones (InvalidRequest). An empty
// window list becomes a single open-ended window.
AdmissionRequest make_request(ResolvedDeployment deployment, CandidateSet candidates,
                              std::vector<TimeWindow> windows);

struct FeasibleSolution {
    std::map<InstanceRef, std::string> assignment;
    // WAN link ids from the PoP of endpoint_a to the PoP of endpoint_b; empty
    // when co-located.
    std::map<std::string, std::vector<std::string>> link_routes;

    bool operator==(const FeasibleSolution&) const = default;
};

enum class InfeasibleCause { Capacity, Affinity, Connectivity };

std::string to_string(InfeasibleCause c);
InfeasibleCause infeasible_cause_from_string(const std::string& s);

struct Infeasible {
    InfeasibleCause cause = InfeasibleCause::Capacity;
    std::string binding_constraint;
};

struct FeasibilityResult {
    std::optional<FeasibleSolution> solution;
    std::optional<Infeasible> infeasible;

    bool feasible() const { return solution.has_value(); }
};

// Backtracking over instances, fewest candidates first, with forward checking
// on PoP residuals; virtual links are routed over simple WAN paths of at most
// kMaxRouteHops hops, shortest first.
FeasibilityResult check_feasibility(const InfrastructureMap& map, const AdmissionRequest& req);

// Independent re-validation of a witness. Returns the first violated
// constraint, or nullopt when the solution satisfies the request.
std::optional<std::string> find_violation(const InfrastructureMap& map, const AdmissionRequest& req,
                                          const FeasibleSolution& sol);

struct SlaRecord {
    std::string order_id;
    std::string tenant_id;
    PerformanceVector performance;
    std::vector<TimeWindow> windows;
    std::string target_il;
    bool operator==(const SlaRecord&) const = default;
};

struct AdmissionVerdict {
    bool admitted = false;
    std::string cause;   // rejection cause tag; empty when admitted
    std::string detail;  // binding constraint, human readable
    std::optional<FeasibleSolution> solution;
    std::optional<SlaRecord> sla;
    std::optional<AdmissionRequest> request;
};

// Request for the order's target level: flattened deployment, step-1
// candidates and the ordered windows. Throws EmptyCandidateSet.
AdmissionRequest build_request(const Catalog& cat, const ServiceOrder& order, const NslDesign& design,
                               const std::vector<AbstractPopView>& view);

// Steps 1-3 for a DESIGNED order. Sets the order ADMITTED or REJECTED.
AdmissionVerdict admit(const Catalog& cat, ServiceOrder& order, const NslDesign& design,
                       const InfrastructureMap& map);
// Same evaluation without touching the order.
AdmissionVerdict evaluate_admission(const Catalog& cat, const ServiceOrder& order, const NslDesign& design,
                                    const InfrastructureMap& map);

json to_json(const InstanceRef& r);
json to_json(const FeasibleSolution& s);
FeasibleSolution solution_from_json(const json& j);
json to_json(const AdmissionVerdict& v);
json to_json(const SlaRecord& s);
SlaRecord sla_from_json(const json& j);

}  // namespace nsl
