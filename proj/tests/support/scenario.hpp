#pragma once

// Random scenario generation and brute-force oracles shared by the unit tests
// and the acceptance runner. Oracles work from the scenario description and
// the raw infrastructure map; they never call the library's search code.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nsl/orchestrator.hpp"

namespace nsl::testkit {

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi);  // inclusive
bool chance(Rng& rng, double p);

// One VNF group of the generated NS: `count` instances of VNF "vnf-g<i>"
// carrying node tag "t<i>".
struct GroupSpec {
    int count = 1;
    ResourceVector demand;
    std::vector<std::pair<bool, int>> affinity;  // (same PoP?, peer group)
    int backups = 0;
    bool ha = false;
};

struct LinkSpec {
    int a = 0;
    int b = 0;
    std::int64_t bitrate = 0;
    int cls = 1;
};

struct ScenarioSpec {
    std::vector<GroupSpec> groups;
    std::vector<LinkSpec> links;
    std::map<std::string, std::set<std::string>> geo;  // by node tag
    std::vector<TimeWindow> windows;
    // Level k of `levels` carries ceil(count * k / levels) instances per
    // group, the same fraction of link bitrate and of the performance.
    int levels = 1;
};

struct ScenarioParams {
    int min_pops = 1, max_pops = 4;
    int max_wans = 6;
    int min_instances = 1, max_instances = 4;
    int max_groups = 3;
    int max_links = 2;
    int levels = 1;
    int max_existing_reservations = 3;
    int regions = 3;
    // Scales PoP capacity down so orders compete.
    bool tight = false;
};

std::string group_key(int g);  // resolved key of group g
std::string link_key(int l);
std::string tag_of(int g);

InfrastructureMap random_infra(Rng& rng, const ScenarioParams& p);
ScenarioSpec random_spec(Rng& rng, const ScenarioParams& p);

// Catalog with VNFs vnf-g*, NS "nsd-s" (flavor "f", levels il-1..il-L) and
// template "t" whose topology is the group tags in order.
Catalog scenario_catalog(const ScenarioSpec& spec);
int level_count(const GroupSpec& g, int level, int levels);

// Submits, designs (flat profile, so the target is the top level) and admits
// the scenario order against `map`.
struct ScenarioRun {
    Catalog catalog;
    ServiceOrder order;
    NslDesign design;
    AdmissionVerdict verdict;
};
ScenarioRun admit_scenario(const ScenarioSpec& spec, const InfrastructureMap& map);

// A scenario order carried through design with `profile`, admission against
// the ledger's current map, booking and preparation.
struct PreparedSlice {
    ServiceOrder order;
    NslDesign design;
    AdmissionVerdict verdict;
    SliceRuntime runtime;
};
// Nullopt when admission rejects or the booking races.
std::optional<PreparedSlice> prepare_scenario(const Catalog& cat, const std::string& order_id,
                                              const TrafficProfile& profile, ResourceOrchestrator& ledger,
                                              const LifecycleConfig& cfg = {});

// --- oracles ----------------------------------------------------------------

// Minute-by-minute residual; valid when all reservations and the window
// start below a few thousand minutes.
ResourceVector brute_residual(const InfrastructureMap& map, const std::string& pop, const TimeWindow& w);
std::int64_t brute_residual_bitrate(const InfrastructureMap& map, const std::string& link, const TimeWindow& w);

// Whether `w` is active at minute `t`.
bool active_at(const TimeWindow& w, std::int64_t t);

// Flattened problem as the oracle sees it.
struct OracleProblem {
    struct Inst {
        InstanceRef ref;
        ResourceVector demand;
        std::vector<int> allowed;  // PoP indices
    };
    struct Rule {
        int a = 0, b = 0;
        bool same = false;
    };
    struct Link {
        std::string key;
        int a = 0, b = 0;  // instance indices
        std::int64_t bitrate = 0;
        int cls = 1;
    };
    struct Wan {
        std::string id;
        int a = 0, b = 0;
        int cls = 1;
        std::vector<std::int64_t> residual;  // per window
    };

    std::vector<std::string> pops;
    std::vector<std::vector<ResourceVector>> residual;  // [pop][window]
    std::vector<Wan> wans;
    std::vector<Inst> insts;
    std::vector<Rule> rules;
    std::vector<Link> links;
    std::size_t windows = 0;
    std::string empty_cause;  // "geolocation" / "reliability" when step 1 fails
};

OracleProblem oracle_problem(const InfrastructureMap& map, const ScenarioSpec& spec, int level);

// Every simple WAN path of at most 4 hops from PoP a to PoP b.
std::vector<std::vector<int>> oracle_paths(const OracleProblem& p, int a, int b);

// Calls `visit(assign, routes)` for each complete solution; stops when it
// returns false. Routes are WAN index lists per link, empty when co-located.
void enumerate_solutions(const OracleProblem& p, bool capacity, bool connectivity,
                         const std::function<bool(const std::vector<int>&, const std::vector<std::vector<int>>&)>& visit);

struct OracleVerdict {
    bool feasible = false;
    std::string cause;  // geolocation, reliability, AFFINITY, CAPACITY, CONNECTIVITY
};

OracleVerdict oracle_admission(const OracleProblem& p);

// Violated constraint of a library solution, or nullopt.
std::optional<std::string> oracle_check(const OracleProblem& p, const FeasibleSolution& sol);

std::optional<Cost> oracle_min_cost(const OracleProblem& p, const Objective& obj);
Cost oracle_cost(const OracleProblem& p, const Objective& obj, const FeasibleSolution& sol);

// Instants at which the HARD sum at some PoP exceeds capacity, or the
// HARD + SOFT sum exceeds beta x capacity. Empty when the ledger is sound.
std::vector<std::string> ledger_violations(const InfrastructureMap& map);

// Either objective kind, weights 1..3, each PoP preferred with chance 0.2.
Objective random_objective(Rng& rng, const InfrastructureMap& map);

// Random 24-hour profile with peak exactly 1.0.
std::vector<double> random_profile(Rng& rng);

// Catalog, infra and configuration read from the fixtures directory.
std::string fixtures_dir();

}  // namespace nsl::testkit
