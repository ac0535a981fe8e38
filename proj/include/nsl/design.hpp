#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "nsl/catalog.hpp"
#include "nsl/ordering.hpp"

namespace nsl {

inline constexpr int kHoursPerDay = 24;
inline constexpr std::size_t kMaxOptionalIls = 6;

// Per-hour offered load as a fraction of the ordered (target) volume.
struct TrafficProfile {
    enum class Source { HistoricalModel, Flat };

    std::array<double, kHoursPerDay> hourly_load{};
    Source source = Source::Flat;

    static TrafficProfile flat();
    static TrafficProfile from_loads(const std::vector<double>& loads,
                                     Source source = Source::HistoricalModel);
    // Throws ParseError unless every entry is in (0, 1] and the peak is 1.0.
    void validate() const;
    std::vector<double> loads() const { return {hourly_load.begin(), hourly_load.end()}; }
};

// Reads a 24-row table ("hour,load" or bare "load" per row; '#' comments and
// a non-numeric header row are skipped).
TrafficProfile parse_profile_csv(const std::string& text);
TrafficProfile load_profile_csv(const std::string& path);
std::vector<double> parse_load_trace(const std::string& text);

struct TopologyCover {
    std::vector<std::string> nsd_ids;
    std::vector<std::string> warnings;  // AmbiguousCover notes
};

// Greedy longest-match segmentation of `topology` into NS descriptor chains,
// lowest id first on ties. Throws UncoverableTopology.
TopologyCover map_topology(const Catalog& cat, const std::vector<std::string>& topology);

// Cheapest (flavor, level) of `nsd_id` whose flavor offers every functional
// tag and whose declared capacity covers `load` x the required performance.
// Cost is the aggregate resource vector, compared lexicographically.
// Throws NoFlavorMatches, NoIlMeetsPerformance.
Triplet select_triplet(const Catalog& cat, const std::string& nsd_id, const NetworkReqs& reqs,
                       double load = 1.0);

struct NslDesign {
    std::string order_id;
    NslInstantiationLevel target_il;
    std::vector<NslInstantiationLevel> optional_ils;  // ascending capacity
    std::map<std::string, PerformanceVector> il_capacity;
    std::map<std::string, ResourceVector> il_cost;
    PerformanceVector required;

    // Optional levels followed by the target, ascending capacity.
    std::vector<NslInstantiationLevel> il_set() const;
    const NslInstantiationLevel* find_il(const std::string& id) const;
    // Fraction of the ordered volume level `id` can carry.
    double served_load(const std::string& id) const;

    bool operator==(const NslDesign&) const = default;
};

// Capacity of a slice level: the bottleneck over its NS instances.
PerformanceVector nsl_capacity(const Catalog& cat, const NslInstantiationLevel& il);
ResourceVector nsl_cost(const Catalog& cat, const NslInstantiationLevel& il);

// Key prefixes used when flattening the triplets of a slice level.
std::vector<std::string> triplet_prefixes(const NslInstantiationLevel& il);

// Flattened slice deployment: every triplet expanded plus the template's
// inter-NS links anchored at the first VNF carrying each node tag.
ResolvedDeployment resolve_slice(const Catalog& cat, const NslInstantiationLevel& il,
                                 const SliceRequirements& reqs);

// Builds the target level and the optional levels implied by `profile`.
// Pure; throws the mapping/selection errors.
NslDesign build_design(const Catalog& cat, const std::string& order_id, const SliceRequirements& reqs,
                       const TrafficProfile& profile);

// Order-aware wrapper: SUBMITTED -> DESIGNED, or REJECTED with the cause set
// before the error propagates.
NslDesign build_design(const Catalog& cat, ServiceOrder& order, const TrafficProfile& profile);

// Rejection cause tag for a design-stage error code.
std::string design_rejection_cause(const std::string& error_code);

json to_json(const NslDesign& d);
NslDesign design_from_json(const json& j);

}  // namespace nsl
