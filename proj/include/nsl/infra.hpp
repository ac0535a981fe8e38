#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsl/json_util.hpp"
#include "nsl/resources.hpp"

namespace nsl {

using CapabilitySet = std::set<std::string>;

// Default capability vocabulary; a deployment may extend it on load.
inline const CapabilitySet kDefaultCapabilities{"HA", "HIGH_IO", "GPU"};

struct PoP {
    std::string id;
    std::string region;
    CapabilitySet capabilities;
    ResourceVector capacity;
    std::string owner_domain;

    bool operator==(const PoP&) const = default;
};

struct WanLink {
    std::string id;
    std::string endpoint_a;
    std::string endpoint_b;
    std::int64_t capacity_mbps = 0;
    int reliability_class = 1;  // 1..3, higher is more reliable

    bool operator==(const WanLink&) const = default;
};

enum class ReservationMode { Hard, Soft };
enum class ReservationTarget { Pop, WanLink };

// Time-windowed booking of PoP resources or WAN bitrate.
struct Reservation {
    std::string id;
    std::string order_id;
    ReservationTarget target = ReservationTarget::Pop;
    std::string resource_id;  // PoP id or WanLink id
    ResourceVector amount;    // PoP reservations
    std::int64_t bitrate_mbps = 0;  // WAN reservations
    TimeWindow window;
    ReservationMode mode = ReservationMode::Hard;

    bool operator==(const Reservation&) const = default;
};

inline constexpr double kDefaultOverbookingFactor = 1.5;

struct InfrastructureMap {
    std::vector<PoP> pops;
    std::vector<WanLink> wan_links;
    std::vector<Reservation> reservations;
    double overbooking_factor = kDefaultOverbookingFactor;

    const PoP* find_pop(const std::string& id) const;
    const WanLink* find_link(const std::string& id) const;
    std::optional<std::size_t> pop_index(const std::string& id) const;

    bool operator==(const InfrastructureMap&) const = default;
};

// Resource-agnostic projection of a PoP. Holds no quantities by construction.
struct AbstractPopView {
    std::string pop_id;
    std::string region;
    CapabilitySet capabilities;

    bool operator==(const AbstractPopView&) const = default;
};

std::vector<AbstractPopView> abstract_view(const InfrastructureMap& map);

// Capacity left at `pop` throughout `window`: the tighter of
//   capacity - peak(HARD)  and  floor(beta * capacity) - peak(HARD + SOFT).
// Throws UnknownPop.
ResourceVector residual_capacity(const InfrastructureMap& map, const std::string& pop,
                                 const TimeWindow& window);

// Headroom for a SOFT booking: floor(beta * capacity) - peak(HARD + SOFT).
ResourceVector soft_headroom(const InfrastructureMap& map, const std::string& pop,
                             const TimeWindow& window);

// Same rules applied to WAN bitrate.
std::int64_t residual_bitrate(const InfrastructureMap& map, const std::string& link,
                              const TimeWindow& window);
std::int64_t soft_headroom_bitrate(const InfrastructureMap& map, const std::string& link,
                                   const TimeWindow& window);

// Peak concurrent HARD demand at `pop` in `window`.
ResourceVector peak_hard_load(const InfrastructureMap& map, const std::string& pop,
                              const TimeWindow& window);

// Checks the structural invariants; throws ParseError/DanglingRef.
void validate(const InfrastructureMap& map, const CapabilitySet& vocabulary = kDefaultCapabilities);

InfrastructureMap infra_from_json(const json& j,
                                  const CapabilitySet& vocabulary = kDefaultCapabilities);
InfrastructureMap load_infra(const std::string& path,
                             const CapabilitySet& vocabulary = kDefaultCapabilities);
json to_json(const InfrastructureMap& map);

json to_json(const Reservation& r);
Reservation reservation_from_json(const json& j);
std::string to_string(ReservationMode m);
ReservationMode reservation_mode_from_string(const std::string& s);

}  // namespace nsl
