#include "nsl/infra.hpp"

#include <cmath>
#include <set>

namespace nsl {

const PoP* InfrastructureMap::find_pop(const std::string& id) const {
    for (const auto& p : pops) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const WanLink* InfrastructureMap::find_link(const std::string& id) const {
    for (const auto& l : wan_links) {
        if (l.id == id) return &l;
    }
    return nullptr;
}

std::optional<std::size_t> InfrastructureMap::pop_index(const std::string& id) const {
    for (std::size_t i = 0; i < pops.size(); ++i) {
        if (pops[i].id == id) return i;
    }
    return std::nullopt;
}

std::vector<AbstractPopView> abstract_view(const InfrastructureMap& map) {
    std::vector<AbstractPopView> out;
    out.reserve(map.pops.size());
    for (const auto& p : map.pops) out.push_back({p.id, p.region, p.capabilities});
    return out;
}

namespace {

std::int64_t overbooked(std::int64_t cap, double beta) {
    return static_cast<std::int64_t>(std::floor(static_cast<double>(cap) * beta));
}

ResourceVector overbooked(const ResourceVector& cap, double beta) {
    return {overbooked(cap.vcpu, beta), overbooked(cap.mem_gb, beta),
            overbooked(cap.storage_gb, beta)};
}

template <typename Amount, typename Get>
Amount peak_for(const InfrastructureMap& map, ReservationTarget target, const std::string& id,
                const TimeWindow& window, bool hard_only, Get get) {
    std::vector<TimeWindow> windows;
    std::vector<Amount> amounts;
    for (const auto& r : map.reservations) {
        if (r.target != target || r.resource_id != id) continue;
        if (hard_only && r.mode != ReservationMode::Hard) continue;
        windows.push_back(r.window);
        amounts.push_back(get(r));
    }
    return peak_concurrent(window, windows, amounts);
}

const PoP& require_pop(const InfrastructureMap& map, const std::string& pop) {
    const PoP* p = map.find_pop(pop);
    if (p == nullptr) throw UnknownPop("unknown PoP '" + pop + "'");
    return *p;
}

const WanLink& require_link(const InfrastructureMap& map, const std::string& link) {
    const WanLink* l = map.find_link(link);
    if (l == nullptr) throw DanglingRef("unknown WAN link '" + link + "'");
    return *l;
}

auto pop_amount = [](const Reservation& r) { return r.amount; };
auto link_amount = [](const Reservation& r) { return r.bitrate_mbps; };

}  // namespace

ResourceVector peak_hard_load(const InfrastructureMap& map, const std::string& pop,
                              const TimeWindow& window) {
    require_pop(map, pop);
    return peak_for<ResourceVector>(map, ReservationTarget::Pop, pop, window, true, pop_amount);
}

ResourceVector soft_headroom(const InfrastructureMap& map, const std::string& pop,
                             const TimeWindow& window) {
    const PoP& p = require_pop(map, pop);
    const auto all =
        peak_for<ResourceVector>(map, ReservationTarget::Pop, pop, window, false, pop_amount);
    return overbooked(p.capacity, map.overbooking_factor) - all;
}

ResourceVector residual_capacity(const InfrastructureMap& map, const std::string& pop,
                                 const TimeWindow& window) {
    const PoP& p = require_pop(map, pop);
    const auto hard = peak_hard_load(map, pop, window);
    return cwise_min(p.capacity - hard, soft_headroom(map, pop, window));
}

std::int64_t soft_headroom_bitrate(const InfrastructureMap& map, const std::string& link,
                                   const TimeWindow& window) {
    const WanLink& l = require_link(map, link);
    const auto all = peak_for<std::int64_t>(map, ReservationTarget::WanLink, link, window, false,
                                            link_amount);
    return overbooked(l.capacity_mbps, map.overbooking_factor) - all;
}

std::int64_t residual_bitrate(const InfrastructureMap& map, const std::string& link,
                              const TimeWindow& window) {
    const WanLink& l = require_link(map, link);
    const auto hard = peak_for<std::int64_t>(map, ReservationTarget::WanLink, link, window, true,
                                             link_amount);
    return std::min(l.capacity_mbps - hard, soft_headroom_bitrate(map, link, window));
}

void validate(const InfrastructureMap& map, const CapabilitySet& vocabulary) {
    std::set<std::string> ids;
    for (const auto& p : map.pops) {
        const std::string ctx = "pop '" + p.id + "'";
        if (p.id.empty()) throw ParseError("pop with empty id");
        if (!ids.insert(p.id).second) throw ParseError(ctx + ": duplicate id");
        if (p.region.empty()) throw ParseError(ctx + ": empty region");
        if (!p.capacity.non_negative()) throw ParseError(ctx + ": negative capacity");
        for (const auto& c : p.capabilities) {
            if (!vocabulary.contains(c)) throw ParseError(ctx + ": unknown capability '" + c + "'");
        }
    }
    std::set<std::string> link_ids;
    for (const auto& l : map.wan_links) {
        const std::string ctx = "wan link '" + l.id + "'";
        if (!link_ids.insert(l.id).second) throw ParseError(ctx + ": duplicate id");
        if (!ids.contains(l.endpoint_a) || !ids.contains(l.endpoint_b)) {
            throw DanglingRef(ctx + ": endpoint is not a known PoP");
        }
        if (l.endpoint_a == l.endpoint_b) throw ParseError(ctx + ": endpoints must differ");
        if (l.capacity_mbps < 0) throw ParseError(ctx + ": negative capacity");
        if (l.reliability_class < 1 || l.reliability_class > 3) {
            throw ParseError(ctx + ": reliability_class must be in 1..3");
        }
    }
    if (!(map.overbooking_factor >= 1.0)) throw ParseError("overbooking_factor must be >= 1");
}

InfrastructureMap infra_from_json(const json& j, const CapabilitySet& vocabulary) {
    InfrastructureMap map;
    for (const auto& pj : field<json>(j, "pops", "infra")) {
        const std::string id = field<std::string>(pj, "id", "pop");
        const std::string ctx = "pop '" + id + "'";
        PoP p;
        p.id = id;
        p.region = field<std::string>(pj, "region", ctx);
        for (const auto& c : field_or<std::vector<std::string>>(pj, "capabilities", {}, ctx)) {
            p.capabilities.insert(c);
        }
        p.capacity = resource_vector_from_json(field<json>(pj, "capacity", ctx), ctx);
        p.owner_domain = field_or<std::string>(pj, "owner_domain", "", ctx);
        map.pops.push_back(std::move(p));
    }
    for (const auto& lj : field_or<json>(j, "wan_links", json::array(), "infra")) {
        const std::string id = field<std::string>(lj, "id", "wan link");
        const std::string ctx = "wan link '" + id + "'";
        map.wan_links.push_back({id, field<std::string>(lj, "endpoint_a", ctx),
                                 field<std::string>(lj, "endpoint_b", ctx),
                                 field<std::int64_t>(lj, "capacity_mbps", ctx),
                                 field_or<int>(lj, "reliability_class", 1, ctx)});
    }
    map.overbooking_factor =
        field_or<double>(j, "overbooking_factor", kDefaultOverbookingFactor, "infra");
    validate(map, vocabulary);
    return map;
}

InfrastructureMap load_infra(const std::string& path, const CapabilitySet& vocabulary) {
    return infra_from_json(read_json_file(path), vocabulary);
}

json to_json(const InfrastructureMap& map) {
    json pops = json::array();
    for (const auto& p : map.pops) {
        pops.push_back({{"id", p.id},
                        {"region", p.region},
                        {"capabilities", p.capabilities},
                        {"capacity", to_json(p.capacity)},
                        {"owner_domain", p.owner_domain}});
    }
    json links = json::array();
    for (const auto& l : map.wan_links) {
        links.push_back({{"id", l.id},
                         {"endpoint_a", l.endpoint_a},
                         {"endpoint_b", l.endpoint_b},
                         {"capacity_mbps", l.capacity_mbps},
                         {"reliability_class", l.reliability_class}});
    }
    return json{{"pops", pops}, {"wan_links", links}, {"overbooking_factor", map.overbooking_factor}};
}

std::string to_string(ReservationMode m) { return m == ReservationMode::Hard ? "HARD" : "SOFT"; }

ReservationMode reservation_mode_from_string(const std::string& s) {
    if (s == "HARD") return ReservationMode::Hard;
    if (s == "SOFT") return ReservationMode::Soft;
    throw ParseError("unknown reservation mode '" + s + "'");
}

json to_json(const Reservation& r) {
    json j{{"id", r.id},
           {"order_id", r.order_id},
           {"window", to_json(r.window)},
           {"mode", to_string(r.mode)}};
    if (r.target == ReservationTarget::Pop) {
        j["pop_id"] = r.resource_id;
        j["amount"] = to_json(r.amount);
    } else {
        j["wan_link_id"] = r.resource_id;
        j["bitrate_mbps"] = r.bitrate_mbps;
    }
    return j;
}

Reservation reservation_from_json(const json& j) {
    Reservation r;
    r.id = field<std::string>(j, "id", "reservation");
    const std::string ctx = "reservation '" + r.id + "'";
    r.order_id = field<std::string>(j, "order_id", ctx);
    r.window = window_from_json(field<json>(j, "window", ctx), ctx);
    r.mode = reservation_mode_from_string(field<std::string>(j, "mode", ctx));
    if (j.contains("pop_id")) {
        r.target = ReservationTarget::Pop;
        r.resource_id = field<std::string>(j, "pop_id", ctx);
        r.amount = resource_vector_from_json(field<json>(j, "amount", ctx), ctx);
    } else {
        r.target = ReservationTarget::WanLink;
        r.resource_id = field<std::string>(j, "wan_link_id", ctx);
        r.bitrate_mbps = field<std::int64_t>(j, "bitrate_mbps", ctx);
    }
    return r;
}

}  // namespace nsl
