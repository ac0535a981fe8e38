#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "nsl/catalog.hpp"

namespace nsl {

enum class OrderStatus { Submitted, Designed, Admitted, Rejected, Reserved, Prepared, Active, Terminated };

std::string to_string(OrderStatus s);
OrderStatus order_status_from_string(const std::string& s);

// Declared successor relation of the order state machine.
bool is_legal_transition(OrderStatus from, OrderStatus to);
std::vector<OrderStatus> successors(OrderStatus from);
std::vector<OrderStatus> all_order_statuses();

using Overrides = std::map<std::string, json>;

struct ServiceOrder {
    std::string id;
    std::string tenant_id;
    std::string template_id;
    Overrides overrides;
    OrderStatus status = OrderStatus::Submitted;
    std::int64_t created_at = 0;
    std::optional<std::string> parent_order_id;
    std::string rejection_cause;
    std::string rejection_detail;

    // Throws IllegalTransition when `to` is not a declared successor.
    void transition(OrderStatus to);
    void reject(std::string cause, std::string detail);

    bool operator==(const ServiceOrder&) const = default;
};

// Enforces provider policy: every path must be customizable and every value
// within its allowed range. Throws ForbiddenAttribute / OutOfRange.
void validate_overrides(const ServiceTemplate& tmpl, const Overrides& overrides);

// Template defaults with `overrides` laid over them. Pure.
json overlay(const json& doc, const Overrides& overrides);
SliceRequirements effective_requirements(const ServiceTemplate& tmpl, const Overrides& overrides);
SliceRequirements effective_requirements(const Catalog& cat, const ServiceOrder& order);

// Validates and builds a SUBMITTED order. Throws UnknownTemplate,
// ForbiddenAttribute, OutOfRange.
ServiceOrder submit_order(const Catalog& cat, const std::string& tenant, const std::string& template_id,
                          const Overrides& overrides, std::string order_id, std::int64_t now);

json to_json(const ServiceOrder& o);
ServiceOrder order_from_json(const json& j);

// Thread-safe order store. Mutations of one order are serialized; distinct
// orders proceed concurrently.
class OrderBook {
public:
    OrderBook() = default;
    OrderBook(const OrderBook&) = delete;
    OrderBook& operator=(const OrderBook&) = delete;

    std::string next_id();
    void insert(ServiceOrder order);
    std::optional<ServiceOrder> get(const std::string& id) const;
    std::vector<ServiceOrder> all() const;

    // Runs `fn` on the stored order under its lock. Throws UnknownOrder.
    template <typename Fn>
    auto mutate(const std::string& id, Fn&& fn) {
        Entry& e = entry(id);
        std::lock_guard lock(e.mutex);
        return fn(e.order);
    }

    std::uint64_t sequence() const;
    void set_sequence(std::uint64_t seq);

private:
    struct Entry {
        std::mutex mutex;
        ServiceOrder order;
    };
    Entry& entry(const std::string& id);

    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::unique_ptr<Entry>> orders_;
    std::uint64_t seq_ = 0;
};

}  // namespace nsl
