#include "nsl/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nsl {

namespace {

const std::vector<std::pair<OrderStatus, std::string>> kStatusNames{
    {OrderStatus::Submitted, "SUBMITTED"}, {OrderStatus::Designed, "DESIGNED"},
    {OrderStatus::Admitted, "ADMITTED"},   {OrderStatus::Rejected, "REJECTED"},
    {OrderStatus::Reserved, "RESERVED"},   {OrderStatus::Prepared, "PREPARED"},
    {OrderStatus::Active, "ACTIVE"},       {OrderStatus::Terminated, "TERMINATED"},
};

}  // namespace

std::string to_string(OrderStatus s) {
    for (const auto& [k, v] : kStatusNames) {
        if (k == s) return v;
    }
    return "?";
}

OrderStatus order_status_from_string(const std::string& s) {
    for (const auto& [k, v] : kStatusNames) {
        if (v == s) return k;
    }
    throw ParseError("unknown order status '" + s + "'");
}

std::vector<OrderStatus> all_order_statuses() {
    std::vector<OrderStatus> out;
    for (const auto& [k, _] : kStatusNames) out.push_back(k);
    return out;
}

std::vector<OrderStatus> successors(OrderStatus from) {
    using S = OrderStatus;
    switch (from) {
        case S::Submitted: return {S::Designed, S::Rejected};
        case S::Designed: return {S::Admitted, S::Rejected};
        // A reservation race sends the order back for re-admission.
        case S::Admitted: return {S::Reserved, S::Designed};
        case S::Reserved: return {S::Prepared};
        case S::Prepared: return {S::Active, S::Terminated};
        case S::Active: return {S::Terminated};
        case S::Rejected:
        case S::Terminated: return {};
    }
    return {};
}

bool is_legal_transition(OrderStatus from, OrderStatus to) {
    const auto next = successors(from);
    return std::find(next.begin(), next.end(), to) != next.end();
}

void ServiceOrder::transition(OrderStatus to) {
    if (!is_legal_transition(status, to)) {
        throw IllegalTransition("order '" + id + "': " + to_string(status) + " -> " + to_string(to) +
                                " is not allowed");
    }
    status = to;
}

void ServiceOrder::reject(std::string cause, std::string detail) {
    transition(OrderStatus::Rejected);
    rejection_cause = std::move(cause);
    rejection_detail = std::move(detail);
}

// --- overrides ----------------------------------------------------------------

namespace {

bool in_choices(const json& value, const std::vector<json>& choices) {
    return std::find(choices.begin(), choices.end(), value) != choices.end();
}

std::string show(const json& v) { return v.dump(); }

}  // namespace

void validate_overrides(const ServiceTemplate& tmpl, const Overrides& overrides) {
    const json doc = to_json(tmpl.defaults);
    for (const auto& [path, value] : overrides) {
        auto range_it = tmpl.customizable.find(path);
        if (range_it == tmpl.customizable.end()) {
            throw ForbiddenAttribute(path, "attribute '" + path + "' is not customizable in template '" +
                                               tmpl.id + "'");
        }
        const AllowedRange& range = range_it->second;
        const json* current = lookup_path(doc, path);
        const auto out_of_range = [&, p = path](const std::string& why) {
            return OutOfRange(p, "attribute '" + p + "' = " + show(value) + ": " + why);
        };
        if (range.min || range.max) {
            if (!value.is_number()) throw out_of_range("expected a number");
            if (current != nullptr && current->is_number_integer() && !value.is_number_integer()) {
                throw out_of_range("expected an integer");
            }
            const double v = value.get<double>();
            if ((range.min && v < *range.min) || (range.max && v > *range.max)) {
                std::string bounds = "[" + (range.min ? json(*range.min).dump() : "-inf") + ", " +
                                     (range.max ? json(*range.max).dump() : "inf") + "]";
                throw out_of_range("outside allowed range " + bounds);
            }
        }
        if (!range.choices.empty()) {
            // Choices are whole values; a list value may also pick items
            // from a list of scalar choices.
            if (value.is_array() && value.empty()) throw out_of_range("empty selection");
            if (!in_choices(value, range.choices)) {
                if (!value.is_array()) throw out_of_range("not among the offered choices");
                for (const auto& item : value) {
                    if (!in_choices(item, range.choices)) throw out_of_range("value " + show(item) + " not offered");
                }
            }
        }
        if (current != nullptr && current->is_array() != value.is_array()) {
            throw out_of_range("shape does not match the template attribute");
        }
    }
    try {
        requirements_from_json(overlay(doc, overrides), "order");
    } catch (const ParseError& e) {
        const std::string path = overrides.empty() ? std::string() : overrides.begin()->first;
        throw OutOfRange(path, e.what());
    }
}

json overlay(const json& doc, const Overrides& overrides) {
    json out = doc;
    for (const auto& [path, value] : overrides) assign_path(out, path, value);
    return out;
}

SliceRequirements effective_requirements(const ServiceTemplate& tmpl, const Overrides& overrides) {
    if (overrides.empty()) return tmpl.defaults;
    return requirements_from_json(overlay(to_json(tmpl.defaults), overrides), "order");
}

SliceRequirements effective_requirements(const Catalog& cat, const ServiceOrder& order) {
    const ServiceTemplate* tmpl = cat.find_template(order.template_id);
    if (tmpl == nullptr) throw UnknownTemplate("unknown template '" + order.template_id + "'");
    return effective_requirements(*tmpl, order.overrides);
}

ServiceOrder submit_order(const Catalog& cat, const std::string& tenant, const std::string& template_id,
                          const Overrides& overrides, std::string order_id, std::int64_t now) {
    const ServiceTemplate* tmpl = cat.find_template(template_id);
    if (tmpl == nullptr) throw UnknownTemplate("unknown template '" + template_id + "'");
    validate_overrides(*tmpl, overrides);
    ServiceOrder o;
    o.id = std::move(order_id);
    o.tenant_id = tenant;
    o.template_id = template_id;
    o.overrides = overrides;
    o.status = OrderStatus::Submitted;
    o.created_at = now;
    return o;
}

json to_json(const ServiceOrder& o) {
    json ov = json::object();
    for (const auto& [k, v] : o.overrides) ov[k] = v;
    json j{{"id", o.id},
           {"tenant_id", o.tenant_id},
           {"template_id", o.template_id},
           {"overrides", ov},
           {"status", to_string(o.status)},
           {"created_at", o.created_at},
           {"parent_order_id", o.parent_order_id ? json(*o.parent_order_id) : json(nullptr)},
           {"rejection_cause", o.rejection_cause},
           {"rejection_detail", o.rejection_detail}};
    return j;
}

ServiceOrder order_from_json(const json& j) {
    ServiceOrder o;
    o.id = field<std::string>(j, "id", "order");
    const std::string ctx = "order '" + o.id + "'";
    o.tenant_id = field<std::string>(j, "tenant_id", ctx);
    o.template_id = field<std::string>(j, "template_id", ctx);
    for (const auto& [k, v] : member_object_or_empty(j, "overrides", ctx).items()) o.overrides[k] = v;
    o.status = order_status_from_string(field<std::string>(j, "status", ctx));
    o.created_at = field<std::int64_t>(j, "created_at", ctx);
    if (j.contains("parent_order_id") && !j["parent_order_id"].is_null()) {
        o.parent_order_id = j["parent_order_id"].get<std::string>();
    }
    o.rejection_cause = field_or<std::string>(j, "rejection_cause", "", ctx);
    o.rejection_detail = field_or<std::string>(j, "rejection_detail", "", ctx);
    return o;
}

// --- OrderBook ------------------------------------------------------------------

std::string OrderBook::next_id() {
    std::unique_lock lock(map_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "ord-%06llu", static_cast<unsigned long long>(++seq_));
    return buf;
}

void OrderBook::insert(ServiceOrder order) {
    std::unique_lock lock(map_mutex_);
    auto e = std::make_unique<Entry>();
    e->order = std::move(order);
    const std::string id = e->order.id;
    orders_[id] = std::move(e);
}

std::optional<ServiceOrder> OrderBook::get(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = orders_.find(id);
    if (it == orders_.end()) return std::nullopt;
    std::lock_guard elock(it->second->mutex);
    return it->second->order;
}

std::vector<ServiceOrder> OrderBook::all() const {
    std::shared_lock lock(map_mutex_);
    std::vector<ServiceOrder> out;
    for (const auto& [_, e] : orders_) {
        std::lock_guard elock(e->mutex);
        out.push_back(e->order);
    }
    return out;
}

OrderBook::Entry& OrderBook::entry(const std::string& id) {
    std::shared_lock lock(map_mutex_);
    auto it = orders_.find(id);
    if (it == orders_.end()) throw UnknownOrder("unknown order '" + id + "'");
    return *it->second;
}

std::uint64_t OrderBook::sequence() const {
    std::shared_lock lock(map_mutex_);
    return seq_;
}

void OrderBook::set_sequence(std::uint64_t seq) {
    std::unique_lock lock(map_mutex_);
    seq_ = seq;
}

}  // namespace nsl
