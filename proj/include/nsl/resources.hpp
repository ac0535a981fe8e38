#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace nsl {

// Compute/memory/storage demand or capacity. Components are integral.
struct ResourceVector {
    std::int64_t vcpu = 0;
    std::int64_t mem_gb = 0;
    std::int64_t storage_gb = 0;

    friend constexpr ResourceVector operator+(ResourceVector a, const ResourceVector& b) {
        return {a.vcpu + b.vcpu, a.mem_gb + b.mem_gb, a.storage_gb + b.storage_gb};
    }
    friend constexpr ResourceVector operator-(ResourceVector a, const ResourceVector& b) {
        return {a.vcpu - b.vcpu, a.mem_gb - b.mem_gb, a.storage_gb - b.storage_gb};
    }
    friend constexpr ResourceVector operator*(ResourceVector a, std::int64_t k) {
        return {a.vcpu * k, a.mem_gb * k, a.storage_gb * k};
    }
    ResourceVector& operator+=(const ResourceVector& o) { return *this = *this + o; }
    ResourceVector& operator-=(const ResourceVector& o) { return *this = *this - o; }

    // Lexicographic vcpu -> mem -> storage; used as the resource-cost order.
    friend constexpr auto operator<=>(const ResourceVector&, const ResourceVector&) = default;

    constexpr bool non_negative() const { return vcpu >= 0 && mem_gb >= 0 && storage_gb >= 0; }
    constexpr bool any_positive() const { return vcpu > 0 || mem_gb > 0 || storage_gb > 0; }
    constexpr bool is_zero() const { return vcpu == 0 && mem_gb == 0 && storage_gb == 0; }

    // Componentwise a <= b.
    constexpr bool fits_within(const ResourceVector& cap) const {
        return vcpu <= cap.vcpu && mem_gb <= cap.mem_gb && storage_gb <= cap.storage_gb;
    }

    constexpr std::int64_t dot(const ResourceVector& w) const {
        return vcpu * w.vcpu + mem_gb * w.mem_gb + storage_gb * w.storage_gb;
    }
};

constexpr ResourceVector cwise_min(const ResourceVector& a, const ResourceVector& b) {
    return {std::min(a.vcpu, b.vcpu), std::min(a.mem_gb, b.mem_gb),
            std::min(a.storage_gb, b.storage_gb)};
}

constexpr ResourceVector cwise_max(const ResourceVector& a, const ResourceVector& b) {
    return {std::max(a.vcpu, b.vcpu), std::max(a.mem_gb, b.mem_gb),
            std::max(a.storage_gb, b.storage_gb)};
}

std::string to_string(const ResourceVector& r);

// Performance a deployment offers (capacity) or an order requires.
struct PerformanceVector {
    double throughput_mbps = 0.0;
    std::int64_t max_sessions = 0;
    double max_latency_ms = 0.0;

    friend bool operator==(const PerformanceVector&, const PerformanceVector&) = default;

    bool valid() const {
        return throughput_mbps > 0.0 && max_sessions > 0 && max_latency_ms > 0.0;
    }
};

// Largest fraction f of `required` volume (throughput, sessions) that
// `capacity` can carry. Latency is not a volume and does not enter.
double served_fraction(const PerformanceVector& capacity, const PerformanceVector& required);

// True when `capacity` carries `load` x the required volume and meets the
// latency bound. load == 1.0 is the full ordered performance.
bool covers(const PerformanceVector& capacity, const PerformanceVector& required,
            double load = 1.0);

// a >= b on volume, a <= b on latency.
bool dominates(const PerformanceVector& a, const PerformanceVector& b);

enum class Recurrence { Once, Daily };

inline constexpr std::int64_t kMinutesPerDay = 1440;

// [start, end) in epoch minutes. DAILY windows repeat every day from `start`
// onward.
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;
    Recurrence recurrence = Recurrence::Once;

    friend auto operator<=>(const TimeWindow&, const TimeWindow&) = default;

    bool well_formed() const {
        if (start >= end) return false;
        return recurrence == Recurrence::Once || end - start < kMinutesPerDay;
    }
    bool contains(std::int64_t minute) const;
};

std::string to_string(Recurrence r);
Recurrence recurrence_from_string(const std::string& s);

struct Interval {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    friend auto operator<=>(const Interval&, const Interval&) = default;
};

// Concrete occurrences of `w` clipped to [lo, hi).
std::vector<Interval> occurrences(const TimeWindow& w, std::int64_t lo, std::int64_t hi);

// Finite horizon [lo, hi) over which every instant of `query` is represented:
// past `hi` the concurrent set of `others` only repeats daily.
Interval analysis_horizon(const TimeWindow& query, const std::vector<TimeWindow>& others);

bool windows_overlap(const TimeWindow& a, const TimeWindow& b);

// Componentwise maximum, over instants inside `query`, of the sum of `amounts`
// whose windows are active at that instant.
template <typename Amount>
Amount peak_concurrent(const TimeWindow& query, const std::vector<TimeWindow>& windows,
                       const std::vector<Amount>& amounts);

}  // namespace nsl
