#include "nsl/resources.hpp"

#include <map>
#include <sstream>

#include "nsl/errors.hpp"

namespace nsl {

std::string to_string(const ResourceVector& r) {
    std::ostringstream os;
    os << '(' << r.vcpu << ',' << r.mem_gb << ',' << r.storage_gb << ')';
    return os.str();
}

double served_fraction(const PerformanceVector& capacity, const PerformanceVector& required) {
    const double by_tp = capacity.throughput_mbps / required.throughput_mbps;
    const double by_sessions = static_cast<double>(capacity.max_sessions) /
                               static_cast<double>(required.max_sessions);
    return std::min(by_tp, by_sessions);
}

bool covers(const PerformanceVector& capacity, const PerformanceVector& required, double load) {
    return capacity.max_latency_ms <= required.max_latency_ms &&
           load <= served_fraction(capacity, required);
}

bool dominates(const PerformanceVector& a, const PerformanceVector& b) {
    return a.throughput_mbps >= b.throughput_mbps && a.max_sessions >= b.max_sessions &&
           a.max_latency_ms <= b.max_latency_ms;
}

bool TimeWindow::contains(std::int64_t minute) const {
    if (minute < start) return false;
    if (recurrence == Recurrence::Once) return minute < end;
    const std::int64_t offset = (minute - start) % kMinutesPerDay;
    return offset < end - start;
}

std::string to_string(Recurrence r) { return r == Recurrence::Once ? "ONCE" : "DAILY"; }

Recurrence recurrence_from_string(const std::string& s) {
    if (s == "ONCE") return Recurrence::Once;
    if (s == "DAILY") return Recurrence::Daily;
    throw ParseError("unknown recurrence '" + s + "'");
}

std::vector<Interval> occurrences(const TimeWindow& w, std::int64_t lo, std::int64_t hi) {
    std::vector<Interval> out;
    if (lo >= hi) return out;
    auto push_clipped = [&](std::int64_t b, std::int64_t e) {
        b = std::max(b, lo);
        e = std::min(e, hi);
        if (b < e) out.push_back({b, e});
    };
    if (w.recurrence == Recurrence::Once) {
        push_clipped(w.start, w.end);
        return out;
    }
    std::int64_t k = 0;
    if (lo > w.end) k = (lo - w.end) / kMinutesPerDay;
    for (; w.start + k * kMinutesPerDay < hi; ++k) {
        push_clipped(w.start + k * kMinutesPerDay, w.end + k * kMinutesPerDay);
    }
    return out;
}

Interval analysis_horizon(const TimeWindow& query, const std::vector<TimeWindow>& others) {
    // Past the last start, ONCE windows only end and DAILY ones repeat, so
    // the concurrent set at t contains the set at t + 1 day. Ends are
    // ignored: an open-ended window would otherwise unroll DAILY windows
    // forever. Two days keep a margin.
    std::int64_t settle = query.start;
    for (const auto& w : others) settle = std::max(settle, w.start);
    const std::int64_t periodic_end = settle + 2 * kMinutesPerDay;
    if (query.recurrence == Recurrence::Once) return {query.start, std::min(query.end, periodic_end)};
    return {query.start, periodic_end};
}

bool windows_overlap(const TimeWindow& a, const TimeWindow& b) {
    const Interval h = analysis_horizon(a, {b});
    const auto ao = occurrences(a, h.begin, h.end);
    const auto bo = occurrences(b, h.begin, h.end);
    for (const auto& x : ao) {
        for (const auto& y : bo) {
            if (x.begin < y.end && y.begin < x.end) return true;
        }
    }
    return false;
}

namespace {

ResourceVector peak_of(const ResourceVector& a, const ResourceVector& b) { return cwise_max(a, b); }
std::int64_t peak_of(std::int64_t a, std::int64_t b) { return std::max(a, b); }

}  // namespace

template <typename Amount>
Amount peak_concurrent(const TimeWindow& query, const std::vector<TimeWindow>& windows,
                       const std::vector<Amount>& amounts) {
    const Interval h = analysis_horizon(query, windows);
    // time -> (query coverage delta, amount delta)
    std::map<std::int64_t, std::pair<int, Amount>> deltas;
    for (const auto& iv : occurrences(query, h.begin, h.end)) {
        deltas[iv.begin].first += 1;
        deltas[iv.end].first -= 1;
    }
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (const auto& iv : occurrences(windows[i], h.begin, h.end)) {
            deltas[iv.begin].second += amounts[i];
            deltas[iv.end].second -= amounts[i];
        }
    }
    Amount peak{};
    Amount running{};
    int inside = 0;
    for (auto it = deltas.begin(); it != deltas.end(); ++it) {
        inside += it->second.first;
        running += it->second.second;
        auto next = std::next(it);
        if (inside > 0 && next != deltas.end() && next->first > it->first) {
            peak = peak_of(peak, running);
        }
    }
    return peak;
}

template ResourceVector peak_concurrent<ResourceVector>(const TimeWindow&,
                                                        const std::vector<TimeWindow>&,
                                                        const std::vector<ResourceVector>&);
template std::int64_t peak_concurrent<std::int64_t>(const TimeWindow&,
                                                    const std::vector<TimeWindow>&,
                                                    const std::vector<std::int64_t>&);

}  // namespace nsl
