#include "nsl/orchestrator.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace nsl {

namespace {

const std::map<Stage, std::string>& stage_names() {
    static const std::map<Stage, std::string> names{
        {Stage::Ordered, "ORDERED"},     {Stage::Designed, "DESIGNED"},   {Stage::Admitted, "ADMITTED"},
        {Stage::Rejected, "REJECTED"},   {Stage::Reserved, "RESERVED"},   {Stage::Prepared, "PREPARED"},
        {Stage::Active, "ACTIVE"},       {Stage::Simulated, "SIMULATED"}, {Stage::Scaled, "SCALED"},
        {Stage::Degraded, "DEGRADED"},   {Stage::Terminated, "TERMINATED"}};
    return names;
}

std::string format_order_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ord-%06llu", static_cast<unsigned long long>(n));
    return buf;
}

json reservations_json(const std::vector<Reservation>& rs) {
    json out = json::array();
    for (const auto& r : rs) out.push_back(to_json(r));
    return out;
}

std::vector<Reservation> reservations_from(const json& j) {
    std::vector<Reservation> out;
    for (const auto& r : j) out.push_back(reservation_from_json(r));
    return out;
}

json runtime_state_json(const SliceRuntime& rt) {
    json history = json::array();
    for (const auto& h : rt.history) history.push_back(to_json(h));
    json instances = json::array();
    for (const auto& i : rt.instances) {
        instances.push_back({{"vnf_key", i.vnf_key},
                             {"index", i.index},
                             {"vnf_id", i.vnf_id},
                             {"pop_id", i.pop_id},
                             {"resource_level", i.resource_level}});
    }
    return {{"current_il", rt.current_il}, {"next_hour", rt.next_hour},   {"sustained_hours", rt.sustained_hours},
            {"history", history},          {"last_load", rt.last_load},   {"instances", instances}};
}

void apply_runtime_state(SliceRuntime& rt, const json& j) {
    rt.current_il = field<std::string>(j, "current_il", "runtime");
    rt.next_hour = field<std::int64_t>(j, "next_hour", "runtime");
    rt.sustained_hours = field<std::map<std::string, int>>(j, "sustained_hours", "runtime");
    rt.history.clear();
    for (const auto& h : field<json>(j, "history", "runtime")) rt.history.push_back(hour_record_from_json(h));
    rt.last_load = field<double>(j, "last_load", "runtime");
    rt.instances.clear();
    for (const auto& i : field<json>(j, "instances", "runtime")) {
        rt.instances.push_back({field<std::string>(i, "vnf_key", "instance"), field<int>(i, "index", "instance"),
                                field<std::string>(i, "vnf_id", "instance"),
                                field<std::string>(i, "pop_id", "instance"),
                                field<std::string>(i, "resource_level", "instance")});
    }
    for (auto& m : rt.mgmt_plane.vnfms) {
        int n = 0;
        for (const auto& i : rt.instances) n += i.vnf_id == m->vnf_id() ? 1 : 0;
        m->set_instances(n);
    }
}

}  // namespace

std::string to_string(Stage s) { return stage_names().at(s); }

Stage stage_from_string(const std::string& s) {
    for (const auto& [k, v] : stage_names()) {
        if (v == s) return k;
    }
    throw ParseError("unknown pipeline stage '" + s + "'");
}

json to_json(const PipelineEvent& e) {
    return {{"seq", e.seq}, {"order_id", e.order_id}, {"stage", to_string(e.stage)}, {"payload", e.payload},
            {"at", e.at}};
}

PipelineEvent event_from_json(const json& j) {
    PipelineEvent e;
    e.seq = field<std::uint64_t>(j, "seq", "event");
    e.order_id = field<std::string>(j, "order_id", "event");
    e.stage = stage_from_string(field<std::string>(j, "stage", "event"));
    e.payload = field<json>(j, "payload", "event");
    e.at = field<std::int64_t>(j, "at", "event");
    return e;
}

// --- event log ----------------------------------------------------------------

EventLog::EventLog(std::string path) : path_(std::move(path)) {}

void EventLog::append(const PipelineEvent& e) {
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw ParseError("cannot append to event log '" + path_ + "'");
        out << to_json(e).dump() << '\n';
        out.flush();
    }
    events_.push_back(e);
}

std::vector<PipelineEvent> EventLog::read(const std::string& path) {
    std::vector<PipelineEvent> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        out.push_back(event_from_json(parse_json_text(line, path + ":" + std::to_string(n))));
    }
    return out;
}

// --- configuration --------------------------------------------------------------

OrchestratorConfig config_from_json(const json& j, const std::string& base_dir) {
    const std::string ctx = "config";
    OrchestratorConfig c;
    if (j.contains("overbooking_factor")) c.overbooking_factor = field<double>(j, "overbooking_factor", ctx);
    c.lifecycle.hysteresis = field_or<double>(j, "hysteresis", c.lifecycle.hysteresis, ctx);
    c.lifecycle.sustain_minutes = field_or<std::int64_t>(j, "sustain_minutes", c.lifecycle.sustain_minutes, ctx);
    if (c.lifecycle.hysteresis < 0.0 || c.lifecycle.hysteresis >= 1.0) {
        throw ParseError("config: hysteresis must be in [0, 1)");
    }
    c.lifecycle.mode = reservation_mode_from_string(field_or<std::string>(j, "reservation_mode", "HARD", ctx));
    if (j.contains("priority")) {
        const json pj = j.at("priority");
        c.lifecycle.priority.fallback = field_or<int>(pj, "default", 5, "config.priority");
        c.lifecycle.priority.by_template =
            field_or<std::map<std::string, int>>(pj, "by_template", {}, "config.priority");
        for (const auto& [t, p] : c.lifecycle.priority.by_template) {
            if (p < 0 || p > 9) throw ParseError("config.priority: '" + t + "' outside 0..9");
        }
    }
    if (j.contains("objective")) c.objective = objective_from_json(j.at("objective"));
    if (j.contains("traffic_profile")) {
        std::filesystem::path p = field<std::string>(j, "traffic_profile", ctx);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        c.profile = load_profile_csv(p.string());
    }
    c.snapshot_every = field_or<std::size_t>(j, "snapshot_every", c.snapshot_every, ctx);
    c.port = field_or<int>(j, "port", c.port, ctx);
    c.retries_on_race = field_or<int>(j, "retries_on_race", c.retries_on_race, ctx);
    return c;
}

OrchestratorConfig load_config(const std::string& path) {
    return config_from_json(read_json_file(path), std::filesystem::path(path).parent_path().string());
}

Clock system_clock_minutes() {
    return [] {
        using namespace std::chrono;
        return duration_cast<minutes>(system_clock::now().time_since_epoch()).count();
    };
}

Clock stepping_clock(std::int64_t start) {
    auto t = std::make_shared<std::int64_t>(start);
    return [t] { return (*t)++; };
}

json to_json(const ProcessOutcome& o) {
    json j{{"order", to_json(o.order)}, {"verdict", to_json(o.verdict)}};
    if (o.design) {
        json levels = json::array();
        for (const auto& il : o.design->il_set()) {
            levels.push_back({{"id", il.id},
                              {"served_load", o.design->served_load(il.id)},
                              {"capacity", to_json(o.design->il_capacity.at(il.id))},
                              {"cost", to_json(o.design->il_cost.at(il.id))}});
        }
        j["design"] = {{"target_il", o.design->target_il.id}, {"levels", levels}};
    }
    if (o.placement) j["placement"] = to_json(*o.placement);
    j["reservations"] = reservations_json(o.reservations);
    return j;
}

// --- orchestrator ---------------------------------------------------------------

namespace {

InfrastructureMap configured(InfrastructureMap map, const OrchestratorConfig& cfg) {
    if (cfg.overbooking_factor) map.overbooking_factor = *cfg.overbooking_factor;
    return map;
}

}  // namespace

Orchestrator::Orchestrator(Catalog catalog, InfrastructureMap infra, OrchestratorConfig cfg, Clock clock,
                           std::shared_ptr<EventLog> log, std::string snapshot_path)
    : catalog_(std::move(catalog)),
      initial_(configured(std::move(infra), cfg)),
      cfg_(std::move(cfg)),
      clock_(std::move(clock)),
      log_(std::move(log)),
      snapshot_path_(std::move(snapshot_path)),
      ledger_(initial_) {
    nsl::validate(initial_);
}

void Orchestrator::emit(const std::string& order_id, Stage stage, json payload) {
    PipelineEvent e{seq_ + 1, order_id, stage, std::move(payload), clock_()};
    if (log_) log_->append(e);
    apply_locked(e);
    maybe_snapshot();
}

void Orchestrator::maybe_snapshot() {
    if (snapshot_path_.empty() || cfg_.snapshot_every == 0 || seq_ % cfg_.snapshot_every != 0) return;
    const std::string tmp = snapshot_path_ + ".tmp";
    write_text_file(tmp, snapshot().dump() + "\n");
    std::filesystem::rename(tmp, snapshot_path_);
}

void Orchestrator::apply(const PipelineEvent& e) {
    std::lock_guard lock(state_mu_);
    apply_locked(e);
}

SliceRuntime Orchestrator::rebuild_runtime(const ServiceOrder& order, const json& payload) const {
    ServiceOrder copy = order;
    copy.status = OrderStatus::Reserved;
    const NslDesign& design = designs_.at(order.id);
    const AdmissionRequest req = build_request(catalog_, copy, design, abstract_view(initial_));
    LifecycleConfig lc = cfg_.lifecycle;
    lc.mode = reservation_mode_from_string(field<std::string>(payload, "mode", "prepared"));
    SliceRuntime rt = prepare(catalog_, copy, design, req, placements_.at(order.id), lc);
    rt.descriptor = descriptor_from_json(field<json>(payload, "descriptor", "prepared"));
    rt.priority = field<int>(payload, "priority", "prepared");
    return rt;
}

void Orchestrator::apply_locked(const PipelineEvent& e) {
    if (e.seq != seq_ + 1) {
        throw ParseError("event " + std::to_string(e.seq) + " out of sequence after " + std::to_string(seq_));
    }
    const json& p = e.payload;
    auto with_order = [&](auto&& fn) { return orders_.mutate(e.order_id, fn); };
    switch (e.stage) {
        case Stage::Ordered: {
            ServiceOrder o = order_from_json(field<json>(p, "order", "ORDERED"));
            unsigned long long n = 0;
            if (std::sscanf(o.id.c_str(), "ord-%llu", &n) == 1 && n > orders_.sequence()) orders_.set_sequence(n);
            orders_.insert(std::move(o));
            break;
        }
        case Stage::Designed:
            designs_[e.order_id] = design_from_json(field<json>(p, "design", "DESIGNED"));
            with_order([](ServiceOrder& o) { o.transition(OrderStatus::Designed); });
            break;
        case Stage::Rejected:
            with_order([&](ServiceOrder& o) {
                o.reject(field<std::string>(p, "cause", "REJECTED"), field<std::string>(p, "detail", "REJECTED"));
            });
            break;
        case Stage::Admitted:
            witnesses_[e.order_id] = solution_from_json(field<json>(p, "solution", "ADMITTED"));
            slas_[e.order_id] = sla_from_json(field<json>(p, "sla", "ADMITTED"));
            with_order([](ServiceOrder& o) { o.transition(OrderStatus::Admitted); });
            break;
        case Stage::Reserved:
            placements_[e.order_id] = solution_from_json(field<json>(p, "placement", "RESERVED"));
            ledger_.install(e.order_id, reservations_from(field<json>(p, "reservations", "RESERVED")));
            with_order([](ServiceOrder& o) { o.transition(OrderStatus::Reserved); });
            break;
        case Stage::Prepared: {
            const ServiceOrder o = order(e.order_id);
            slices_[e.order_id].runtime = rebuild_runtime(o, p);
            with_order([](ServiceOrder& ord) { ord.transition(OrderStatus::Prepared); });
            break;
        }
        case Stage::Active: {
            SliceRuntime& rt = slice(e.order_id).runtime;
            with_order([&](ServiceOrder& o) {
                nsl::activate(rt, o, catalog_, field<std::int64_t>(p, "at_minute", "ACTIVE"));
            });
            break;
        }
        case Stage::Simulated: {
            SliceRuntime& rt = slice(e.order_id).runtime;
            apply_runtime_state(rt, field<json>(p, "runtime", "SIMULATED"));
            ledger_.install(e.order_id, reservations_from(field<json>(p, "reservations", "SIMULATED")));
            break;
        }
        case Stage::Scaled:
        case Stage::Degraded:
            break;  // informational; the SIMULATED record carries the state
        case Stage::Terminated: {
            SliceRuntime& rt = slice(e.order_id).runtime;
            with_order([&](ServiceOrder& o) { nsl::terminate(rt, o, ledger_); });
            break;
        }
    }
    seq_ = e.seq;
    events_.push_back(e);
}

Orchestrator::Slice& Orchestrator::slice(const std::string& id) {
    auto it = slices_.find(id);
    if (it == slices_.end()) throw UnknownOrder("no slice '" + id + "'");
    return it->second;
}

const Orchestrator::Slice& Orchestrator::slice(const std::string& id) const {
    auto it = slices_.find(id);
    if (it == slices_.end()) throw UnknownOrder("no slice '" + id + "'");
    return it->second;
}

ServiceOrder Orchestrator::submit(const std::string& tenant, const std::string& template_id,
                                  const Overrides& overrides, std::optional<std::string> parent_order_id) {
    std::lock_guard lock(state_mu_);
    if (parent_order_id && !orders_.get(*parent_order_id)) {
        throw UnknownOrder("unknown parent order '" + *parent_order_id + "'");
    }
    ServiceOrder o =
        submit_order(catalog_, tenant, template_id, overrides, format_order_id(orders_.sequence() + 1), clock_());
    o.parent_order_id = std::move(parent_order_id);
    emit(o.id, Stage::Ordered, {{"order", to_json(o)}});
    return order(o.id);
}

ServiceOrder Orchestrator::order(const std::string& id) const {
    auto o = orders_.get(id);
    if (!o) throw UnknownOrder("unknown order '" + id + "'");
    return *o;
}

std::vector<ServiceOrder> Orchestrator::orders() const { return orders_.all(); }

std::optional<NslDesign> Orchestrator::design(const std::string& order_id) const {
    std::lock_guard lock(state_mu_);
    auto it = designs_.find(order_id);
    if (it == designs_.end()) return std::nullopt;
    return it->second;
}

ProcessOutcome Orchestrator::process(const std::string& order_id) {
    {
        std::lock_guard lock(state_mu_);
        const ServiceOrder o = order(order_id);
        if (o.status != OrderStatus::Submitted) {
            throw IllegalTransition("order " + order_id + " is " + to_string(o.status) + ", not SUBMITTED");
        }
        if (!in_flight_.insert(order_id).second) throw IllegalTransition("order " + order_id + " is being processed");
    }
    struct Release {
        Orchestrator* self;
        std::string id;
        ~Release() {
            std::lock_guard lock(self->state_mu_);
            self->in_flight_.erase(id);
        }
    } release{this, order_id};

    ProcessOutcome out;
    auto finish = [&]() {
        out.order = order(order_id);
        return out;
    };
    auto reject = [&](const std::string& cause, const std::string& detail) {
        std::lock_guard lock(state_mu_);
        emit(order_id, Stage::Rejected, {{"cause", cause}, {"detail", detail}});
        out.verdict.admitted = false;
        out.verdict.cause = cause;
        out.verdict.detail = detail;
    };

    // B: resource description.
    ServiceOrder work = order(order_id);
    NslDesign design;
    try {
        design = build_design(catalog_, work, cfg_.profile);
    } catch (const Error& e) {
        if (work.status != OrderStatus::Rejected) throw;
        reject(work.rejection_cause, work.rejection_detail);
        return finish();
    }
    {
        std::lock_guard lock(state_mu_);
        emit(order_id, Stage::Designed, {{"design", to_json(design)}});
    }
    out.design = design;

    // C and D: admission, optimization, reservation; retried when a commit
    // loses a race for capacity.
    AdmissionRequest request;
    bool reserved = false;
    for (int attempt = 0; attempt <= cfg_.retries_on_race && !reserved; ++attempt) {
        const InfrastructureMap snap = ledger_.snapshot();
        AdmissionVerdict verdict = evaluate_admission(catalog_, order(order_id), design, snap);
        if (!verdict.admitted) {
            reject(verdict.cause, verdict.detail);
            out.verdict = verdict;
            return finish();
        }
        {
            std::lock_guard lock(state_mu_);
            emit(order_id, Stage::Admitted, {{"solution", to_json(*verdict.solution)}, {"sla", to_json(*verdict.sla)}});
        }
        const FeasibleSolution placement = optimize(snap, *verdict.request, cfg_.objective);
        std::lock_guard lock(state_mu_);
        try {
            auto booked = ledger_.commit(build_reservations(order_id, *verdict.request, placement, cfg_.lifecycle.mode));
            emit(order_id, Stage::Reserved,
                 {{"placement", to_json(placement)}, {"reservations", reservations_json(booked)}});
            out.reservations = std::move(booked);
            out.placement = placement;
            request = *verdict.request;
            reserved = true;
        } catch (const CapacityRaced& e) {
            emit(order_id, Stage::Designed, {{"design", to_json(design)}, {"raced", e.what()}});
        }
        out.verdict = std::move(verdict);
    }
    if (!reserved) {
        reject("CAPACITY", "capacity taken by concurrent orders");
        out.verdict.admitted = false;
        return finish();
    }

    // E: preparation.
    {
        std::lock_guard lock(state_mu_);
        ServiceOrder copy = order(order_id);
        SliceRuntime rt = prepare(catalog_, copy, design, request, *out.placement, cfg_.lifecycle);
        emit(order_id, Stage::Prepared,
             {{"descriptor", to_json(rt.descriptor)}, {"priority", rt.priority}, {"mode", to_string(rt.mode)}});
    }
    return finish();
}

ProcessOutcome Orchestrator::validate(const std::string& order_id) const {
    ServiceOrder copy = order(order_id);
    ProcessOutcome out;
    std::optional<NslDesign> design;
    if (copy.status == OrderStatus::Submitted) {
        try {
            design = build_design(catalog_, copy.id, effective_requirements(catalog_, copy), cfg_.profile);
        } catch (const Error& e) {
            const std::string cause = design_rejection_cause(e.code());
            if (cause.empty()) throw;
            out.order = order(order_id);
            out.verdict.cause = cause;
            out.verdict.detail = e.what();
            return out;
        }
    } else if (copy.status == OrderStatus::Designed || copy.status == OrderStatus::Rejected) {
        design = this->design(order_id);
    }
    if (!design) {
        throw IllegalTransition("order " + order_id + " is " + to_string(copy.status) + "; nothing to validate");
    }
    copy.status = OrderStatus::Designed;
    out.design = design;
    out.verdict = evaluate_admission(catalog_, copy, *design, ledger_.snapshot());
    out.order = order(order_id);
    return out;
}

void Orchestrator::activate(const std::string& slice_id, std::optional<std::int64_t> at_minute) {
    std::lock_guard lock(state_mu_);
    const ServiceOrder o = order(slice_id);
    if (o.status != OrderStatus::Prepared) {
        throw IllegalTransition("order " + slice_id + " is " + to_string(o.status) + ", not PREPARED");
    }
    const std::int64_t at = at_minute ? *at_minute : clock_();
    const auto& windows = slice(slice_id).runtime.request.windows;
    if (std::none_of(windows.begin(), windows.end(), [&](const TimeWindow& w) { return w.contains(at); })) {
        throw OutsideActiveWindow("minute " + std::to_string(at) + " is outside every active window");
    }
    emit(slice_id, Stage::Active, {{"at_minute", at}});
}

std::vector<ScalingEvent> Orchestrator::feed_trace(const std::string& slice_id, const std::vector<double>& loads) {
    std::lock_guard lock(state_mu_);
    const ServiceOrder o = order(slice_id);
    if (o.status != OrderStatus::Active) {
        throw IllegalTransition("order " + slice_id + " is " + to_string(o.status) + ", not ACTIVE");
    }
    SliceRuntime& rt = slice(slice_id).runtime;
    auto events = step_simulation(rt, catalog_, ledger_, loads);
    json ev = json::array();
    for (const auto& e : events) ev.push_back(to_json(e));
    emit(slice_id, Stage::Simulated,
         {{"loads", loads},
          {"events", ev},
          {"runtime", runtime_state_json(rt)},
          {"reservations", reservations_json(ledger_.reservations_of(slice_id))}});
    for (const auto& e : events) {
        if (e.kind == ScalingEventKind::Scaled) emit(slice_id, Stage::Scaled, to_json(e));
        if (e.kind == ScalingEventKind::Degraded) emit(slice_id, Stage::Degraded, to_json(e));
    }
    return events;
}

void Orchestrator::terminate(const std::string& slice_id) {
    std::lock_guard lock(state_mu_);
    const ServiceOrder o = order(slice_id);
    if (o.status == OrderStatus::Terminated) return;
    if (o.status != OrderStatus::Active && o.status != OrderStatus::Prepared) {
        throw IllegalTransition("order " + slice_id + " is " + to_string(o.status) + ", not ACTIVE or PREPARED");
    }
    emit(slice_id, Stage::Terminated, json::object());
}

std::optional<NslDescriptor> Orchestrator::descriptor(const std::string& slice_id) const {
    std::lock_guard lock(state_mu_);
    auto it = slices_.find(slice_id);
    if (it == slices_.end()) return std::nullopt;
    return it->second.runtime.descriptor;
}

std::map<std::string, double> Orchestrator::visible_metrics(const std::string& slice_id) const {
    std::lock_guard lock(state_mu_);
    const SliceRuntime& rt = slice(slice_id).runtime;
    if (!rt.mgmt_plane.live()) throw IllegalTransition("slice " + slice_id + " has no management plane");
    return rt.mgmt_plane.nsl_manager->visible(rt.metrics());
}

double Orchestrator::query_metric(const std::string& slice_id, const std::string& metric) const {
    std::lock_guard lock(state_mu_);
    const SliceRuntime& rt = slice(slice_id).runtime;
    if (!rt.mgmt_plane.live()) throw IllegalTransition("slice " + slice_id + " has no management plane");
    return rt.mgmt_plane.nsl_manager->query(metric, rt.metrics());
}

std::vector<HourRecord> Orchestrator::history(const std::string& slice_id) const {
    std::lock_guard lock(state_mu_);
    return slice(slice_id).runtime.history;
}

std::vector<PipelineEvent> Orchestrator::events_of(const std::string& order_id) const {
    std::lock_guard lock(state_mu_);
    std::vector<PipelineEvent> out;
    for (const auto& e : events_) {
        if (e.order_id == order_id) out.push_back(e);
    }
    return out;
}

std::vector<PipelineEvent> Orchestrator::events() const {
    std::lock_guard lock(state_mu_);
    return events_;
}

json Orchestrator::snapshot() const {
    std::lock_guard lock(state_mu_);
    json orders = json::array();
    for (const auto& o : orders_.all()) orders.push_back(to_json(o));
    auto keyed = [](const auto& m) {
        json j = json::object();
        for (const auto& [k, v] : m) j[k] = to_json(v);
        return j;
    };
    json slices = json::object();
    for (const auto& [id, s] : slices_) {
        slices[id] = {{"descriptor", to_json(s.runtime.descriptor)},
                      {"priority", s.runtime.priority},
                      {"mode", to_string(s.runtime.mode)},
                      {"runtime", runtime_state_json(s.runtime)},
                      {"management_plane", s.runtime.mgmt_plane.live()}};
    }
    const InfrastructureMap map = ledger_.snapshot();
    return {{"seq", seq_},
            {"order_sequence", orders_.sequence()},
            {"orders", orders},
            {"designs", keyed(designs_)},
            {"witnesses", keyed(witnesses_)},
            {"slas", keyed(slas_)},
            {"placements", keyed(placements_)},
            {"slices", slices},
            {"reservations", reservations_json(map.reservations)},
            {"reservations_issued", ledger_.issued()}};
}

void Orchestrator::restore(const json& snap) {
    std::lock_guard lock(state_mu_);
    const std::string ctx = "snapshot";
    for (const auto& oj : field<json>(snap, "orders", ctx)) orders_.insert(order_from_json(oj));
    orders_.set_sequence(field<std::uint64_t>(snap, "order_sequence", ctx));
    for (const auto& [k, v] : member_object(snap, "designs", ctx).items()) designs_[k] = design_from_json(v);
    for (const auto& [k, v] : member_object(snap, "witnesses", ctx).items()) witnesses_[k] = solution_from_json(v);
    for (const auto& [k, v] : member_object(snap, "slas", ctx).items()) slas_[k] = sla_from_json(v);
    for (const auto& [k, v] : member_object(snap, "placements", ctx).items()) placements_[k] = solution_from_json(v);
    for (const auto& [k, v] : member_object(snap, "slices", ctx).items()) {
        SliceRuntime rt = rebuild_runtime(order(k), v);
        apply_runtime_state(rt, field<json>(v, "runtime", ctx));
        if (!field<bool>(v, "management_plane", ctx)) rt.mgmt_plane.teardown();
        slices_[k].runtime = std::move(rt);
    }
    InfrastructureMap map = initial_;
    map.reservations = reservations_from(field<json>(snap, "reservations", ctx));
    ledger_.reset(std::move(map), field<std::uint64_t>(snap, "reservations_issued", ctx));
    seq_ = field<std::uint64_t>(snap, "seq", ctx);
}

void Orchestrator::resume(const std::optional<json>& snap, const std::vector<PipelineEvent>& events) {
    std::lock_guard lock(state_mu_);
    if (snap) restore(*snap);
    const std::uint64_t base = seq_;
    for (const auto& e : events) {
        if (e.seq <= base) {
            events_.push_back(e);
        } else {
            apply_locked(e);
        }
    }
}

std::unique_ptr<Orchestrator> Orchestrator::replay(const Catalog& catalog, const InfrastructureMap& infra,
                                                   const OrchestratorConfig& cfg,
                                                   const std::vector<PipelineEvent>& events) {
    auto o = std::make_unique<Orchestrator>(catalog, infra, cfg, stepping_clock(0));
    for (const auto& e : events) o->apply(e);
    return o;
}

std::unique_ptr<Orchestrator> open_data_dir(const std::string& dir, Clock clock) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw ParseError("data directory '" + dir + "' not found");
    Catalog cat = load_catalog((root / "catalog").string());
    InfrastructureMap infra = load_infra((root / "infra.json").string());
    OrchestratorConfig cfg =
        fs::exists(root / "config.json") ? load_config((root / "config.json").string()) : OrchestratorConfig{};
    const std::string log_path = (root / "events.ndjson").string();
    const std::string snap_path = (root / "snapshot.json").string();
    auto events = EventLog::read(log_path);
    std::optional<json> snap;
    if (fs::exists(snap_path)) snap = read_json_file(snap_path);
    auto o = std::make_unique<Orchestrator>(std::move(cat), std::move(infra), std::move(cfg), std::move(clock),
                                            std::make_shared<EventLog>(log_path), snap_path);
    o->resume(snap, events);
    return o;
}

}  // namespace nsl
