#include "nsl/lifecycle.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

namespace nsl {

std::string to_string(Comparator c) {
    switch (c) {
        case Comparator::Gt: return ">";
        case Comparator::Ge: return ">=";
        case Comparator::Lt: return "<";
        case Comparator::Le: return "<=";
    }
    return ">";
}

Comparator comparator_from_string(const std::string& s) {
    if (s == ">") return Comparator::Gt;
    if (s == ">=") return Comparator::Ge;
    if (s == "<") return Comparator::Lt;
    if (s == "<=") return Comparator::Le;
    throw ParseError("unknown comparator '" + s + "'");
}

std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::ScaleTo: return "SCALE_TO";
        case ActionKind::Reconfigure: return "RECONFIGURE";
        case ActionKind::Alert: return "ALERT";
    }
    return "ALERT";
}

ActionKind action_kind_from_string(const std::string& s) {
    if (s == "SCALE_TO") return ActionKind::ScaleTo;
    if (s == "RECONFIGURE") return ActionKind::Reconfigure;
    if (s == "ALERT") return ActionKind::Alert;
    throw ParseError("unknown workflow action '" + s + "'");
}

bool Trigger::holds(double value) const {
    switch (comparator) {
        case Comparator::Gt: return value > threshold;
        case Comparator::Ge: return value >= threshold;
        case Comparator::Lt: return value < threshold;
        case Comparator::Le: return value <= threshold;
    }
    return false;
}

const NslInstantiationLevel* NslDescriptor::find_il(const std::string& id) const {
    for (const auto& il : il_set) {
        if (il.id == id) return &il;
    }
    return nullptr;
}

void validate(const NslDescriptor& d) {
    const std::string ctx = "descriptor '" + d.slice_id + "'";
    if (d.il_set.empty()) throw ParseError(ctx + ": empty level set");
    std::set<std::string> ids;
    for (const auto& il : d.il_set) {
        if (!ids.insert(il.id).second) throw ParseError(ctx + ": duplicate level '" + il.id + "'");
        if (!d.il_served_load.count(il.id)) throw ParseError(ctx + ": no served load for '" + il.id + "'");
    }
    std::set<std::string> primitives;
    for (const auto& [vnf, list] : d.config_primitives) {
        for (const auto& p : list) primitives.insert(p.primitive);
    }
    std::set<std::string> wf_ids;
    for (const auto& w : d.workflows) {
        if (!wf_ids.insert(w.id).second) throw ParseError(ctx + ": duplicate workflow '" + w.id + "'");
        if (w.trigger.sustain_minutes < 0) throw ParseError(ctx + ": negative sustain in '" + w.id + "'");
        if (!w.when_il.empty() && !ids.count(w.when_il)) {
            throw ParseError(ctx + ": workflow '" + w.id + "' armed at unknown level '" + w.when_il + "'");
        }
        if (w.action.kind == ActionKind::ScaleTo && !ids.count(w.action.target)) {
            throw ParseError(ctx + ": workflow '" + w.id + "' scales to unknown level '" + w.action.target + "'");
        }
        if (w.action.kind == ActionKind::Reconfigure && !primitives.count(w.action.target)) {
            throw ParseError(ctx + ": workflow '" + w.id + "' invokes undeclared primitive '" + w.action.target + "'");
        }
    }

    // Chaining rules: acyclic and weakly connected over the deployed VNFs.
    std::map<std::string, std::vector<std::string>> out;
    std::map<std::string, std::string> parent;
    std::function<std::string(const std::string&)> root = [&](const std::string& x) {
        return parent[x] == x ? x : parent[x] = root(parent[x]);
    };
    for (const auto& [vnf, list] : d.config_primitives) parent[vnf] = vnf;
    for (const auto& r : d.chaining_rules) {
        if (!parent.count(r.from_vnf) || !parent.count(r.to_vnf)) {
            throw ParseError(ctx + ": chaining rule names an undeployed VNF");
        }
        out[r.from_vnf].push_back(r.to_vnf);
        parent[root(r.from_vnf)] = root(r.to_vnf);
    }
    std::set<std::string> roots;
    for (const auto& [vnf, p] : parent) roots.insert(root(vnf));
    if (roots.size() > 1) throw ParseError(ctx + ": chaining rules do not connect every VNF");
    std::map<std::string, int> state;  // 1 on stack, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
        state[v] = 1;
        for (const auto& w : out[v]) {
            if (state[w] == 1) throw ParseError(ctx + ": chaining rules contain a cycle");
            if (state[w] == 0) visit(w);
        }
        state[v] = 2;
    };
    for (const auto& [vnf, p] : parent) {
        if (state[vnf] == 0) visit(vnf);
    }
}

// --- serialization ----------------------------------------------------------

json to_json(const NslDescriptor& d) {
    json workflows = json::array();
    for (const auto& w : d.workflows) {
        workflows.push_back({{"id", w.id},
                             {"trigger",
                              {{"metric", w.trigger.metric},
                               {"comparator", to_string(w.trigger.comparator)},
                               {"threshold", w.trigger.threshold},
                               {"sustain_minutes", w.trigger.sustain_minutes}}},
                             {"action", {{"kind", to_string(w.action.kind)}, {"target", w.action.target}}},
                             {"when_il", w.when_il}});
    }
    json levels = json::array();
    for (const auto& il : d.il_set) levels.push_back(to_json(il));
    json primitives = json::object();
    for (const auto& [vnf, list] : d.config_primitives) {
        json arr = json::array();
        for (const auto& p : list) arr.push_back({{"primitive", p.primitive}, {"params", p.params}});
        primitives[vnf] = arr;
    }
    json chaining = json::array();
    for (const auto& r : d.chaining_rules) {
        chaining.push_back({{"from_vnf", r.from_vnf}, {"to_vnf", r.to_vnf}, {"match", r.match}});
    }
    return {{"slice_id", d.slice_id},
            {"workflows", workflows},
            {"il_set", levels},
            {"il_served_load", d.il_served_load},
            {"config_primitives", primitives},
            {"chaining_rules", chaining},
            {"monitoring_spec",
             {{"metrics", d.monitoring_spec.metrics},
              {"reporting_period_s", d.monitoring_spec.reporting_period_s},
              {"alarms", d.monitoring_spec.alarms}}}};
}

NslDescriptor descriptor_from_json(const json& j) {
    const std::string ctx = "descriptor";
    NslDescriptor d;
    d.slice_id = field<std::string>(j, "slice_id", ctx);
    for (const auto& wj : field<json>(j, "workflows", ctx)) {
        PolicyWorkflow w;
        w.id = field<std::string>(wj, "id", "workflow");
        const json tj = field<json>(wj, "trigger", "workflow '" + w.id + "'");
        w.trigger.metric = field<std::string>(tj, "metric", "trigger");
        w.trigger.comparator = comparator_from_string(field<std::string>(tj, "comparator", "trigger"));
        w.trigger.threshold = field<double>(tj, "threshold", "trigger");
        w.trigger.sustain_minutes = field<std::int64_t>(tj, "sustain_minutes", "trigger");
        const json aj = field<json>(wj, "action", "workflow '" + w.id + "'");
        w.action.kind = action_kind_from_string(field<std::string>(aj, "kind", "action"));
        w.action.target = field<std::string>(aj, "target", "action");
        w.when_il = field_or<std::string>(wj, "when_il", "", "workflow");
        d.workflows.push_back(std::move(w));
    }
    for (const auto& lj : field<json>(j, "il_set", ctx)) d.il_set.push_back(nsl_il_from_json(lj));
    d.il_served_load = field<std::map<std::string, double>>(j, "il_served_load", ctx);
    for (const auto& [vnf, arr] : member_object(j, "config_primitives", ctx).items()) {
        auto& list = d.config_primitives[vnf];
        for (const auto& pj : arr) {
            list.push_back({field<std::string>(pj, "primitive", "primitive"),
                            field<std::vector<std::string>>(pj, "params", "primitive")});
        }
    }
    for (const auto& rj : field<json>(j, "chaining_rules", ctx)) {
        d.chaining_rules.push_back({field<std::string>(rj, "from_vnf", "chaining rule"),
                                    field<std::string>(rj, "to_vnf", "chaining rule"),
                                    field<std::string>(rj, "match", "chaining rule")});
    }
    const json mj = field<json>(j, "monitoring_spec", ctx);
    d.monitoring_spec.metrics = field<std::set<std::string>>(mj, "metrics", "monitoring_spec");
    d.monitoring_spec.reporting_period_s = field<std::int64_t>(mj, "reporting_period_s", "monitoring_spec");
    d.monitoring_spec.alarms = field<std::set<std::string>>(mj, "alarms", "monitoring_spec");
    validate(d);
    return d;
}

std::string serialize(const NslDescriptor& d) { return to_json(d).dump(2) + "\n"; }

NslDescriptor parse_descriptor(const std::string& text) { return descriptor_from_json(parse_json_text(text, "descriptor")); }

std::vector<PolicyWorkflow> scale_workflows(const std::vector<NslInstantiationLevel>& il_set,
                                            const std::map<std::string, double>& served_load, double hysteresis) {
    std::vector<PolicyWorkflow> out;
    for (std::size_t k = 0; k + 1 < il_set.size(); ++k) {
        const double f = served_load.at(il_set[k].id);
        PolicyWorkflow up;
        up.id = "scale-up-" + std::to_string(k + 1);
        up.trigger = {kOfferedLoadMetric, Comparator::Gt, f, 0};
        up.action = {ActionKind::ScaleTo, il_set[k + 1].id};
        up.when_il = il_set[k].id;
        out.push_back(up);
    }
    for (std::size_t k = 0; k + 1 < il_set.size(); ++k) {
        const double f = served_load.at(il_set[k].id);
        PolicyWorkflow down;
        down.id = "scale-down-" + std::to_string(k + 1);
        down.trigger = {kOfferedLoadMetric, Comparator::Lt, f * (1.0 - hysteresis), 0};
        down.action = {ActionKind::ScaleTo, il_set[k].id};
        down.when_il = il_set[k + 1].id;
        out.push_back(down);
    }
    return out;
}

// --- stubs ------------------------------------------------------------------

const std::vector<std::string>& metric_namespace() {
    static const std::vector<std::string> names{"degraded_hours", "il_index",       "instance_count",
                                                "latency_ms",     "max_sessions",   "offered_load",
                                                "served_load",    "throughput_mbps"};
    return names;
}

double NslManager::query(const std::string& metric, const std::map<std::string, double>& values) const {
    if (!exposure_.visible_metrics.count(metric)) throw ExposureDenied("metric '" + metric + "' is not exposed");
    auto it = values.find(metric);
    if (it == values.end()) throw ExposureDenied("metric '" + metric + "' is not reported");
    return it->second;
}

void NslManager::authorize(const std::string& action) const {
    if (!exposure_.allowed_actions.count(action)) throw ExposureDenied("action '" + action + "' is not allowed");
}

std::map<std::string, double> NslManager::visible(const std::map<std::string, double>& values) const {
    std::map<std::string, double> out;
    for (const auto& [k, v] : values) {
        if (exposure_.visible_metrics.count(k)) out[k] = v;
    }
    return out;
}

void ManagementPlane::teardown() {
    if (ns_orchestrator) ns_orchestrator->teardown();
    nsl_manager.reset();
    ns_orchestrator.reset();
    vnfms.clear();
    tenant_sdn_controller.reset();
}

// --- runtime ----------------------------------------------------------------

std::string to_string(ScalingEventKind k) {
    switch (k) {
        case ScalingEventKind::Scaled: return "SCALED";
        case ScalingEventKind::Degraded: return "DEGRADED";
        case ScalingEventKind::Alert: return "ALERT";
        case ScalingEventKind::Reconfigured: return "RECONFIGURED";
    }
    return "SCALED";
}

ScalingEventKind scaling_event_kind_from_string(const std::string& s) {
    if (s == "SCALED") return ScalingEventKind::Scaled;
    if (s == "DEGRADED") return ScalingEventKind::Degraded;
    if (s == "ALERT") return ScalingEventKind::Alert;
    if (s == "RECONFIGURED") return ScalingEventKind::Reconfigured;
    throw ParseError("unknown scaling event '" + s + "'");
}

int PriorityPolicy::priority_for(const std::string& template_id) const {
    auto it = by_template.find(template_id);
    const int p = it == by_template.end() ? fallback : it->second;
    return std::clamp(p, 0, 9);
}

std::map<std::string, double> SliceRuntime::metrics() const {
    std::map<std::string, double> m;
    const auto levels = descriptor.il_set;
    std::size_t index = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k].id == current_il) index = k;
    }
    m["offered_load"] = last_load;
    m["il_index"] = static_cast<double>(index);
    m["instance_count"] = static_cast<double>(instances.size());
    m["degraded_hours"] = static_cast<double>(
        std::count_if(history.begin(), history.end(), [](const HourRecord& h) { return h.degraded; }));
    if (!current_il.empty() && design.il_capacity.count(current_il)) {
        const auto& cap = design.il_capacity.at(current_il);
        m["served_load"] = design.served_load(current_il);
        m["throughput_mbps"] = cap.throughput_mbps;
        m["max_sessions"] = static_cast<double>(cap.max_sessions);
        m["latency_ms"] = cap.max_latency_ms;
    }
    return m;
}

namespace {

// VNF keys of a deployment in deployment order, with their chaining rules.
std::vector<ChainingRule> chain_rules(const ResolvedDeployment& dep) {
    std::vector<ChainingRule> out;
    for (std::size_t i = 0; i + 1 < dep.vnfs.size(); ++i) {
        out.push_back({dep.vnfs[i].key, dep.vnfs[i + 1].key,
                       dep.vnfs[i].function_tag + ">" + dep.vnfs[i + 1].function_tag});
    }
    return out;
}

}  // namespace

SliceRuntime prepare(const Catalog& cat, ServiceOrder& order, const NslDesign& design, const AdmissionRequest& req,
                     const FeasibleSolution& sol, const LifecycleConfig& cfg) {
    if (order.status != OrderStatus::Reserved) {
        throw IllegalTransition("order " + order.id + " is " + to_string(order.status) + ", not RESERVED");
    }
    const SliceRequirements reqs = effective_requirements(cat, order);

    SliceRuntime rt;
    rt.slice_id = order.id;
    rt.priority = cfg.priority.priority_for(order.template_id);
    rt.exposure = reqs.operational_reqs;
    rt.design = design;
    rt.reqs = reqs;
    rt.request = req;
    rt.solution = sol;
    rt.mode = cfg.mode;

    NslDescriptor& d = rt.descriptor;
    d.slice_id = order.id;
    d.il_set = design.il_set();
    for (const auto& il : d.il_set) d.il_served_load[il.id] = design.served_load(il.id);
    d.workflows = scale_workflows(d.il_set, d.il_served_load, cfg.hysteresis);
    for (auto& w : d.workflows) w.trigger.sustain_minutes = cfg.sustain_minutes;
    for (const auto& v : req.deployment.vnfs) {
        auto& list = d.config_primitives[v.key];
        for (const auto& p : cat.vnfs.at(v.vnf_id).config_primitives) list.push_back({p.name, p.params});
    }
    d.chaining_rules = chain_rules(req.deployment);
    d.monitoring_spec.metrics = reqs.operational_reqs.visible_metrics;
    d.monitoring_spec.metrics.insert(kOfferedLoadMetric);
    d.monitoring_spec.alarms = {"DEGRADED"};
    validate(d);

    rt.mgmt_plane.nsl_manager = std::make_unique<NslManager>(reqs.operational_reqs);
    rt.mgmt_plane.ns_orchestrator = std::make_unique<NsOrchestrator>();
    std::set<std::string> vnf_ids;
    for (const auto& v : req.deployment.vnfs) vnf_ids.insert(v.vnf_id);
    for (const auto& id : vnf_ids) rt.mgmt_plane.vnfms.push_back(std::make_unique<Vnfm>(id));
    rt.mgmt_plane.tenant_sdn_controller = std::make_unique<TenantSdnController>(d.chaining_rules);

    order.transition(OrderStatus::Prepared);
    return rt;
}

std::vector<VnfInstanceRecord> level_instances(const Catalog& cat, const SliceRuntime& rt, const std::string& il_id) {
    const NslInstantiationLevel* il = rt.descriptor.find_il(il_id);
    if (il == nullptr) throw InvalidRequest("level '" + il_id + "' is not in the descriptor");
    const auto dep = resolve_slice(cat, *il, rt.reqs);
    std::vector<VnfInstanceRecord> out;
    for (const auto& v : dep.vnfs) {
        for (int i = 0; i < v.instance_count; ++i) {
            auto at = rt.solution.assignment.find({v.key, i});
            if (at == rt.solution.assignment.end()) {
                throw InvalidRequest("instance " + to_string(InstanceRef{v.key, i}) + " has no placement");
            }
            out.push_back({v.key, i, v.vnf_id, at->second, v.resource_level});
        }
    }
    return out;
}

std::vector<Reservation> level_reservations(const Catalog& cat, const SliceRuntime& rt, const std::string& il_id) {
    const NslInstantiationLevel* il = rt.descriptor.find_il(il_id);
    if (il == nullptr) throw InvalidRequest("level '" + il_id + "' is not in the descriptor");
    AdmissionRequest req;
    req.deployment = resolve_slice(cat, *il, rt.reqs);
    req.windows = rt.request.windows;
    FeasibleSolution sol;
    for (const auto& v : req.deployment.vnfs) {
        for (int i = 0; i < v.instance_count; ++i) sol.assignment[{v.key, i}] = rt.solution.assignment.at({v.key, i});
    }
    for (const auto& l : req.deployment.links) sol.link_routes[l.key] = rt.solution.link_routes.at(l.key);
    return build_reservations(rt.slice_id, req, sol, rt.mode);
}

namespace {

void sync_vnfms(SliceRuntime& rt) {
    for (auto& m : rt.mgmt_plane.vnfms) {
        m->set_instances(static_cast<int>(std::count_if(rt.instances.begin(), rt.instances.end(),
                                                        [&](const auto& r) { return r.vnf_id == m->vnf_id(); })));
    }
}

}  // namespace

void activate(SliceRuntime& rt, ServiceOrder& order, const Catalog& cat, std::int64_t now_minute) {
    if (order.status != OrderStatus::Prepared) {
        throw IllegalTransition("order " + order.id + " is " + to_string(order.status) + ", not PREPARED");
    }
    const auto& windows = rt.request.windows;
    if (std::none_of(windows.begin(), windows.end(), [&](const TimeWindow& w) { return w.contains(now_minute); })) {
        throw OutsideActiveWindow("minute " + std::to_string(now_minute) + " is outside every active window");
    }
    rt.current_il = rt.design.target_il.id;
    rt.instances = level_instances(cat, rt, rt.current_il);
    if (rt.mgmt_plane.ns_orchestrator) rt.mgmt_plane.ns_orchestrator->instantiate(rt.current_il);
    sync_vnfms(rt);
    order.transition(OrderStatus::Active);
}

HourPlan plan_hour(const SliceRuntime& rt, double load) {
    HourPlan plan;
    plan.load = load;
    const auto& workflows = rt.descriptor.workflows;
    std::map<std::string, double> values = rt.metrics();
    values[kOfferedLoadMetric] = load;
    auto ready = [&](const PolicyWorkflow& w) {
        const int n = plan.sustained[w.id];
        return n > 0 && (static_cast<std::int64_t>(n) - 1) * 60 >= w.trigger.sustain_minutes;
    };
    for (const auto& w : workflows) {
        auto it = values.find(w.trigger.metric);
        const bool holds = it != values.end() && w.trigger.holds(it->second);
        const auto prev = rt.sustained_hours.find(w.id);
        plan.sustained[w.id] = holds ? (prev == rt.sustained_hours.end() ? 0 : prev->second) + 1 : 0;
    }

    std::string level = rt.current_il;
    for (std::size_t guard = 0; guard <= workflows.size(); ++guard) {
        auto fire = std::find_if(workflows.begin(), workflows.end(), [&](const PolicyWorkflow& w) {
            return w.action.kind == ActionKind::ScaleTo && (w.when_il.empty() || w.when_il == level) &&
                   w.action.target != level && ready(w);
        });
        if (fire == workflows.end()) break;
        level = fire->action.target;
    }
    plan.desired_il = level;

    for (const auto& w : workflows) {
        if (w.action.kind == ActionKind::ScaleTo) continue;
        if (!w.when_il.empty() && w.when_il != rt.current_il) continue;
        const auto prev = rt.sustained_hours.find(w.id);
        const int before = prev == rt.sustained_hours.end() ? 0 : prev->second;
        // Fires once, on the hour the condition becomes ready.
        const bool was_ready = before > 0 && (static_cast<std::int64_t>(before) - 1) * 60 >= w.trigger.sustain_minutes;
        if (ready(w) && !was_ready) {
            ScalingEvent e;
            e.hour = rt.next_hour;
            e.kind = w.action.kind == ActionKind::Alert ? ScalingEventKind::Alert : ScalingEventKind::Reconfigured;
            e.from_il = rt.current_il;
            e.to_il = rt.current_il;
            e.load = load;
            e.detail = w.id + (w.action.target.empty() ? "" : ": " + w.action.target);
            plan.notices.push_back(e);
        }
    }
    return plan;
}

void commit_hour(SliceRuntime& rt, const Catalog& cat, ResourceOrchestrator& ledger, HourPlan plan,
                 std::vector<ScalingEvent>& events) {
    const std::int64_t hour = rt.next_hour;
    bool degraded = false;
    if (plan.desired_il != rt.current_il) {
        ScalingEvent e;
        e.hour = hour;
        e.from_il = rt.current_il;
        e.to_il = plan.desired_il;
        e.load = plan.load;
        try {
            ledger.replace(rt.slice_id, level_reservations(cat, rt, plan.desired_il));
            e.kind = ScalingEventKind::Scaled;
            if (rt.mgmt_plane.ns_orchestrator) rt.mgmt_plane.ns_orchestrator->scale(rt.current_il, plan.desired_il);
            rt.current_il = plan.desired_il;
            rt.instances = level_instances(cat, rt, rt.current_il);
            sync_vnfms(rt);
        } catch (const CapacityRaced& err) {
            e.kind = ScalingEventKind::Degraded;
            e.detail = err.what();
            degraded = true;
        }
        events.push_back(e);
    }
    const double served = rt.design.served_load(rt.current_il);
    if (plan.load > served && !degraded) {
        degraded = true;
        events.push_back({hour, ScalingEventKind::Degraded, rt.current_il, rt.current_il, plan.load,
                          "offered load exceeds the highest level"});
    }
    for (auto& n : plan.notices) {
        if (n.kind == ScalingEventKind::Reconfigured) {
            const std::string prim = n.detail.substr(n.detail.find(": ") + 2);
            for (auto& m : rt.mgmt_plane.vnfms) m->apply({prim, {}});
        }
        events.push_back(std::move(n));
    }
    rt.sustained_hours = std::move(plan.sustained);
    rt.last_load = plan.load;
    rt.history.push_back({hour, plan.load, rt.current_il, served, degraded});
    ++rt.next_hour;
}

std::vector<ScalingEvent> step_simulation(SliceRuntime& rt, const Catalog& cat, ResourceOrchestrator& ledger,
                                          const std::vector<double>& loads) {
    if (rt.current_il.empty()) throw IllegalTransition("slice " + rt.slice_id + " is not active");
    std::vector<ScalingEvent> events;
    for (double load : loads) {
        if (!(load >= 0.0)) throw InvalidRequest("offered load must be non-negative");
        commit_hour(rt, cat, ledger, plan_hour(rt, load), events);
    }
    return events;
}

void terminate(SliceRuntime& rt, ServiceOrder& order, ResourceOrchestrator& ledger) {
    if (order.status == OrderStatus::Terminated) return;
    if (order.status != OrderStatus::Active && order.status != OrderStatus::Prepared) {
        throw IllegalTransition("order " + order.id + " is " + to_string(order.status) + ", not ACTIVE or PREPARED");
    }
    ledger.release(rt.slice_id);
    rt.mgmt_plane.teardown();
    rt.instances.clear();
    rt.current_il.clear();
    order.transition(OrderStatus::Terminated);
}

namespace {

std::vector<std::vector<ScalingEvent>> simulate_fleet(std::vector<SliceRuntime*>& slices, const Catalog& cat,
                                                      ResourceOrchestrator& ledger,
                                                      const std::vector<std::vector<double>>& loads, bool parallel) {
    if (loads.size() != slices.size()) throw InvalidRequest("one load trace per slice is required");
    std::size_t hours = 0;
    for (const auto& l : loads) hours = std::max(hours, l.size());
    std::vector<std::size_t> commit_order(slices.size());
    std::iota(commit_order.begin(), commit_order.end(), 0);
    std::stable_sort(commit_order.begin(), commit_order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(slices[b]->priority, slices[a]->slice_id) < std::tie(slices[a]->priority, slices[b]->slice_id);
    });
    std::vector<std::vector<ScalingEvent>> events(slices.size());
    std::vector<std::optional<HourPlan>> plans(slices.size());
    for (std::size_t h = 0; h < hours; ++h) {
        const auto n = static_cast<std::int64_t>(slices.size());
#pragma omp parallel for schedule(static) if (parallel)
        for (std::int64_t i = 0; i < n; ++i) {
            plans[i].reset();
            if (h < loads[i].size()) plans[i] = plan_hour(*slices[i], loads[i][h]);
        }
        for (std::size_t i : commit_order) {
            if (plans[i]) commit_hour(*slices[i], cat, ledger, std::move(*plans[i]), events[i]);
        }
    }
    return events;
}

}  // namespace

std::vector<std::vector<ScalingEvent>> simulate_fleet_serial(std::vector<SliceRuntime*>& slices, const Catalog& cat,
                                                             ResourceOrchestrator& ledger,
                                                             const std::vector<std::vector<double>>& loads) {
    return simulate_fleet(slices, cat, ledger, loads, false);
}

std::vector<std::vector<ScalingEvent>> simulate_fleet_parallel(std::vector<SliceRuntime*>& slices,
                                                               const Catalog& cat, ResourceOrchestrator& ledger,
                                                               const std::vector<std::vector<double>>& loads) {
    return simulate_fleet(slices, cat, ledger, loads, true);
}

std::string format_events(const std::vector<ScalingEvent>& events) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-5s %-13s %-10s %-10s %8s\n", "HOUR", "EVENT", "FROM", "TO", "LOAD");
    out << line;
    for (const auto& e : events) {
        std::snprintf(line, sizeof line, "%-5lld %-13s %-10s %-10s %8.4f\n", static_cast<long long>(e.hour),
                      to_string(e.kind).c_str(), e.from_il.c_str(), e.to_il.c_str(), e.load);
        out << line;
    }
    return out.str();
}

std::string format_step_chart(const std::vector<HourRecord>& history) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-5s %8s %-10s %8s %s\n", "HOUR", "LOAD", "IL", "SERVED", "");
    out << line;
    for (const auto& h : history) {
        std::snprintf(line, sizeof line, "%-5lld %8.4f %-10s %8.4f %s\n", static_cast<long long>(h.hour), h.load,
                      h.il.c_str(), h.served, h.degraded ? "DEGRADED" : "");
        out << line;
    }
    return out.str();
}

json to_json(const ScalingEvent& e) {
    return {{"hour", e.hour},   {"kind", to_string(e.kind)}, {"from_il", e.from_il},
            {"to_il", e.to_il}, {"load", e.load},            {"detail", e.detail}};
}

ScalingEvent scaling_event_from_json(const json& j) {
    ScalingEvent e;
    e.hour = field<std::int64_t>(j, "hour", "scaling event");
    e.kind = scaling_event_kind_from_string(field<std::string>(j, "kind", "scaling event"));
    e.from_il = field<std::string>(j, "from_il", "scaling event");
    e.to_il = field<std::string>(j, "to_il", "scaling event");
    e.load = field<double>(j, "load", "scaling event");
    e.detail = field_or<std::string>(j, "detail", "", "scaling event");
    return e;
}

json to_json(const HourRecord& h) {
    return {{"hour", h.hour}, {"load", h.load}, {"il", h.il}, {"served", h.served}, {"degraded", h.degraded}};
}

HourRecord hour_record_from_json(const json& j) {
    return {field<std::int64_t>(j, "hour", "hour record"), field<double>(j, "load", "hour record"),
            field<std::string>(j, "il", "hour record"), field<double>(j, "served", "hour record"),
            field<bool>(j, "degraded", "hour record")};
}

}  // namespace nsl
