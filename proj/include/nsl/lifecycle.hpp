#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsl/admission.hpp"
#include "nsl/design.hpp"
#include "nsl/placement.hpp"

namespace nsl {

enum class Comparator { Gt, Ge, Lt, Le };
enum class ActionKind { ScaleTo, Reconfigure, Alert };

std::string to_string(Comparator c);
Comparator comparator_from_string(const std::string& s);
std::string to_string(ActionKind k);
ActionKind action_kind_from_string(const std::string& s);

inline constexpr const char* kOfferedLoadMetric = "offered_load";

struct Trigger {
    std::string metric = kOfferedLoadMetric;
    Comparator comparator = Comparator::Gt;
    double threshold = 0.0;
    std::int64_t sustain_minutes = 0;

    bool holds(double value) const;
    bool operator==(const Trigger&) const = default;
};

struct WorkflowAction {
    ActionKind kind = ActionKind::Alert;
    std::string target;  // level id for SCALE_TO, primitive name for RECONFIGURE
    bool operator==(const WorkflowAction&) const = default;
};

// A workflow with a non-empty `when_il` is armed only while the slice runs at
// that level.
struct PolicyWorkflow {
    std::string id;
    Trigger trigger;
    WorkflowAction action;
    std::string when_il;
    bool operator==(const PolicyWorkflow&) const = default;
};

struct PrimitiveInvocation {
    std::string primitive;
    std::vector<std::string> params;
    bool operator==(const PrimitiveInvocation&) const = default;
};

struct ChainingRule {
    std::string from_vnf;
    std::string to_vnf;
    std::string match;
    bool operator==(const ChainingRule&) const = default;
};

struct MonitoringSpec {
    std::set<std::string> metrics;
    std::int64_t reporting_period_s = 3600;
    std::set<std::string> alarms;
    bool operator==(const MonitoringSpec&) const = default;
};

struct NslDescriptor {
    std::string slice_id;
    std::vector<PolicyWorkflow> workflows;
    std::vector<NslInstantiationLevel> il_set;  // ascending capacity, target last
    std::map<std::string, double> il_served_load;
    std::map<std::string, std::vector<PrimitiveInvocation>> config_primitives;  // by VNF key
    std::vector<ChainingRule> chaining_rules;
    MonitoringSpec monitoring_spec;

    const NslInstantiationLevel* find_il(const std::string& id) const;
    bool operator==(const NslDescriptor&) const = default;
};

// Structural checks: target in il_set, actions resolvable, chaining rules an
// acyclic graph connecting every deployed VNF. Throws ParseError.
void validate(const NslDescriptor& d);

json to_json(const NslDescriptor& d);
NslDescriptor descriptor_from_json(const json& j);
// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string serialize(const NslDescriptor& d);
NslDescriptor parse_descriptor(const std::string& text);

// Scale workflows for an ascending level set: at each boundary k an
// up-trigger (load > f_k, armed at level k) and a down-trigger
// (load < f_k x (1 - hysteresis), armed at level k + 1).
std::vector<PolicyWorkflow> scale_workflows(const std::vector<NslInstantiationLevel>& il_set,
                                            const std::map<std::string, double>& served_load, double hysteresis);

// --- management-plane stubs -------------------------------------------------

// Every metric the runtime can report.
const std::vector<std::string>& metric_namespace();

// Exposes exactly the order's operational requirements.
class NslManager {
public:
    explicit NslManager(OperationalReqs exposure) : exposure_(std::move(exposure)) {}
    // Throws ExposureDenied for metrics outside the visible set.
    double query(const std::string& metric, const std::map<std::string, double>& values) const;
    // Throws ExposureDenied for actions outside the allowed set.
    void authorize(const std::string& action) const;
    std::map<std::string, double> visible(const std::map<std::string, double>& values) const;
    const OperationalReqs& exposure() const { return exposure_; }

private:
    OperationalReqs exposure_;
};

class NsOrchestrator {
public:
    void instantiate(const std::string& il_id) { log_.push_back("instantiate " + il_id); }
    void scale(const std::string& from, const std::string& to) { log_.push_back("scale " + from + " -> " + to); }
    void teardown() { log_.push_back("teardown"); }
    const std::vector<std::string>& log() const { return log_; }

private:
    std::vector<std::string> log_;
};

class Vnfm {
public:
    explicit Vnfm(std::string vnf_id) : vnf_id_(std::move(vnf_id)) {}
    const std::string& vnf_id() const { return vnf_id_; }
    void set_instances(int n) { instances_ = n; }
    int instances() const { return instances_; }
    void apply(const PrimitiveInvocation& p) { applied_.push_back(p.primitive); }
    const std::vector<std::string>& applied() const { return applied_; }

private:
    std::string vnf_id_;
    int instances_ = 0;
    std::vector<std::string> applied_;
};

class TenantSdnController {
public:
    explicit TenantSdnController(std::vector<ChainingRule> rules) : rules_(std::move(rules)) {}
    const std::vector<ChainingRule>& rules() const { return rules_; }

private:
    std::vector<ChainingRule> rules_;
};

struct ManagementPlane {
    std::unique_ptr<NslManager> nsl_manager;
    std::unique_ptr<NsOrchestrator> ns_orchestrator;
    std::vector<std::unique_ptr<Vnfm>> vnfms;
    std::unique_ptr<TenantSdnController> tenant_sdn_controller;

    bool live() const { return nsl_manager != nullptr; }
    void teardown();
};

// --- runtime ----------------------------------------------------------------

struct VnfInstanceRecord {
    std::string vnf_key;
    int index = 0;
    std::string vnf_id;
    std::string pop_id;
    std::string resource_level;
    bool operator==(const VnfInstanceRecord&) const = default;
};

enum class ScalingEventKind { Scaled, Degraded, Alert, Reconfigured };
std::string to_string(ScalingEventKind k);
ScalingEventKind scaling_event_kind_from_string(const std::string& s);

struct ScalingEvent {
    std::int64_t hour = 0;
    ScalingEventKind kind = ScalingEventKind::Scaled;
    std::string from_il;
    std::string to_il;
    double load = 0.0;
    std::string detail;
    bool operator==(const ScalingEvent&) const = default;
};

struct HourRecord {
    std::int64_t hour = 0;
    double load = 0.0;
    std::string il;
    double served = 0.0;
    bool degraded = false;
    bool operator==(const HourRecord&) const = default;
};

// Provider policy: priority by template id, 0..9.
struct PriorityPolicy {
    std::map<std::string, int> by_template;
    int fallback = 5;
    int priority_for(const std::string& template_id) const;
};

struct LifecycleConfig {
    double hysteresis = 0.1;
    std::int64_t sustain_minutes = 0;
    PriorityPolicy priority;
    ReservationMode mode = ReservationMode::Hard;
};

struct SliceRuntime {
    std::string slice_id;
    std::string current_il;
    int priority = 5;
    OperationalReqs exposure;
    ManagementPlane mgmt_plane;

    NslDescriptor descriptor;
    NslDesign design;
    SliceRequirements reqs;
    AdmissionRequest request;   // target level
    FeasibleSolution solution;  // target level
    ReservationMode mode = ReservationMode::Hard;
    std::vector<VnfInstanceRecord> instances;
    std::int64_t next_hour = 0;
    std::map<std::string, int> sustained_hours;  // workflow id -> consecutive hours true
    std::vector<HourRecord> history;
    double last_load = 0.0;

    std::map<std::string, double> metrics() const;
};

// RESERVED -> PREPARED. Builds the descriptor and instantiates the stubs.
SliceRuntime prepare(const Catalog& cat, ServiceOrder& order, const NslDesign& design, const AdmissionRequest& req,
                     const FeasibleSolution& sol, const LifecycleConfig& cfg);

// PREPARED -> ACTIVE at the target level. Throws OutsideActiveWindow.
void activate(SliceRuntime& rt, ServiceOrder& order, const Catalog& cat, std::int64_t now_minute);

// Evaluation of one simulated hour, free of side effects.
struct HourPlan {
    double load = 0.0;
    std::map<std::string, int> sustained;
    std::string desired_il;  // level the scale triggers settle on
    std::vector<ScalingEvent> notices;  // ALERT / RECONFIGURED firings
};

HourPlan plan_hour(const SliceRuntime& rt, double load);
// Applies a plan: moves bookings when the level changes, appends events.
void commit_hour(SliceRuntime& rt, const Catalog& cat, ResourceOrchestrator& ledger, HourPlan plan,
                 std::vector<ScalingEvent>& events);

// Instance records of level `il_id` pinned to the target placement.
std::vector<VnfInstanceRecord> level_instances(const Catalog& cat, const SliceRuntime& rt, const std::string& il_id);

// Reservations backing level `il_id`.
std::vector<Reservation> level_reservations(const Catalog& cat, const SliceRuntime& rt, const std::string& il_id);

// One simulated hour per load. Scale actions move the slice's bookings
// through `ledger`; a refused scale-up leaves the slice at its level and
// records DEGRADED.
std::vector<ScalingEvent> step_simulation(SliceRuntime& rt, const Catalog& cat, ResourceOrchestrator& ledger,
                                          const std::vector<double>& loads);

// Releases every booking and tears the stubs down; a second call is a no-op.
void terminate(SliceRuntime& rt, ServiceOrder& order, ResourceOrchestrator& ledger);

// Many slices over a shared clock: each hour every slice evaluates its
// workflows, then level changes commit one at a time by descending priority.
// `loads[i]` feeds `slices[i]`.
std::vector<std::vector<ScalingEvent>> simulate_fleet_serial(std::vector<SliceRuntime*>& slices, const Catalog& cat,
                                                             ResourceOrchestrator& ledger,
                                                             const std::vector<std::vector<double>>& loads);
std::vector<std::vector<ScalingEvent>> simulate_fleet_parallel(std::vector<SliceRuntime*>& slices,
                                                               const Catalog& cat, ResourceOrchestrator& ledger,
                                                               const std::vector<std::vector<double>>& loads);

// Columnar event table: HOUR EVENT FROM TO LOAD.
std::string format_events(const std::vector<ScalingEvent>& events);
// Columnar per-hour step chart: HOUR LOAD IL SERVED.
std::string format_step_chart(const std::vector<HourRecord>& history);

json to_json(const ScalingEvent& e);
ScalingEvent scaling_event_from_json(const json& j);
json to_json(const HourRecord& h);
HourRecord hour_record_from_json(const json& j);

}  // namespace nsl
