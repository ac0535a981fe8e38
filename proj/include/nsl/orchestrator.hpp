#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsl/admission.hpp"
#include "nsl/catalog.hpp"
#include "nsl/design.hpp"
#include "nsl/infra.hpp"
#include "nsl/lifecycle.hpp"
#include "nsl/ordering.hpp"
#include "nsl/placement.hpp"

namespace nsl {

enum class Stage {
    Ordered,
    Designed,
    Admitted,
    Rejected,
    Reserved,
    Prepared,
    Active,
    Simulated,
    Scaled,
    Degraded,
    Terminated
};

std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);

struct PipelineEvent {
    std::uint64_t seq = 0;
    std::string order_id;
    Stage stage = Stage::Ordered;
    json payload;
    std::int64_t at = 0;
    bool operator==(const PipelineEvent&) const = default;
};

json to_json(const PipelineEvent& e);
PipelineEvent event_from_json(const json& j);

// Append-only newline-delimited log. An empty path keeps events in memory.
class EventLog {
public:
    explicit EventLog(std::string path = "");
    void append(const PipelineEvent& e);
    const std::vector<PipelineEvent>& events() const { return events_; }
    const std::string& path() const { return path_; }

    // Reads every record of a log file; a missing file is an empty log.
    static std::vector<PipelineEvent> read(const std::string& path);

private:
    std::string path_;
    std::vector<PipelineEvent> events_;
};

struct OrchestratorConfig {
    std::optional<double> overbooking_factor;  // overrides the map's value
    LifecycleConfig lifecycle;
    Objective objective;
    TrafficProfile profile = TrafficProfile::flat();
    std::size_t snapshot_every = 50;  // events between snapshots; 0 disables
    int port = 8080;
    int retries_on_race = 3;
};

// Fields absent from `j` keep their defaults. `base_dir` resolves a relative
// traffic profile path.
OrchestratorConfig config_from_json(const json& j, const std::string& base_dir = ".");
OrchestratorConfig load_config(const std::string& path);

// Minutes since the epoch; injected so tests control time.
using Clock = std::function<std::int64_t()>;
Clock system_clock_minutes();
// Starts at `start` and advances one minute per reading.
Clock stepping_clock(std::int64_t start = 0);

struct ProcessOutcome {
    ServiceOrder order;
    AdmissionVerdict verdict;
    std::optional<NslDesign> design;
    std::vector<Reservation> reservations;
    std::optional<FeasibleSolution> placement;  // optimized
};

json to_json(const ProcessOutcome& o);

// Pipeline driver. Every state change is recorded as a PipelineEvent and
// applied from that record alone, so replaying the log rebuilds the state.
class Orchestrator {
public:
    Orchestrator(Catalog catalog, InfrastructureMap infra, OrchestratorConfig cfg, Clock clock,
                 std::shared_ptr<EventLog> log = nullptr, std::string snapshot_path = "");
    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    const Catalog& catalog() const { return catalog_; }
    const OrchestratorConfig& config() const { return cfg_; }

    ServiceOrder submit(const std::string& tenant, const std::string& template_id, const Overrides& overrides,
                        std::optional<std::string> parent_order_id = std::nullopt);
    // Stages B to E: design, admission, optimization, reservation and
    // preparation. A rejected order is returned, not thrown.
    ProcessOutcome process(const std::string& order_id);
    // Design and admission on a copy; no state change and no event.
    ProcessOutcome validate(const std::string& order_id) const;

    void activate(const std::string& slice_id, std::optional<std::int64_t> at_minute = std::nullopt);
    std::vector<ScalingEvent> feed_trace(const std::string& slice_id, const std::vector<double>& loads);
    // Idempotent on TERMINATED slices.
    void terminate(const std::string& slice_id);

    ServiceOrder order(const std::string& id) const;
    std::vector<ServiceOrder> orders() const;
    std::optional<NslDesign> design(const std::string& order_id) const;
    std::optional<NslDescriptor> descriptor(const std::string& slice_id) const;
    std::map<std::string, double> visible_metrics(const std::string& slice_id) const;
    double query_metric(const std::string& slice_id, const std::string& metric) const;
    std::vector<HourRecord> history(const std::string& slice_id) const;
    std::vector<PipelineEvent> events_of(const std::string& order_id) const;
    std::vector<PipelineEvent> events() const;
    InfrastructureMap infrastructure() const { return ledger_.snapshot(); }

    // Canonical state document; equal documents mean equal state.
    json snapshot() const;
    // Applies one recorded event.
    void apply(const PipelineEvent& e);
    // Restores from a snapshot document produced by snapshot().
    void restore(const json& snap);
    // Restores `snap` when given, then applies the events after it; earlier
    // events are kept as history only.
    void resume(const std::optional<json>& snap, const std::vector<PipelineEvent>& events);

    // Fresh orchestrator rebuilt from recorded events.
    static std::unique_ptr<Orchestrator> replay(const Catalog& catalog, const InfrastructureMap& infra,
                                                const OrchestratorConfig& cfg,
                                                const std::vector<PipelineEvent>& events);

private:
    struct Slice {
        SliceRuntime runtime;
    };

    void emit(const std::string& order_id, Stage stage, json payload);  // state_mu_ held
    void apply_locked(const PipelineEvent& e);
    void maybe_snapshot();
    Slice& slice(const std::string& id);
    const Slice& slice(const std::string& id) const;
    SliceRuntime rebuild_runtime(const ServiceOrder& order, const json& payload) const;

    Catalog catalog_;
    InfrastructureMap initial_;
    OrchestratorConfig cfg_;
    Clock clock_;
    std::shared_ptr<EventLog> log_;
    std::string snapshot_path_;

    mutable std::recursive_mutex state_mu_;
    OrderBook orders_;
    ResourceOrchestrator ledger_;
    std::map<std::string, NslDesign> designs_;
    std::map<std::string, FeasibleSolution> witnesses_;
    std::map<std::string, SlaRecord> slas_;
    std::map<std::string, FeasibleSolution> placements_;
    std::map<std::string, Slice> slices_;
    std::set<std::string> in_flight_;
    std::vector<PipelineEvent> events_;
    std::uint64_t seq_ = 0;
};

// Opens a data directory: catalog/, infra.json, config.json (optional),
// events.ndjson and snapshot.json. Restores the snapshot, then replays the
// remaining events.
std::unique_ptr<Orchestrator> open_data_dir(const std::string& dir, Clock clock);

}  // namespace nsl
