// Acceptance runner: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <thread>

#include <unistd.h>

#include "support/scenario.hpp"

using namespace nsl;
using namespace nsl::testkit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::string detail;
    std::string first_failure;

    void fail(const std::string& why) {
        if (pass) first_failure = why;
        pass = false;
    }
};

int report(const char* name, const Verdict& v) {
    std::printf("%s  %-28s %s%s%s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                v.pass ? "" : "; first failure: ", v.pass ? "" : v.first_failure.c_str());
    std::fflush(stdout);
    return v.pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Descriptors produced anywhere in the run, checked by the round-trip
// criterion at the end.
std::vector<NslDescriptor> g_descriptors;

void collect(const NslDescriptor& d) { g_descriptors.push_back(d); }

// --- admission ----------------------------------------------------------------

Verdict admission_equivalence() {
    Verdict v;
    Rng rng(1001);
    const auto t0 = Clock::now();
    int trials = 0, admitted = 0;
    std::map<std::string, int> causes;
    for (; trials < 1200; ++trials) {
        ScenarioParams p;  // at most 4 instances, 4 PoPs, 6 WAN links
        p.tight = chance(rng, 0.5);
        const auto map = random_infra(rng, p);
        const auto spec = random_spec(rng, p);
        const auto oracle = oracle_problem(map, spec, spec.levels);
        const auto expected = oracle_admission(oracle);
        const auto run = admit_scenario(spec, map);
        if (run.verdict.admitted != expected.feasible || run.verdict.cause != expected.cause) {
            v.fail(fmt("trial %d: library %s/%s, oracle %s/%s", trials, run.verdict.admitted ? "admit" : "reject",
                       run.verdict.cause.c_str(), expected.feasible ? "admit" : "reject", expected.cause.c_str()));
            continue;
        }
        if (run.verdict.admitted) {
            ++admitted;
            if (auto bad = oracle_check(oracle, *run.verdict.solution)) v.fail(fmt("trial %d: witness %s", trials, bad->c_str()));
        } else {
            ++causes[run.verdict.cause];
        }
    }
    const double secs = seconds_since(t0);
    if (secs >= 60.0) v.fail(fmt("runtime %.1f s", secs));
    std::string mix;
    for (const auto& [c, n] : causes) mix += fmt(" %s=%d", c.c_str(), n);
    v.detail = fmt("%d instances, %d admitted, rejected:%s, %.2f s", trials, admitted, mix.c_str(), secs);
    return v;
}

// --- placement ------------------------------------------------------------------

// Objective-relevant component of a cost, for the gap report.
double primary(const Objective& obj, const Cost& c) {
    return static_cast<double>(obj.kind == ObjectiveKind::MinEnergy ? c.pops : c.resource);
}

Verdict placement_exactness() {
    Verdict v;
    Rng rng(2002);
    // Cases whose raw search space exceeds this are redrawn so the
    // exhaustive oracle stays affordable.
    constexpr double kOracleBudget = 2e7;
    int cases = 0, feasible = 0, heuristic_optimal = 0, max_inst = 0, max_pops = 0, big = 0;
    double gap_sum = 0, gap_max = 0;
    const auto t0 = Clock::now();
    while (cases < 200) {
        ScenarioParams p;
        p.min_instances = p.max_instances = uniform(rng, 1, static_cast<int>(kMaxExactInstances));
        p.min_pops = p.max_pops = uniform(rng, 1, static_cast<int>(kMaxExactPops));
        p.max_groups = 4;
        p.max_links = 3;
        p.max_wans = 10;
        p.tight = chance(rng, 0.5);
        const auto map = random_infra(rng, p);
        const auto spec = random_spec(rng, p);
        const auto oracle = oracle_problem(map, spec, spec.levels);
        if (!oracle.empty_cause.empty()) continue;
        double space = 1;
        for (const auto& inst : oracle.insts) space *= static_cast<double>(inst.allowed.size());
        if (space > kOracleBudget) continue;

        const auto run = admit_scenario(spec, map);
        const auto req = build_request(run.catalog, run.order, run.design, abstract_view(map));
        const auto problem = PlacementProblem::build(map, req);
        if (!in_exact_regime(problem)) {
            v.fail(fmt("case %d outside the exact regime", cases));
            continue;
        }
        ++cases;
        max_inst = std::max(max_inst, static_cast<int>(oracle.insts.size()));
        max_pops = std::max(max_pops, static_cast<int>(oracle.pops.size()));
        if (oracle.insts.size() >= 8 && oracle.pops.size() >= 6) ++big;

        const Objective obj = random_objective(rng, map);
        const auto best = oracle_min_cost(oracle, obj);
        const auto serial = optimize_exact_serial(problem, obj);
        const auto parallel = optimize_exact_parallel(problem, obj);
        if (best.has_value() != serial.has_value() || best.has_value() != parallel.has_value()) {
            v.fail(fmt("case %d: feasibility differs from the oracle", cases));
            continue;
        }
        if (!best) continue;
        ++feasible;
        if (serial->cost != *best || parallel->cost != *best) {
            v.fail(fmt("case %d: exact %s / %s, oracle %s", cases, to_string(serial->cost).c_str(),
                       to_string(parallel->cost).c_str(), to_string(*best).c_str()));
        }
        for (const auto* r : {&*serial, &*parallel}) {
            const auto sol = problem.to_solution(r->placement.assign, r->placement.routing);
            if (auto bad = oracle_check(oracle, sol)) v.fail(fmt("case %d: exact witness %s", cases, bad->c_str()));
        }

        const auto heuristic = optimize_heuristic(problem, obj);
        if (!heuristic) {
            v.fail(fmt("case %d: heuristic found no placement", cases));
            continue;
        }
        const auto hsol = problem.to_solution(heuristic->placement.assign, heuristic->placement.routing);
        if (auto bad = oracle_check(oracle, hsol)) {
            v.fail(fmt("case %d: heuristic witness %s", cases, bad->c_str()));
            continue;
        }
        if (heuristic->cost == *best) ++heuristic_optimal;
        const double gap = (primary(obj, heuristic->cost) - primary(obj, *best)) / std::max(1.0, primary(obj, *best));
        gap_sum += gap;
        gap_max = std::max(gap_max, gap);
    }
    v.detail = fmt("%d cases (%d feasible, up to %d instances x %d PoPs, %d with >=8x>=6), heuristic optimal in %d/%d, "
                   "gap mean %.2f%% max %.2f%%, %.2f s",
                   cases, feasible, max_inst, max_pops, big, heuristic_optimal, feasible,
                   feasible ? 100.0 * gap_sum / feasible : 0.0, 100.0 * gap_max, seconds_since(t0));
    return v;
}

// --- conservation -----------------------------------------------------------------

// A random map whose pre-existing bookings are themselves sound.
InfrastructureMap sound_infra(Rng& rng, const ScenarioParams& p) {
    for (;;) {
        auto map = random_infra(rng, p);
        if (ledger_violations(map).empty()) return map;
    }
}

// Orders share the map concurrently through the library calls, then scale
// and terminate.
bool library_lifecycle_trial(Rng& rng, Verdict& v, int trial) {
    ScenarioParams p;
    p.tight = true;
    p.levels = uniform(rng, 1, 3);
    const auto initial = sound_infra(rng, p);
    const auto spec = random_spec(rng, p);
    const Catalog cat = scenario_catalog(spec);
    ResourceOrchestrator ledger(initial);
    const int orders = uniform(rng, 2, 5);
    std::vector<std::optional<PreparedSlice>> slices(orders);
    std::vector<TrafficProfile> profiles;
    for (int i = 0; i < orders; ++i) profiles.push_back(TrafficProfile::from_loads(random_profile(rng)));
    {
        std::vector<std::thread> workers;
        for (int i = 0; i < orders; ++i) {
            workers.emplace_back([&, i] {
                slices[i] = prepare_scenario(cat, "ord-" + std::to_string(i), profiles[i], ledger);
            });
        }
        for (auto& w : workers) w.join();
    }
    if (auto bad = ledger_violations(ledger.snapshot()); !bad.empty()) {
        v.fail(fmt("trial %d after booking: %s", trial, bad.front().c_str()));
        return false;
    }
    std::vector<SliceRuntime*> fleet;
    std::vector<ServiceOrder*> fleet_orders;
    std::vector<std::vector<double>> traces;
    for (auto& s : slices) {
        if (!s) continue;
        collect(s->runtime.descriptor);
        const std::int64_t at = s->runtime.request.windows.front().start;
        activate(s->runtime, s->order, cat, at);
        s->runtime.priority = uniform(rng, 0, 9);
        fleet.push_back(&s->runtime);
        fleet_orders.push_back(&s->order);
        std::vector<double> t;
        for (int h = uniform(rng, 1, 36); h > 0; --h) t.push_back(uniform(rng, 5, 110) / 100.0);
        traces.push_back(t);
    }
    if (!fleet.empty()) {
        if (chance(rng, 0.5)) {
            simulate_fleet_parallel(fleet, cat, ledger, traces);
        } else {
            simulate_fleet_serial(fleet, cat, ledger, traces);
        }
    }
    if (auto bad = ledger_violations(ledger.snapshot()); !bad.empty()) {
        v.fail(fmt("trial %d after scaling: %s", trial, bad.front().c_str()));
        return false;
    }
    for (std::size_t i = 0; i < fleet.size(); ++i) terminate(*fleet[i], *fleet_orders[i], ledger);
    if (!(ledger.snapshot() == initial)) {
        v.fail(fmt("trial %d: residual map differs after termination", trial));
        return false;
    }
    return true;
}

// Concurrent orders through the orchestrator, which retries raced commits.
bool orchestrated_lifecycle_trial(Rng& rng, Verdict& v, int trial) {
    ScenarioParams p;
    p.tight = true;
    p.levels = uniform(rng, 1, 3);
    const auto initial = sound_infra(rng, p);
    const auto spec = random_spec(rng, p);
    OrchestratorConfig cfg;
    cfg.profile = TrafficProfile::from_loads(random_profile(rng));
    cfg.objective = random_objective(rng, initial);
    cfg.lifecycle.mode = chance(rng, 0.3) ? ReservationMode::Soft : ReservationMode::Hard;
    Orchestrator orch(scenario_catalog(spec), initial, cfg, stepping_clock(0));
    const int orders = uniform(rng, 2, 5);
    std::vector<std::string> ids;
    for (int i = 0; i < orders; ++i) ids.push_back(orch.submit("tenant", "t", {}).id);
    {
        std::vector<std::thread> workers;
        for (const auto& id : ids) workers.emplace_back([&orch, id] { orch.process(id); });
        for (auto& w : workers) w.join();
    }
    const std::int64_t at = spec.windows.empty() ? 0 : spec.windows.front().start;
    for (const auto& id : ids) {
        if (orch.order(id).status != OrderStatus::Prepared) continue;
        collect(*orch.descriptor(id));
        orch.activate(id, at);
        std::vector<double> t;
        for (int h = uniform(rng, 1, 36); h > 0; --h) t.push_back(uniform(rng, 5, 110) / 100.0);
        orch.feed_trace(id, t);
        if (auto bad = ledger_violations(orch.infrastructure()); !bad.empty()) {
            v.fail(fmt("trial %d while scaling: %s", trial, bad.front().c_str()));
            return false;
        }
    }
    for (const auto& id : ids) {
        const auto s = orch.order(id).status;
        if (s == OrderStatus::Active || s == OrderStatus::Prepared) orch.terminate(id);
    }
    if (!(orch.infrastructure() == initial)) {
        v.fail(fmt("trial %d: residual map differs after termination", trial));
        return false;
    }
    return true;
}

Verdict reservation_conservation() {
    Verdict v;
    Rng rng(3003);
    const auto t0 = Clock::now();
    int ok = 0;
    constexpr int kTrials = 600;
    for (int trial = 0; trial < kTrials; ++trial) {
        const bool passed = trial % 2 == 0 ? library_lifecycle_trial(rng, v, trial) : orchestrated_lifecycle_trial(rng, v, trial);
        ok += passed;
    }
    v.detail = fmt("%d/%d lifecycle trials with 2-5 concurrent orders, %.2f s", ok, kTrials, seconds_since(t0));
    return v;
}

// --- design sufficiency -------------------------------------------------------------

Verdict design_sufficiency() {
    Verdict v;
    Rng rng(4004);
    ScenarioSpec spec;
    spec.levels = 8;
    spec.groups.push_back({3, {1, 1, 1}, {}, 0, false});
    spec.groups.push_back({2, {1, 2, 3}, {}, 0, false});
    const Catalog cat = scenario_catalog(spec);
    int profiles = 0, degraded_hours = 0, max_levels = 0;
    for (; profiles < 150; ++profiles) {
        const auto loads = random_profile(rng);
        InfrastructureMap map;
        map.overbooking_factor = 1.0;
        map.pops.push_back({"p1", "R", {}, {5, 8, 9}, ""});  // exactly the target level
        ResourceOrchestrator ledger(map);
        LifecycleConfig cfg;
        cfg.hysteresis = uniform(rng, 0, 25) / 100.0;
        cfg.sustain_minutes = uniform(rng, 0, 2) * 60;
        auto s = prepare_scenario(cat, "ord-1", TrafficProfile::from_loads(loads), ledger, cfg);
        if (!s) {
            v.fail(fmt("profile %d: not admitted", profiles));
            continue;
        }
        const auto& d = s->design;
        max_levels = std::max(max_levels, static_cast<int>(d.il_set().size()));
        collect(s->runtime.descriptor);
        const auto set = d.il_set();
        for (std::size_t h = 0; h < loads.size(); ++h) {
            if (std::none_of(set.begin(), set.end(), [&](const auto& il) { return d.served_load(il.id) >= loads[h]; })) {
                v.fail(fmt("profile %d hour %zu: no level covers %.2f", profiles, h, loads[h]));
            }
        }
        activate(s->runtime, s->order, cat, 0);
        // Two days of the profile; halfway through, a third party takes the
        // room the slice freed, so some scale-ups are refused.
        std::vector<ScalingEvent> events = step_simulation(s->runtime, cat, ledger, loads);
        const auto free = residual_capacity(ledger.snapshot(), "p1", {0, kForeverMinutes, Recurrence::Once});
        if (!free.is_zero() && chance(rng, 0.5)) {
            Reservation other;
            other.order_id = "other";
            other.resource_id = "p1";
            other.amount = free;
            other.window = {0, kForeverMinutes, Recurrence::Once};
            ledger.commit({other});
        }
        const auto more = step_simulation(s->runtime, cat, ledger, loads);
        events.insert(events.end(), more.begin(), more.end());
        for (const auto& rec : s->runtime.history) {
            const double capacity = d.served_load(rec.il);
            if (rec.load <= capacity + 1e-12) continue;
            ++degraded_hours;
            const bool flagged = std::any_of(events.begin(), events.end(), [&](const ScalingEvent& e) {
                return e.hour == rec.hour && e.kind == ScalingEventKind::Degraded;
            });
            if (!rec.degraded || !flagged) {
                v.fail(fmt("profile %d hour %lld: load %.2f over %s without DEGRADED", profiles,
                           static_cast<long long>(rec.hour), rec.load, rec.il.c_str()));
            }
        }
    }

    // The day-shaped trace on the fixture catalog.
    Orchestrator orch(load_catalog(fixtures_dir() + "/catalog"), load_infra(fixtures_dir() + "/infra.json"),
                      load_config(fixtures_dir() + "/config.json"), stepping_clock(0));
    const auto o = orch.submit("tenant-a", "embb", {});
    const auto out = orch.process(o.id);
    std::string peak_il = "?";
    std::size_t levels = 0;
    if (out.order.status != OrderStatus::Prepared || !out.design) {
        v.fail("day trace: fixture order not prepared");
    } else {
        levels = out.design->il_set().size();
        orch.activate(o.id, 0);
        const auto day = load_profile_csv(fixtures_dir() + "/day.csv");
        orch.feed_trace(o.id, day.loads());
        const auto hist = orch.history(o.id);
        const auto peak = std::max_element(day.hourly_load.begin(), day.hourly_load.end()) - day.hourly_load.begin();
        peak_il = hist.at(static_cast<std::size_t>(peak)).il;
        if (levels != 4) v.fail(fmt("day trace: %zu levels, expected 4", levels));
        if (peak_il != out.design->target_il.id) v.fail("day trace: peak hour not at the target level");
        const std::string chart = format_step_chart(hist);
        if (chart.find(peak_il) == std::string::npos) v.fail("day trace: step chart lacks the peak level");
        collect(*orch.descriptor(o.id));
    }
    v.detail = fmt("%d profiles (up to %d levels), %d over-capacity hours all DEGRADED; day trace %zu levels, peak at %s",
                   profiles, max_levels, degraded_hours, levels, peak_il.c_str());
    return v;
}

// --- abstraction ------------------------------------------------------------------------

Verdict abstraction_guarantee() {
    Verdict v;
    Rng rng(5005);
    int trials = 0, empty = 0;
    auto run = [](const InfrastructureMap& m, const ScenarioSpec& spec, const ResolvedDeployment& dep) {
        try {
            return std::pair<std::string, CandidateSet>{"", compute_candidates(abstract_view(m), spec.geo, dep)};
        } catch (const EmptyCandidateSet& e) {
            return std::pair<std::string, CandidateSet>{e.cause(), {}};
        }
    };
    for (; trials < 200; ++trials) {
        ScenarioParams p;
        p.max_pops = 8;
        p.max_instances = 10;
        const auto map = random_infra(rng, p);
        const auto spec = random_spec(rng, p);
        const auto dep = resolve_triplet(scenario_catalog(spec), {"nsd-s", "f", "il-1"});
        const auto base = run(map, spec, dep);
        empty += !base.first.empty();
        InfrastructureMap mutated = map;
        for (auto& pop : mutated.pops) {
            pop.capacity = {uniform(rng, 0, 1000), uniform(rng, 0, 1000), uniform(rng, 0, 10000)};
        }
        for (auto& wan : mutated.wan_links) wan.capacity_mbps = uniform(rng, 0, 1000);
        if (chance(rng, 0.5)) mutated.reservations.clear();
        mutated.overbooking_factor = chance(rng, 0.5) ? 1.0 : 2.0;
        if (run(mutated, spec, dep) != base) v.fail(fmt("trial %d: candidates changed", trials));
    }
    v.detail = fmt("%d capacity mutations, %d with an empty candidate set", trials, empty);
    return v;
}

// --- replay ----------------------------------------------------------------------------

void random_session(Orchestrator& orch, Rng& rng, const std::vector<std::string>& templates, int steps) {
    std::vector<std::string> ids;
    for (int s = 0; s < steps; ++s) {
        const int op = uniform(rng, 0, 4);
        if (op <= 1 || ids.empty()) {
            ids.push_back(orch.submit("tenant", templates[uniform(rng, 0, static_cast<int>(templates.size()) - 1)], {}).id);
            continue;
        }
        const std::string id = ids[uniform(rng, 0, static_cast<int>(ids.size()) - 1)];
        const auto status = orch.order(id).status;
        try {
            if (status == OrderStatus::Submitted) {
                orch.process(id);
                if (auto d = orch.descriptor(id)) collect(*d);
            } else if (status == OrderStatus::Prepared && op == 2) {
                orch.activate(id, 0);
            } else if (status == OrderStatus::Active && op == 3) {
                std::vector<double> loads;
                for (int h = uniform(rng, 1, 30); h > 0; --h) loads.push_back(uniform(rng, 5, 110) / 100.0);
                orch.feed_trace(id, loads);
            } else if ((status == OrderStatus::Active || status == OrderStatus::Prepared) && op == 4) {
                orch.terminate(id);
            }
        } catch (const OutsideActiveWindow&) {
        }
    }
}

Verdict event_log_replay() {
    Verdict v;
    Rng rng(6006);
    const Catalog fixture_catalog = load_catalog(fixtures_dir() + "/catalog");
    const auto fixture_infra = load_infra(fixtures_dir() + "/infra.json");
    const auto fixture_cfg = load_config(fixtures_dir() + "/config.json");
    int sessions = 0;
    std::size_t events = 0;
    for (; sessions < 60; ++sessions) {
        std::unique_ptr<Orchestrator> orch;
        Catalog cat;
        InfrastructureMap infra;
        OrchestratorConfig cfg;
        std::vector<std::string> templates;
        if (sessions % 2 == 0) {
            cat = fixture_catalog;
            infra = fixture_infra;
            cfg = fixture_cfg;
            templates = {"embb", "secure-cdn", "probe-pair"};
        } else {
            ScenarioParams p;
            p.levels = uniform(rng, 1, 3);
            infra = random_infra(rng, p);
            const auto spec = random_spec(rng, p);
            cat = scenario_catalog(spec);
            cfg.profile = TrafficProfile::from_loads(random_profile(rng));
            templates = {"t"};
        }
        orch = std::make_unique<Orchestrator>(cat, infra, cfg, stepping_clock(0));
        random_session(*orch, rng, templates, 80);
        // A burst of concurrent processing on top.
        std::vector<std::string> burst;
        for (int i = 0; i < 4; ++i) burst.push_back(orch->submit("tenant", templates.front(), {}).id);
        std::vector<std::thread> workers;
        for (const auto& id : burst) workers.emplace_back([&, id] { orch->process(id); });
        for (auto& w : workers) w.join();

        const auto log = orch->events();
        events += log.size();
        const std::string live = orch->snapshot().dump();
        if (Orchestrator::replay(cat, infra, cfg, log)->snapshot().dump() != live) {
            v.fail(fmt("session %d: replayed snapshot differs", sessions));
        }
        // Snapshot at a midpoint plus the tail.
        Orchestrator half(cat, infra, cfg, stepping_clock(0));
        const std::size_t cut = log.size() / 2;
        for (std::size_t i = 0; i < cut; ++i) half.apply(log[i]);
        Orchestrator resumed(cat, infra, cfg, stepping_clock(0));
        resumed.resume(half.snapshot(), log);
        if (resumed.snapshot().dump() != live) v.fail(fmt("session %d: snapshot plus tail differs", sessions));
    }

    // A data directory reopened after a run resumes from its snapshot and log.
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("nsl-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy(fixtures_dir(), dir, fs::copy_options::recursive);
    std::string live;
    {
        auto orch = open_data_dir(dir.string(), stepping_clock(0));
        random_session(*orch, rng, {"embb", "secure-cdn", "probe-pair"}, 150);
        live = orch->snapshot().dump();
    }
    if (!fs::exists(dir / "snapshot.json")) v.fail("data dir: no snapshot written");
    if (open_data_dir(dir.string(), stepping_clock(0))->snapshot().dump() != live) v.fail("data dir: reopened state differs");
    fs::remove_all(dir);
    v.detail = fmt("%d sessions, %zu events, full replay, snapshot-plus-tail and data-dir reopen identical", sessions,
                   events);
    return v;
}

// --- descriptors -------------------------------------------------------------------------

Verdict descriptor_round_trip() {
    Verdict v;
    for (std::size_t i = 0; i < g_descriptors.size(); ++i) {
        const std::string text = serialize(g_descriptors[i]);
        if (serialize(parse_descriptor(text)) != text) v.fail(fmt("descriptor %zu", i));
    }
    if (g_descriptors.empty()) v.fail("no descriptors generated");
    v.detail = fmt("%zu descriptors byte-identical", g_descriptors.size());
    return v;
}

}  // namespace

int main() {
    int failures = 0;
    failures += report("admission-oracle", admission_equivalence());
    failures += report("placement-exactness", placement_exactness());
    failures += report("reservation-conservation", reservation_conservation());
    failures += report("design-sufficiency", design_sufficiency());
    failures += report("abstraction-guarantee", abstraction_guarantee());
    failures += report("event-log-replay", event_log_replay());
    failures += report("descriptor-round-trip", descriptor_round_trip());
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
