#include <doctest.h>

#include <filesystem>
#include <thread>

#include <unistd.h>

#include "support/scenario.hpp"

using namespace nsl;
using namespace nsl::testkit;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    Catalog catalog = load_catalog(fixtures_dir() + "/catalog");
    InfrastructureMap infra = load_infra(fixtures_dir() + "/infra.json");
    OrchestratorConfig cfg = load_config(fixtures_dir() + "/config.json");

    std::unique_ptr<Orchestrator> make(std::shared_ptr<EventLog> log = nullptr, std::string snap = "") const {
        return std::make_unique<Orchestrator>(catalog, infra, cfg, stepping_clock(0), std::move(log), std::move(snap));
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

Overrides random_embb_overrides(Rng& rng) {
    Overrides o;
    if (chance(rng, 0.5)) o["network_reqs.performance.throughput_mbps"] = uniform(rng, 1, 10) * 100;
    if (chance(rng, 0.5)) o["network_reqs.performance.max_sessions"] = uniform(rng, 1, 10) * 1000;
    if (chance(rng, 0.2)) o["geo_reqs.cache"] = json::array({"west"});
    return o;
}

// A random session of submissions, processing, activation, traces and
// terminations against `orch`.
void random_session(Orchestrator& orch, Rng& rng, int steps) {
    const std::vector<std::string> templates{"embb", "secure-cdn", "probe-pair"};
    std::vector<std::string> ids;
    for (int s = 0; s < steps; ++s) {
        const int op = uniform(rng, 0, 4);
        if (op <= 1 || ids.empty()) {
            const std::string t = templates[uniform(rng, 0, 2)];
            const auto o = orch.submit(chance(rng, 0.5) ? "tenant-a" : "tenant-b", t,
                                       t == "embb" ? random_embb_overrides(rng) : Overrides{});
            ids.push_back(o.id);
            continue;
        }
        const std::string id = ids[uniform(rng, 0, static_cast<int>(ids.size()) - 1)];
        const auto status = orch.order(id).status;
        if (status == OrderStatus::Submitted) {
            orch.process(id);
        } else if (status == OrderStatus::Prepared && op == 2) {
            orch.activate(id, 0);
        } else if (status == OrderStatus::Active && op == 3) {
            std::vector<double> loads;
            for (int h = uniform(rng, 1, 30); h > 0; --h) loads.push_back(uniform(rng, 5, 110) / 100.0);
            orch.feed_trace(id, loads);
        } else if ((status == OrderStatus::Active || status == OrderStatus::Prepared) && op == 4) {
            orch.terminate(id);
        }
    }
}

fs::path fresh_data_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nsl-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy(fixtures_dir(), dir, fs::copy_options::recursive);
    return dir;
}

}  // namespace

TEST_CASE("an order runs from submission to termination") {
    const auto& fx = fixture();
    auto orch = fx.make();
    const auto submitted = orch->submit("tenant-a", "embb", {});
    CHECK(submitted.status == OrderStatus::Submitted);
    CHECK(submitted.id == "ord-000001");

    const auto out = orch->process(submitted.id);
    REQUIRE(out.order.status == OrderStatus::Prepared);
    CHECK(out.verdict.admitted);
    CHECK_FALSE(out.reservations.empty());
    REQUIRE(out.placement.has_value());
    REQUIRE(out.design.has_value());
    CHECK(out.design->optional_ils.size() >= 1);

    std::vector<Stage> stages;
    for (const auto& e : orch->events_of(submitted.id)) stages.push_back(e.stage);
    CHECK(stages == std::vector<Stage>{Stage::Ordered, Stage::Designed, Stage::Admitted, Stage::Reserved,
                                       Stage::Prepared});

    orch->activate(submitted.id, 0);
    const auto day = load_profile_csv(fixtures_dir() + "/day.csv");
    orch->feed_trace(submitted.id, day.loads());
    const auto hist = orch->history(submitted.id);
    REQUIRE(hist.size() == 24);
    CHECK(hist[19].il == out.design->target_il.id);
    CHECK(orch->query_metric(submitted.id, "offered_load") == doctest::Approx(day.hourly_load[23]));
    CHECK_THROWS_AS(orch->query_metric(submitted.id, "throughput_mbps"), ExposureDenied);
    CHECK(ledger_violations(orch->infrastructure()).empty());

    orch->terminate(submitted.id);
    CHECK(orch->order(submitted.id).status == OrderStatus::Terminated);
    InfrastructureMap initial = fx.infra;
    initial.overbooking_factor = *fx.cfg.overbooking_factor;
    CHECK(orch->infrastructure() == initial);
    const auto before = orch->events().size();
    CHECK_NOTHROW(orch->terminate(submitted.id));
    CHECK(orch->events().size() == before);
}

TEST_CASE("rejections carry their cause") {
    auto orch = fixture().make();
    const auto pair = orch->submit("tenant-a", "probe-pair", {});
    const auto out = orch->process(pair.id);
    CHECK(out.order.status == OrderStatus::Rejected);
    CHECK(out.order.rejection_cause == "AFFINITY");
    CHECK(out.verdict.cause == "AFFINITY");

    const auto west = orch->submit("tenant-a", "embb", {{"geo_reqs.cache", json::array({"west"})}});
    CHECK(orch->process(west.id).order.rejection_cause == "geolocation");
    CHECK_THROWS_AS(orch->process(west.id), IllegalTransition);
    CHECK_THROWS_AS(orch->process("ord-999999"), UnknownOrder);
    CHECK_THROWS_AS(orch->activate(west.id, 0), IllegalTransition);
    CHECK_THROWS_AS(orch->submit("tenant-a", "embb", {}, "ord-424242"), UnknownOrder);
}

TEST_CASE("validation has no side effects") {
    Rng rng(83);
    auto orch = fixture().make();
    random_session(*orch, rng, 40);
    for (const auto& o : orch->orders()) {
        if (o.status != OrderStatus::Submitted && o.status != OrderStatus::Rejected) continue;
        const json before = orch->snapshot();
        const auto events = orch->events().size();
        ProcessOutcome a, b;
        try {
            a = orch->validate(o.id);
            b = orch->validate(o.id);
        } catch (const IllegalTransition&) {
            continue;  // rejected before design
        }
        CHECK(a.verdict.admitted == b.verdict.admitted);
        CHECK(a.verdict.cause == b.verdict.cause);
        CHECK(a.verdict.solution == b.verdict.solution);
        CHECK(orch->snapshot() == before);
        CHECK(orch->events().size() == events);
    }
}

TEST_CASE("replaying the event log rebuilds the live state") {
    const auto& fx = fixture();
    Rng rng(89);
    for (int trial = 0; trial < 10; ++trial) {
        auto orch = fx.make();
        random_session(*orch, rng, 60);
        const auto replayed = Orchestrator::replay(fx.catalog, fx.infra, fx.cfg, orch->events());
        CHECK(replayed->snapshot() == orch->snapshot());
        CHECK(ledger_violations(orch->infrastructure()).empty());
    }
}

TEST_CASE("restore plus the later events equals the live state") {
    const auto& fx = fixture();
    Rng rng(97);
    auto orch = fx.make();
    random_session(*orch, rng, 30);
    const json mid = orch->snapshot();
    random_session(*orch, rng, 30);
    auto other = fx.make();
    other->resume(mid, orch->events());
    CHECK(other->snapshot() == orch->snapshot());
    CHECK(other->events().size() == orch->events().size());
}

TEST_CASE("concurrent processing stays within capacity") {
    const auto& fx = fixture();
    for (int round = 0; round < 5; ++round) {
        auto orch = fx.make();
        std::vector<std::string> ids;
        for (int i = 0; i < 12; ++i) ids.push_back(orch->submit("tenant-a", i % 3 == 0 ? "secure-cdn" : "embb", {}).id);
        std::vector<std::thread> workers;
        for (const auto& id : ids) workers.emplace_back([&, id] { orch->process(id); });
        for (auto& w : workers) w.join();
        int prepared = 0;
        for (const auto& id : ids) {
            const auto s = orch->order(id).status;
            CHECK((s == OrderStatus::Prepared || s == OrderStatus::Rejected));
            prepared += s == OrderStatus::Prepared;
        }
        CHECK(prepared >= 1);
        CHECK(ledger_violations(orch->infrastructure()).empty());
        const auto replayed = Orchestrator::replay(fx.catalog, fx.infra, fx.cfg, orch->events());
        CHECK(replayed->snapshot() == orch->snapshot());
        for (const auto& id : ids) {
            if (orch->order(id).status == OrderStatus::Prepared) orch->terminate(id);
        }
        CHECK(orch->infrastructure().reservations.empty());
    }
}

TEST_CASE("a data directory survives a restart") {
    const fs::path dir = fresh_data_dir("restart");
    Rng rng(101);
    json live;
    std::size_t events = 0;
    {
        auto orch = open_data_dir(dir.string(), stepping_clock(0));
        random_session(*orch, rng, 80);
        live = orch->snapshot();
        events = orch->events().size();
    }
    CHECK(fs::exists(dir / "events.ndjson"));
    CHECK(EventLog::read((dir / "events.ndjson").string()).size() == events);
    if (events >= 50) CHECK(fs::exists(dir / "snapshot.json"));
    auto reopened = open_data_dir(dir.string(), stepping_clock(0));
    CHECK(reopened->snapshot() == live);
    CHECK(reopened->events().size() == events);
    fs::remove_all(dir);
}

TEST_CASE("event records round-trip") {
    const PipelineEvent e{7, "ord-000003", Stage::Scaled, {{"from_il", "nslil-4"}}, 12};
    CHECK(event_from_json(to_json(e)) == e);
    for (Stage s : {Stage::Ordered, Stage::Designed, Stage::Admitted, Stage::Rejected, Stage::Reserved,
                    Stage::Prepared, Stage::Active, Stage::Simulated, Stage::Scaled, Stage::Degraded,
                    Stage::Terminated}) {
        CHECK(stage_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(stage_from_string("NOPE"), ParseError);
}

TEST_CASE("configuration parsing") {
    const auto cfg = load_config(fixtures_dir() + "/config.json");
    CHECK(cfg.overbooking_factor == 1.5);
    CHECK(cfg.lifecycle.priority.priority_for("embb") == 7);
    CHECK(cfg.lifecycle.priority.priority_for("other") == 5);
    CHECK(cfg.profile.hourly_load[19] == 1.0);
    CHECK(config_from_json(json::object()).snapshot_every == 50);
    CHECK_THROWS_AS(config_from_json({{"hysteresis", 1.0}}), ParseError);
    CHECK_THROWS_AS(config_from_json({{"priority", {{"by_template", {{"x", 12}}}}}}), ParseError);
}
