#include <doctest.h>

#include <atomic>
#include <barrier>
#include <thread>

#include "support/scenario.hpp"

using namespace nsl;
using namespace nsl::testkit;

namespace {

InfrastructureMap pops(int n, ResourceVector cap) {
    InfrastructureMap m;
    for (int i = 0; i < n; ++i) m.pops.push_back({"p" + std::to_string(i + 1), "R", {}, cap, ""});
    return m;
}

Reservation booking(const std::string& pop, ResourceVector amount, TimeWindow w, ReservationMode mode) {
    Reservation r;
    r.order_id = "o-" + pop;
    r.resource_id = pop;
    r.amount = amount;
    r.window = w;
    r.mode = mode;
    return r;
}

}  // namespace

TEST_CASE("exact optimizers match the exhaustive minimum and each other") {
    Rng rng(61);
    int solved = 0;
    for (int trial = 0; trial < 120; ++trial) {
        ScenarioParams p;
        p.max_pops = 5;
        p.max_instances = 6;
        p.max_links = 2;
        const auto map = random_infra(rng, p);
        const auto spec = random_spec(rng, p);
        const auto run = admit_scenario(spec, map);
        if (!run.verdict.admitted) continue;
        ++solved;
        const auto problem = PlacementProblem::build(map, *run.verdict.request);
        REQUIRE(in_exact_regime(problem));
        const auto oracle = oracle_problem(map, spec, spec.levels);
        const Objective obj = random_objective(rng, map);
        const auto best = oracle_min_cost(oracle, obj);
        REQUIRE(best.has_value());

        const auto serial = optimize_exact_serial(problem, obj);
        const auto parallel = optimize_exact_parallel(problem, obj);
        REQUIRE(serial.has_value());
        REQUIRE(parallel.has_value());
        CHECK(serial->cost == *best);
        CHECK(parallel->cost == serial->cost);
        CHECK(parallel->placement.assign == serial->placement.assign);
        CHECK(parallel->placement.routing.path_choice == serial->placement.routing.path_choice);

        const auto sol = problem.to_solution(serial->placement.assign, serial->placement.routing);
        CHECK_FALSE(oracle_check(oracle, sol).has_value());
        CHECK(oracle_cost(oracle, obj, sol) == *best);
        CHECK(solution_cost(*run.verdict.request, obj, sol) == *best);

        const auto heuristic = optimize_heuristic(problem, obj);
        REQUIRE(heuristic.has_value());
        const auto hsol = problem.to_solution(heuristic->placement.assign, heuristic->placement.routing);
        CHECK_FALSE(oracle_check(oracle, hsol).has_value());
        CHECK(heuristic->cost >= *best);

        const auto chosen = optimize(map, *run.verdict.request, obj);
        CHECK_FALSE(oracle_check(oracle, chosen).has_value());
        CHECK(oracle_cost(oracle, obj, chosen) == *best);
    }
    CHECK(solved > 40);
}

TEST_CASE("a unique feasible placement is returned for any objective") {
    ScenarioSpec s;
    s.groups.push_back({1, {2, 4, 10}, {}, 0, false});
    const auto map = pops(1, {8, 32, 100});
    const auto run = admit_scenario(s, map);
    REQUIRE(run.verdict.admitted);
    for (auto kind : {ObjectiveKind::MinResource, ObjectiveKind::MinEnergy}) {
        Objective o;
        o.kind = kind;
        CHECK(optimize(map, *run.verdict.request, o) == *run.verdict.solution);
    }
}

TEST_CASE("minimum energy co-locates a pair") {
    ScenarioSpec s;
    s.groups.push_back({2, {2, 4, 10}, {}, 0, false});
    const auto map = pops(2, {8, 32, 100});
    const auto run = admit_scenario(s, map);
    REQUIRE(run.verdict.admitted);
    Objective o;
    o.kind = ObjectiveKind::MinEnergy;
    const auto sol = optimize(map, *run.verdict.request, o);
    CHECK(sol.assignment.at({group_key(0), 0}) == sol.assignment.at({group_key(0), 1}));
    CHECK(solution_cost(*run.verdict.request, o, sol).pops == 1);
}

TEST_CASE("preferred PoPs are free") {
    ScenarioSpec s;
    s.groups.push_back({1, {2, 4, 10}, {}, 0, false});
    const auto map = pops(3, {8, 32, 100});
    const auto run = admit_scenario(s, map);
    Objective o;
    o.preferred_pops = {"p3"};
    const auto sol = optimize(map, *run.verdict.request, o);
    CHECK(sol.assignment.at({group_key(0), 0}) == "p3");
    CHECK(solution_cost(*run.verdict.request, o, sol).resource == 0);
    Objective bad;
    bad.weights = {0, 1, 1};
    CHECK_THROWS_AS(bad.validate(), InvalidRequest);
}

TEST_CASE("reserving one instance books one HARD reservation for its window only") {
    ScenarioSpec s;
    s.groups.push_back({1, {2, 4, 10}, {}, 0, false});
    s.windows.push_back({100, 200, Recurrence::Once});
    const auto map = pops(1, {8, 32, 100});
    auto run = admit_scenario(s, map);
    REQUIRE(run.verdict.admitted);
    ResourceOrchestrator ledger(map);
    const auto booked = reserve(ledger, run.order, *run.verdict.request, *run.verdict.solution, ReservationMode::Hard);
    REQUIRE(booked.size() == 1);
    CHECK(booked[0].mode == ReservationMode::Hard);
    CHECK(booked[0].amount == ResourceVector{2, 4, 10});
    CHECK(booked[0].id == "res-000001");
    CHECK(run.order.status == OrderStatus::Reserved);
    const auto after = ledger.snapshot();
    CHECK(residual_capacity(after, "p1", {100, 200, Recurrence::Once}) == ResourceVector{6, 28, 90});
    CHECK(residual_capacity(after, "p1", {0, 100, Recurrence::Once}) == ResourceVector{8, 32, 100});
    CHECK(residual_capacity(after, "p1", {200, 300, Recurrence::Once}) == ResourceVector{8, 32, 100});

    CHECK(ledger.release("ord-1") == 1);
    CHECK(ledger.snapshot() == map);
}

TEST_CASE("two SOFT bookings of 4 vcpu fit on 6 with factor 1.5") {
    const TimeWindow w{0, 60, Recurrence::Once};
    ResourceOrchestrator ledger(pops(1, {6, 12, 60}));
    CHECK_NOTHROW(ledger.commit({booking("p1", {4, 4, 4}, w, ReservationMode::Soft)}));
    CHECK_NOTHROW(ledger.commit({booking("p1", {4, 4, 4}, w, ReservationMode::Soft)}));
    CHECK_THROWS_AS(ledger.commit({booking("p1", {4, 4, 4}, w, ReservationMode::Soft)}), CapacityRaced);
    CHECK(ledger.snapshot().reservations.size() == 2);

    ResourceOrchestrator hard(pops(1, {6, 12, 60}));
    CHECK_NOTHROW(hard.commit({booking("p1", {4, 4, 4}, w, ReservationMode::Hard)}));
    CHECK_THROWS_AS(hard.commit({booking("p1", {4, 4, 4}, w, ReservationMode::Hard)}), CapacityRaced);
}

TEST_CASE("commits are all or none") {
    const TimeWindow w{0, 60, Recurrence::Once};
    ResourceOrchestrator ledger(pops(2, {4, 4, 4}));
    CHECK_THROWS_AS(ledger.commit({booking("p1", {1, 1, 1}, w, ReservationMode::Hard),
                                   booking("p2", {9, 1, 1}, w, ReservationMode::Hard)}),
                    CapacityRaced);
    CHECK(ledger.snapshot().reservations.empty());
    CHECK(ledger.issued() == 0);
}

TEST_CASE("two orders racing for the last capacity: one wins") {
    for (int round = 0; round < 50; ++round) {
        ScenarioSpec s;
        s.groups.push_back({1, {6, 6, 6}, {}, 0, false});
        const auto map = pops(1, {8, 8, 8});
        auto a = admit_scenario(s, map);
        auto b = admit_scenario(s, map);
        b.order.id = "ord-2";
        REQUIRE(a.verdict.admitted);
        REQUIRE(b.verdict.admitted);
        ResourceOrchestrator ledger(map);
        std::barrier sync(2);
        std::atomic<int> wins = 0, raced = 0;
        auto contender = [&](ScenarioRun& r) {
            sync.arrive_and_wait();
            try {
                reserve(ledger, r.order, *r.verdict.request, *r.verdict.solution, ReservationMode::Hard);
                ++wins;
            } catch (const CapacityRaced&) {
                ++raced;
            }
        };
        std::thread ta(contender, std::ref(a)), tb(contender, std::ref(b));
        ta.join();
        tb.join();
        CHECK(wins == 1);
        CHECK(raced == 1);
        const int reserved = (a.order.status == OrderStatus::Reserved) + (b.order.status == OrderStatus::Reserved);
        const int redesign = (a.order.status == OrderStatus::Designed) + (b.order.status == OrderStatus::Designed);
        CHECK(reserved == 1);
        CHECK(redesign == 1);
        CHECK(ledger_violations(ledger.snapshot()).empty());
    }
}

TEST_CASE("replace swaps an order's bookings atomically") {
    const TimeWindow w{0, 60, Recurrence::Once};
    ResourceOrchestrator ledger(pops(1, {8, 8, 8}));
    auto first = booking("p1", {6, 6, 6}, w, ReservationMode::Hard);
    first.order_id = "o";
    ledger.commit({first});
    auto bigger = first;
    bigger.amount = {8, 8, 8};
    CHECK_NOTHROW(ledger.replace("o", {bigger}));
    CHECK(ledger.reservations_of("o").at(0).amount == ResourceVector{8, 8, 8});
    auto too_big = first;
    too_big.amount = {9, 8, 8};
    CHECK_THROWS_AS(ledger.replace("o", {too_big}), CapacityRaced);
    CHECK(ledger.reservations_of("o").at(0).amount == ResourceVector{8, 8, 8});
}

TEST_CASE("utilization table lists each PoP and window") {
    ResourceOrchestrator ledger(pops(1, {8, 8, 8}));
    ledger.commit({booking("p1", {2, 2, 2}, {0, kForeverMinutes, Recurrence::Once}, ReservationMode::Hard)});
    const std::string table = utilization_table(ledger.snapshot());
    CHECK(table.find("p1") != std::string::npos);
    CHECK(table.find("inf") != std::string::npos);
}
