// ============================================================================
// tests/test_zonereach.cpp — symbolic reachability and witness extraction
// ============================================================================

#include "pdtn/region.hpp"
#include "pdtn/zonereach.hpp"

#include "support/corpus.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace pdtn;

namespace {

ParamValuation p_is(long long v) {
    ParamValuation pv;
    pv.assignment["p"] = v;
    return pv;
}

}  // namespace

TEST_CASE("async-read reachability") {
    GuardedPTA m = corpus::fig1_model();

    SECTION("error reachable at p=1, n=3 with a replayable witness") {
        ReachResult r = reach(m, p_is(1), 3, Goal::location("error"));
        REQUIRE(r.status == ReachStatus::Reachable);
        REQUIRE(r.witness.has_value());
        GuardedPTA conc = valuate(m, p_is(1));
        Configuration fin = replay(*r.witness, conc, 3);
        CHECK(goal_holds(Goal::location("error"), fin, conc));
    }
    SECTION("all-in-error stays unreachable at p=1, n=3") {
        PropertyAst all_err = parse_property(
            "#init = 0 & #listen = 0 & #post = 0 & #reading = 0 & #done = 0");
        ReachResult r = reach(m, p_is(1), 3, Goal::prop(all_err));
        CHECK(r.status == ReachStatus::Unreachable);
        CHECK_FALSE(r.witness.has_value());
    }
    SECTION("the initial location yields an empty witness") {
        ReachResult r = reach(m, p_is(1), 2, Goal::location("init"));
        REQUIRE(r.status == ReachStatus::Reachable);
        REQUIRE(r.witness.has_value());
        CHECK(r.witness->steps.empty());
    }
    SECTION("budget exhaustion is a value with the explored count") {
        ReachOptions o;
        o.state_budget = 4;
        ReachResult r = reach(m, p_is(1), 3, Goal::location("error"), o);
        CHECK(r.status == ReachStatus::BudgetExceeded);
        CHECK(r.explored == 4);
    }
}

TEST_CASE("zone engine agrees with the region oracle") {
    corpus::Rng rng(103);
    int agree = 0, total = 0;
    for (int i = 0; i < 100; ++i) {
        GuardedPTA m = corpus::random_valuated_model(rng);
        Goal g = Goal::location(
            m.locations[static_cast<std::size_t>(corpus::pick(
                rng, 0, static_cast<long long>(m.locations.size()) - 1))]);
        for (int n = 1; n <= 3; ++n) {
            ReachOptions o;
            o.state_budget = 200000;
            ReachResult zr = reach(m, ParamValuation{}, n, g, o);
            OracleResult orr = region_reach_oracle(m, n, g, 500000);
            if (zr.status == ReachStatus::BudgetExceeded ||
                orr.status == ReachStatus::BudgetExceeded)
                continue;
            ++total;
            if (zr.status == orr.status) ++agree;
        }
    }
    CHECK(agree == total);
    CHECK(total >= 250);
}

TEST_CASE("the engines also agree on property goals") {
    corpus::Rng rng(107);
    int agree = 0, total = 0;
    for (int i = 0; i < 60; ++i) {
        GuardedPTA m = corpus::random_valuated_model(rng);
        auto some_loc = [&]() {
            return m.locations[static_cast<std::size_t>(
                corpus::pick(rng, 0, static_cast<long long>(m.locations.size()) - 1))];
        };
        PropertyAst a = corpus::chance(rng, 50) ? PropertyAst::at_least_one(some_loc())
                                                : PropertyAst::none_in(some_loc());
        PropertyAst b = corpus::chance(rng, 50) ? PropertyAst::at_least_one(some_loc())
                                                : PropertyAst::none_in(some_loc());
        PropertyAst phi;
        phi.kind = corpus::chance(rng, 50) ? PropertyAst::Kind::And : PropertyAst::Kind::Or;
        phi.children = {a, b};
        Goal g = Goal::prop(phi);
        int n = static_cast<int>(corpus::pick(rng, 1, 3));
        ReachOptions o;
        o.state_budget = 200000;
        ReachResult zr = reach(m, ParamValuation{}, n, g, o);
        OracleResult orr = region_reach_oracle(m, n, g, 500000);
        if (zr.status == ReachStatus::BudgetExceeded ||
            orr.status == ReachStatus::BudgetExceeded)
            continue;
        ++total;
        if (zr.status == orr.status) ++agree;
        if (zr.status == ReachStatus::Reachable) {
            Configuration fin = replay(*zr.witness, m, n);
            CHECK(goal_holds(g, fin, m));
        }
    }
    CHECK(agree == total);
    CHECK(total >= 50);
}

TEST_CASE("subsumption and symmetry do not change answers") {
    corpus::Rng rng(109);
    for (int i = 0; i < 120; ++i) {
        GuardedPTA m = corpus::random_valuated_model(rng);
        Goal g = Goal::location(m.locations.back());
        int n = static_cast<int>(corpus::pick(rng, 1, 3));
        ReachResult base = reach(m, ParamValuation{}, n, g);

        ReachOptions no_sub;
        no_sub.subsumption = false;
        CHECK(reach(m, ParamValuation{}, n, g, no_sub).status == base.status);

        ReachOptions sym;
        sym.symmetry = true;
        ReachResult rs = reach(m, ParamValuation{}, n, g, sym);
        CHECK(rs.status == base.status);
        if (rs.status == ReachStatus::Reachable) {
            Configuration fin = replay(*rs.witness, m, n);
            CHECK(goal_holds(g, fin, m));
        }
    }
}

TEST_CASE("extrapolation constant k and k+1 give the same answers") {
    corpus::Rng rng(113);
    for (int i = 0; i < 120; ++i) {
        GuardedPTA m = corpus::random_valuated_model(rng);
        Goal g = Goal::location(m.locations.back());
        int n = static_cast<int>(corpus::pick(rng, 1, 3));
        ReachResult base = reach(m, ParamValuation{}, n, g);
        ReachOptions bumped;
        bumped.extrapolation_const = compile_model(m).max_abs_const + 1;
        CHECK(reach(m, ParamValuation{}, n, g, bumped).status == base.status);
    }
}

TEST_CASE("reachability is monotone in the network size") {
    corpus::Rng rng(127);
    int reachable_cases = 0;
    for (int i = 0; i < 150; ++i) {
        GuardedPTA m = corpus::random_valuated_model(rng);
        Goal g = Goal::location(m.locations.back());
        for (int n = 1; n <= 3; ++n) {
            if (reach(m, ParamValuation{}, n, g).status != ReachStatus::Reachable) continue;
            ++reachable_cases;
            CHECK(reach(m, ParamValuation{}, n + 1, g).status == ReachStatus::Reachable);
            break;
        }
    }
    CHECK(reachable_cases > 40);
}

TEST_CASE("every witness replays and hits the goal") {
    corpus::Rng rng(131);
    int witnesses = 0;
    for (int i = 0; i < 150; ++i) {
        GuardedPTA m = corpus::random_valuated_model(rng);
        Goal g = Goal::location(m.locations.back());
        int n = static_cast<int>(corpus::pick(rng, 1, 3));
        ReachResult r = reach(m, ParamValuation{}, n, g);
        if (r.status != ReachStatus::Reachable) continue;
        ++witnesses;
        REQUIRE(r.witness.has_value());
        Configuration fin = replay(*r.witness, m, n);
        CHECK(goal_holds(g, fin, m));
    }
    CHECK(witnesses > 40);
}

TEST_CASE("extract_trace_time") {
    SECTION("empty trace") {
        GuardedPTA m = corpus::fig1_model();
        GuardedPTA conc = valuate(m, p_is(1));
        auto [total, max_clock] = extract_trace_time(Trace{}, conc, 2);
        CHECK(total == Rat(0));
        CHECK(max_clock == Rat(0));
    }
    SECTION("a single delay on an unconstrained model") {
        GuardedPTA m;
        m.name = "free";
        m.clocks = {"x"};
        m.actions = {"a"};
        m.locations = {"A"};
        m.initial = "A";
        Trace t;
        t.steps.push_back(TimedStep::make_delay(Rat(3)));
        auto [total, max_clock] = extract_trace_time(t, m, 1);
        CHECK(total == Rat(3));
        CHECK(max_clock == Rat(3));
    }
    SECTION("the async-read witness must climb past the parametric guard") {
        GuardedPTA m = corpus::fig1_model();
        ReachResult r = reach(m, p_is(1), 3, Goal::location("error"));
        REQUIRE(r.witness.has_value());
        GuardedPTA conc = valuate(m, p_is(1));
        auto [total, max_clock] = extract_trace_time(*r.witness, conc, 3);
        CHECK(max_clock > Rat(1));  // some clock exceeded p = 1 to fire the error edge
        CHECK(total >= max_clock);
    }
}
