// ============================================================================
// tests/test_twocm.cpp — 2-counter machines and their encodings
// ============================================================================

#include "pdtn/twocm.hpp"
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

ReachOptions fast() {
    ReachOptions o;
    o.symmetry = true;
    return o;
}

const char* kIncHalt = "inc 1 s0 s1\nhalt s1\n";
const char* kTwoIncs = "inc 1 s0 s1\ninc 1 s1 s2\nhalt s2\n";
const char* kLoop = "inc 1 s0 s1\nzdec 1 s1 s0 s0\nhalt h\n";

}  // namespace

TEST_CASE("run_2cm") {
    SECTION("one increment then halt") {
        RunResult r = run_2cm(parse_machine(kIncHalt), 100);
        CHECK(r.halted);
        CHECK(r.steps == 1);
        CHECK(r.c_max == 1);
        REQUIRE(r.trail.size() == 2);
        CHECK(r.trail[1].c1 == 1);
    }
    SECTION("a divergent increment loop hits the cutoff") {
        RunResult r = run_2cm(parse_machine("inc 1 s0 s0\nhalt h\n"), 100);
        CHECK_FALSE(r.halted);
        CHECK(r.steps == 100);
        CHECK(r.c_max == 100);
    }
    SECTION("zero test on an empty counter") {
        RunResult r = run_2cm(parse_machine("zdec 1 s0 s0 h\nhalt h\n"), 100);
        CHECK(r.halted);
        CHECK(r.steps == 1);
        CHECK(r.c_max == 0);
    }
}

TEST_CASE("single-automaton encoding") {
    MachineProgram prog = parse_machine(kTwoIncs);
    Compiled2cm enc = compile_single_pta(prog);

    SECTION("shape: 3 clocks, 1 parameter, no guards on locations") {
        CHECK(enc.model.clocks == std::vector<std::string>{"t", "x1", "x2"});
        CHECK(enc.model.params == std::vector<std::string>{"p"});
        for (const auto& e : enc.model.edges) CHECK_FALSE(e.locguard.has_value());
        for (const auto& l : enc.model.locations)
            CHECK(enc.model.invariant_of(l).is_true());
        CHECK(enc.target == "s_s2");
        CHECK(validate(enc.model).empty());
    }
    SECTION("halts iff the parameter dominates the counters and 1") {
        CHECK(reach(enc.model, p_is(3), 1, Goal::location(enc.target), fast()).status ==
              ReachStatus::Reachable);
        // the boot edge requires t = p and t > 1 together
        CHECK(reach(enc.model, p_is(1), 1, Goal::location(enc.target), fast()).status ==
              ReachStatus::Unreachable);
    }
    SECTION("a looping machine never reaches the halt location") {
        Compiled2cm loop = compile_single_pta(parse_machine(kLoop));
        for (long long p = 2; p <= 5; ++p)
            CHECK(reach(loop.model, p_is(p), 1, Goal::location(loop.target), fast()).status ==
                  ReachStatus::Unreachable);
    }
}

TEST_CASE("three-process encoding") {
    MachineProgram prog = parse_machine(kIncHalt);

    for (bool inv : {false, true}) {
        DYNAMIC_SECTION("invariants=" << inv) {
            Compiled2cm enc = compile_three_process(prog, inv);
            CHECK(enc.model.clocks == std::vector<std::string>{"x"});
            CHECK(enc.model.params == std::vector<std::string>{"p"});
            CHECK(validate(enc.model).empty());

            ReachResult r3 = reach(enc.model, p_is(2), 3, Goal::location(enc.target), fast());
            REQUIRE(r3.status == ReachStatus::Reachable);
            GuardedPTA conc = valuate(enc.model, p_is(2));
            Configuration fin = replay(*r3.witness, conc, 3);
            CHECK(goal_holds(Goal::location(enc.target), fin, conc));

            CHECK(reach(enc.model, p_is(2), 2, Goal::location(enc.target), fast()).status ==
                  ReachStatus::Unreachable);
        }
    }

    SECTION("the invariant-free variant is the invariant-full one minus invariants") {
        Compiled2cm with = compile_three_process(prog, true);
        Compiled2cm without = compile_three_process(prog, false);
        CHECK(with.model.locations == without.model.locations);
        CHECK(with.model.edges == without.model.edges);
        bool any_inv = false;
        for (const auto& l : with.model.locations)
            if (!with.model.invariant_of(l).is_true()) any_inv = true;
        CHECK(any_inv);
        for (const auto& l : without.model.locations)
            CHECK(without.model.invariant_of(l).is_true());
    }
}

TEST_CASE("fixed-size encoding") {
    MachineProgram prog = parse_machine(kIncHalt);

    SECTION("n = 3 degenerates to the three-process model") {
        Compiled2cm three = compile_three_process(prog, false);
        Compiled2cm fixed = compile_fixed_n(prog, 3);
        CHECK(fixed.model.locations == three.model.locations);
        CHECK(fixed.model.edges == three.model.edges);
        CHECK(fixed.target == three.target);
    }
    SECTION("n = 4 is reachable at 4 processes and not at 3") {
        Compiled2cm enc = compile_fixed_n(prog, 4);
        CHECK(reach(enc.model, p_is(3), 4, Goal::location(enc.target), fast()).status ==
              ReachStatus::Reachable);
        CHECK(reach(enc.model, p_is(3), 3, Goal::location(enc.target), fast()).status ==
              ReachStatus::Unreachable);
    }
    SECTION("n = 5 adds exactly two sink locations") {
        Compiled2cm three = compile_three_process(prog, false);
        Compiled2cm enc = compile_fixed_n(prog, 5);
        CHECK(enc.model.locations.size() == three.model.locations.size() + 2);
        int sinks = 0;
        for (const auto& [loc, g] : enc.gadget_map)
            if (g.role == "sink") ++sinks;
        CHECK(sinks == 2);
    }
    SECTION("sizes below 3 are rejected") {
        CHECK_THROWS_AS(compile_fixed_n(prog, 2), std::invalid_argument);
    }
}

TEST_CASE("halting correspondence on a small battery") {
    for (const char* text : {kIncHalt, kTwoIncs, kLoop, "zdec 2 s0 s0 h\nhalt h\n"}) {
        MachineProgram prog = parse_machine(text);
        RunResult run = run_2cm(prog, 50);
        long long p = run.c_max + 2;

        Compiled2cm single = compile_single_pta(prog);
        CHECK((reach(single.model, p_is(p), 1, Goal::location(single.target), fast()).status ==
               ReachStatus::Reachable) == run.halted);

        for (bool inv : {false, true}) {
            Compiled2cm three = compile_three_process(prog, inv);
            CHECK((reach(three.model, p_is(p), 3, Goal::location(three.target), fast()).status ==
                   ReachStatus::Reachable) == run.halted);
        }
    }
}

TEST_CASE("instrumented replay checks the counter correspondence") {
    MachineProgram prog = parse_machine("inc 1 s0 s1\ninc 2 s1 s2\nzdec 1 s2 s3 s4\n"
                                        "zdec 1 s3 s3 s4\nhalt s4\n");
    RunResult run = run_2cm(prog, 50);
    REQUIRE(run.halted);
    long long p = run.c_max + 2;
    Compiled2cm enc = compile_single_pta(prog);
    ReachResult r = reach(enc.model, p_is(p), 1, Goal::location(enc.target), fast());
    REQUIRE(r.status == ReachStatus::Reachable);

    FidelityReport rep = check_single_pta_fidelity(enc, p, *r.witness, prog);
    INFO(rep.detail);
    CHECK(rep.ok);
    CHECK(rep.state_visits == static_cast<int>(run.trail.size()));
    CHECK(rep.increments_checked >= 2);

    SECTION("a tampered witness is flagged") {
        Trace bad = *r.witness;
        // stretch the first delay so the counter/clock correspondence breaks
        for (auto& s : bad.steps)
            if (s.kind == TimedStep::Kind::Delay) {
                s.delay += Rat(1, 2);
                break;
            }
        FidelityReport bad_rep = check_single_pta_fidelity(enc, p, bad, prog);
        CHECK_FALSE(bad_rep.ok);
    }
}
