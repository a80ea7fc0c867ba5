// ============================================================================
// tests/test_dbm.cpp — difference-bound matrix algebra
// ============================================================================

#include "pdtn/dbm.hpp"

#include "support/corpus.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace pdtn;

TEST_CASE("raw bound encoding") {
    using namespace dbmraw;
    corpus::Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        long long v = corpus::pick(rng, -20, 20);
        bool strict = corpus::chance(rng, 50);
        raw_t r = make(v, strict);
        CHECK(value_of(r) == v);
        CHECK(strict_of(r) == strict);
    }
    // (c, <) is tighter than (c, <=) which is tighter than (c+1, <)
    CHECK(make(3, true) < make(3, false));
    CHECK(make(3, false) < make(4, true));
    // sum carries strictness
    raw_t s = add(make(2, false), make(3, true));
    CHECK(value_of(s) == 5);
    CHECK(strict_of(s));
    CHECK(add(make(2, false), kInf) >= kInf);
}

TEST_CASE("canonicalize is idempotent on random DBMs") {
    corpus::Rng rng(5);
    int nonempty = 0;
    for (int i = 0; i < 1000; ++i) {
        int dim = static_cast<int>(corpus::pick(rng, 2, 5));
        Dbm d = Dbm::universe(dim);
        int k = static_cast<int>(corpus::pick(rng, 0, 8));
        for (int c = 0; c < k; ++c) {
            int a = static_cast<int>(corpus::pick(rng, 0, dim - 1));
            int b = static_cast<int>(corpus::pick(rng, 0, dim - 1));
            if (a == b) continue;
            d.tighten(a, b, corpus::pick(rng, -4, 6), corpus::chance(rng, 40));
        }
        d.canonicalize();
        Dbm once = d;
        once.canonicalize();
        CHECK(once == d);
        if (!d.empty()) ++nonempty;
    }
    CHECK(nonempty > 300);
}

TEST_CASE("up of the zero zone constrained by x <= 1") {
    // two clocks: the diagonal stays, both clocks capped at 1
    Dbm d = Dbm::zero(3);
    d.up();
    d.tighten(1, 0, 1, false);
    d.canonicalize();
    REQUIRE_FALSE(d.empty());
    CHECK(d.at(1, 2).value == 0);  // x1 - x2 <= 0
    CHECK(d.at(2, 1).value == 0);  // x2 - x1 <= 0
    CHECK(d.at(1, 0).value == 1);
    CHECK(d.at(2, 0).value == 1);  // equality propagates the cap
    CHECK(d.at(0, 1).value == 0);
}

TEST_CASE("reset then constrain to zero is a fixpoint") {
    corpus::Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        Dbm d = Dbm::universe(4);
        for (int c = 0; c < 5; ++c) {
            int a = static_cast<int>(corpus::pick(rng, 0, 3));
            int b = static_cast<int>(corpus::pick(rng, 0, 3));
            if (a != b) d.tighten(a, b, corpus::pick(rng, -2, 5), corpus::chance(rng, 30));
        }
        d.canonicalize();
        if (d.empty()) continue;
        d.reset_clock(2);
        Dbm constrained = d;
        constrained.tighten(2, 0, 0, false);
        constrained.tighten(0, 2, 0, false);
        constrained.canonicalize();
        CHECK(constrained == d);
    }
}

TEST_CASE("inclusion") {
    Dbm zero = Dbm::zero(3);
    Dbm uni = Dbm::universe(3);
    CHECK(uni.includes(zero));
    CHECK_FALSE(zero.includes(uni));
    CHECK(zero.includes(zero));

    Dbm up = zero;
    up.up();
    CHECK(up.includes(zero));
    CHECK(uni.includes(up));
}

TEST_CASE("extrapolation widens and preserves emptiness") {
    corpus::Rng rng(13);
    for (int i = 0; i < 300; ++i) {
        Dbm d = Dbm::universe(4);
        for (int c = 0; c < 6; ++c) {
            int a = static_cast<int>(corpus::pick(rng, 0, 3));
            int b = static_cast<int>(corpus::pick(rng, 0, 3));
            if (a != b) d.tighten(a, b, corpus::pick(rng, -6, 9), corpus::chance(rng, 30));
        }
        d.canonicalize();
        Dbm widened = d;
        widened.extrapolate(3);
        CHECK(widened.includes(d));  // widening only grows the zone
        if (!d.empty()) CHECK_FALSE(widened.empty());
    }
}

TEST_CASE("permutation round-trip") {
    Dbm d = Dbm::universe(4);
    d.tighten(1, 0, 5, false);
    d.tighten(2, 0, 7, true);
    d.tighten(3, 2, 1, false);
    d.canonicalize();
    std::vector<int> swap_12 = {0, 2, 1, 3};
    Dbm p = d.permuted(swap_12);
    CHECK_FALSE(p == d);
    CHECK(p.permuted(swap_12) == d);
    CHECK(p.at(2, 0).value == 5);
    CHECK(p.at(1, 0).value == 7);
}
