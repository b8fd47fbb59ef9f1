#include <random>

#include "doctest.h"
#include "tsm/adversaries.hpp"
#include "tsm/bilateral.hpp"
#include "tsm/two_sided.hpp"

using namespace tsm;

TEST_CASE("adversary 1: a large first step is rejected") {
    Adversary1 A(1 << 20);
    const auto fb = A.respond(PriceProfile::single(0.95));
    CHECK(fb.sellers[0] == 1);
    CHECK(fb.buyer_count() == 0);
    CHECK(A.lo() == 0.9375);
    CHECK(A.hi() == doctest::Approx(0.9375 + 1.0 / 256).epsilon(1e-15));
}

TEST_CASE("adversary 1: repeating the last accepted price changes nothing") {
    Adversary1 A(1 << 20);
    const double lo = A.lo(), hi = A.hi();
    const auto fb = A.respond(PriceProfile::single(lo));
    CHECK(fb.buyer_count() == 2);
    CHECK(A.lo() == lo);
    CHECK(A.hi() == hi);
}

TEST_CASE("adversary 1: prices outside the interval are answered without moving it") {
    Adversary1 A(1 << 20);
    CHECK(A.respond(PriceProfile::single(0.2)).buyer_count() == 2);
    CHECK(A.lo() == 0.9375);
    CHECK(A.hi() == 1.0);
    A.respond(PriceProfile::single(0.99));  // pins hi to lo + 1/256
    const double hi = A.hi();
    CHECK(A.respond(PriceProfile::single(0.995)).buyer_count() == 0);
    CHECK(A.lo() == 0.9375);
    CHECK(A.hi() == hi);
    CHECK_THROWS_AS(A.respond(PriceProfile::two(0.1, 0.2)), Error);
}

TEST_CASE("adversary 1: transcripts replay on the final instance") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> U;
    for (int r = 0; r < 200; ++r) {
        Adversary1 A(1000);
        Transcript tr;
        for (int t = 0; t < 200; ++t) {
            // mix of in-interval probes and arbitrary prices
            const double p = U(rng) < 0.7 ? A.lo() + (A.hi() - A.lo()) * U(rng) : U(rng);
            const auto prof = PriceProfile::single(p);
            tr.push_back({prof, A.respond(prof)});
        }
        CHECK(audit_consistency(A.finalize(), tr));
    }
}

TEST_CASE("adversary 1 against the one-to-many learner is consistent") {
    const uint64_t T = 5000;
    Adversary1 A(T);
    OneToManySearch L(T);
    Transcript tr;
    for (uint64_t t = 0; t < T; ++t) {
        const auto prof = L.propose({});
        const auto fb = A.respond(prof);
        tr.push_back({prof, fb});
        L.observe(fb);
    }
    CHECK(audit_consistency(A.finalize(), tr));
}

TEST_CASE("adversary 1: raising the high value after a rejection breaks the replay") {
    Adversary1 A(1000);
    Transcript tr;
    for (double p : {0.5, 0.94, 0.95, 0.9401, 0.97}) {
        const auto prof = PriceProfile::single(p);
        tr.push_back({prof, A.respond(prof)});
    }
    const Instance fin = A.finalize();
    REQUIRE(fin.values[1] < 0.95);
    CHECK(audit_consistency(fin, tr));
    Instance bad = fin;
    bad.values[1] += 0.1;
    CHECK_FALSE(audit_consistency(bad, tr));
}

TEST_CASE("adversary 2: initial finalization") {
    Adversary2 A(100);
    const Instance in = A.finalize();
    CHECK(in.costs[1] == doctest::Approx(5.0 / 12));
    CHECK(in.costs[2] == doctest::Approx(5.0 / 12));
    CHECK(in.values[2] == doctest::Approx(7.0 / 12));
    CHECK(in.costs[0] == 0.0);
    CHECK(in.values[0] == 1.0);
}

TEST_CASE("adversary 2: a low seller price is taken by one seller") {
    Adversary2 A(100);
    const auto fb = A.respond(PriceProfile::two(0.3, 0.8));
    CHECK(fb.sellers == std::vector<uint8_t>{1, 0, 0});
    CHECK(A.p_bar() == 0.3);
    CHECK_THROWS_AS(A.respond(PriceProfile::two(0.6, 0.5)), Error);
}

TEST_CASE("adversary 2: unequal acceptance and quarter regret every round") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> U;
    for (int r = 0; r < 200; ++r) {
        Adversary2 A(300);
        Transcript tr;
        for (int t = 0; t < 300; ++t) {
            double p = U(rng), q = U(rng);
            if (p > q) std::swap(p, q);
            const auto prof = PriceProfile::two(p, q);
            const auto fb = A.respond(prof);
            CHECK(fb.seller_count() != fb.buyer_count());
            tr.push_back({prof, fb});
        }
        const Instance fin = A.finalize();
        REQUIRE(audit_consistency(fin, tr));
        for (const auto& e : tr)
            CHECK(round_regret(Objective::Gft, fin, apply_mechanism(fin, e.profile)) >= 0.25 - 1e-12);
    }
}

TEST_CASE("adversary 2 against the fictitious-profit learner") {
    const uint64_t T = 2000;
    Adversary2 A(T);
    FictitiousProfit L(3, T);
    Transcript tr;
    for (uint64_t t = 0; t < T; ++t) {
        auto prof = L.propose({});
        const auto fb = A.respond(prof);
        tr.push_back({prof, fb});
        L.observe(fb);
    }
    const Instance fin = A.finalize();
    CHECK(audit_consistency(fin, tr));
    double total = 0;
    for (const auto& e : tr) total += round_regret(Objective::Gft, fin, apply_mechanism(fin, e.profile));
    CHECK(total >= T / 4.0);
}
