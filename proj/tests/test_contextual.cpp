#include <cmath>
#include <random>

#include "doctest.h"
#include "tsm/contextual.hpp"

using namespace tsm;

namespace {

std::vector<double> as_std(const Vec& x) { return {x.data(), x.data() + x.size()}; }

}  // namespace

TEST_CASE("scale indices") {
    CHECK(scale_index(2.0) == -1);
    CHECK(scale_index(1.0) == 0);
    CHECK(scale_index(0.5) == 1);
    CHECK(scale_index(0.3) == 1);
    CHECK(scale_index(0.25) == 2);
    CHECK(scale_index(0.0) == 60);
    CHECK(double_scale_index(2.0) == 0);
    CHECK(double_scale_index(0.3) == 0);
    CHECK(double_scale_index(0.25) == 1);
    CHECK(double_scale_index(1.0 / 16) == 2);
    CHECK(double_scale_index(1e-300) == 6);
}

TEST_CASE("generated feature vectors keep types in the unit interval") {
    std::mt19937_64 rng(71);
    for (int r = 0; r < 200; ++r) {
        const auto ci = random_contextual_instance(3, 2, 2, rng);
        CHECK_NOTHROW(ci.validate());
        const Instance in = ci.at(random_orthant_point(3, rng));
        CHECK_NOTHROW(in.validate());
    }
}

TEST_CASE("steiner gft: symmetric first price and stable repeats") {
    SteinerGft L(3);
    const Vec x = Vec::Unit(3, 0);
    const auto p1 = L.propose(as_std(x));
    CHECK(L.last_scale() == -1);
    CHECK(L.last_width() == doctest::Approx(2).epsilon(1e-6));
    CHECK(p1.p <= 0.03);  // sampled median of a ball around the origin, clamped at 0
    L.observe(Feedback{{0}, {0}});
    const auto p2 = L.propose(as_std(x));
    L.observe(Feedback{{0}, {0}});
    const auto p3 = L.propose(as_std(x));
    CHECK(p2.p == p3.p);
}

TEST_CASE("two opposite cuts leave a slab") {
    ConvexBody b(2);
    b.cut_le(Vec::Unit(2, 0), 0.0);
    b.cut_ge(Vec::Unit(2, 0), -0.25);
    CHECK(width(b, Vec::Unit(2, 0), 1e-8) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("steiner gft: truth stays in the body and regret is bounded by the width") {
    std::mt19937_64 rng(72);
    for (int r = 0; r < 4; ++r) {
        const auto ci = random_contextual_instance(2, 1, 1, rng);
        SteinerGft L(2, {4000, static_cast<uint64_t>(r)});
        for (int t = 0; t < 150; ++t) {
            const Vec x = random_orthant_point(2, rng);
            const Instance in = ci.at(x);
            const auto o = apply_mechanism(in, L.propose(as_std(x)));
            CHECK(round_regret(Objective::Gft, in, o) <= L.last_width() + 1e-9);
            L.observe(o.feedback);
            REQUIRE(L.body().contains(ci.sellers[0], 1e-8));
            REQUIRE(L.body().contains(ci.buyers[0], 1e-8));
        }
    }
}

TEST_CASE("robust segmented prices") {
    const auto r = robust_segmented_prices({0.2, 0.7}, {0.9, 0.1});
    CHECK(r.sellers == std::vector<int>{0});
    CHECK(r.buyers == std::vector<int>{0});
    CHECK(r.profile.seller_price(0) == 0.2);
    CHECK(r.profile.buyer_price(0) == 0.9);
    CHECK_NOTHROW(r.profile.validate(2, 2));
}

TEST_CASE("robust prices lose at most 2n delta") {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> U;
    for (int r = 0; r < 3000; ++r) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const double delta = std::pow(10.0, -1 - 3 * U(rng));
        Instance in;
        std::vector<double> c_hi, v_lo;
        for (int i = 0; i < n; ++i) {
            in.costs.push_back(U(rng));
            in.values.push_back(U(rng));
            c_hi.push_back(std::min(1.0, in.costs[i] + delta * U(rng)));
            v_lo.push_back(std::max(0.0, in.values[i] - delta * U(rng)));
        }
        const auto rp = robust_segmented_prices(c_hi, v_lo);
        REQUIRE_NOTHROW(rp.profile.validate(n, n));
        const auto o = apply_mechanism(in, rp.profile);
        CHECK(round_regret(Objective::Gft, in, o) <= 2 * n * delta + 1e-12);
    }
}

TEST_CASE("ellipsoid search: first round explores the first seller") {
    EllipsoidSearch L(2, 2, 2, 1000);
    const Vec x = Vec::Constant(2, std::sqrt(0.5));
    const auto p = L.propose(as_std(x));
    CHECK_FALSE(L.last_exploit());
    CHECK(p.kind == ProfileKind::Single);
    CHECK(p.p == 0.0);
    L.observe(Feedback{{1, 1}, {1, 1}});
    CHECK(L.explorations()[0] == 1);
}

TEST_CASE("ellipsoid search: exploitation posts robust prices from the ellipsoids") {
    std::mt19937_64 rng(74);
    const auto ci = random_contextual_instance(2, 2, 2, rng);
    const uint64_t T = 50;
    EllipsoidSearch L(2, 2, 2, T);
    int exploits = 0;
    for (uint64_t t = 0; t < 20000 && exploits < 20; ++t) {
        const Vec x = random_orthant_point(2, rng);
        const Instance in = ci.at(x);
        const auto prof = L.propose(as_std(x));
        const auto o = apply_mechanism(in, prof);
        if (L.last_exploit()) {
            ++exploits;
            std::vector<double> c_hi, v_lo;
            for (int i = 0; i < 2; ++i) c_hi.push_back(ellipsoid_support(L.seller(i), x));
            for (int j = 0; j < 2; ++j) v_lo.push_back(-ellipsoid_support(L.buyer(j), -x));
            const auto rp = robust_segmented_prices(c_hi, v_lo).profile;
            for (int i = 0; i < 2; ++i) CHECK(prof.seller_price(i) == rp.seller_price(i));
            for (int j = 0; j < 2; ++j) CHECK(prof.buyer_price(j) == rp.buyer_price(j));
            CHECK(round_regret(Objective::Gft, in, o) <= 2.0 * 2 / T + 1e-12);
        }
        L.observe(o.feedback);
        for (int i = 0; i < 2; ++i) REQUIRE(L.seller(i).contains(ci.sellers[i], 1e-6));
        for (int j = 0; j < 2; ++j) REQUIRE(L.buyer(j).contains(ci.buyers[j], 1e-6));
    }
    CHECK(exploits == 20);
    for (int k : L.explorations()) CHECK(k <= exploration_bound(2, 1.0, 1.0 / T));
}

TEST_CASE("steiner profit: containment and the fallback bound") {
    std::mt19937_64 rng(75);
    const auto ci = random_contextual_instance(2, 2, 2, rng);
    SteinerProfit L(2, 2, 1000, {3000, 5});
    for (int t = 0; t < 80; ++t) {
        const Vec x = random_orthant_point(2, rng);
        const Instance in = ci.at(x);
        const auto prof = L.propose(as_std(x));
        REQUIRE_NOTHROW(prof.validate(2, 2));
        const auto& info = L.last_round();
        if (info.fallback)
            CHECK(profit_star(in).value <= 2.0 * info.k_star * (info.width_i + info.width_j) + 1e-9);
        for (int i = 0; i < 2; ++i) {
            CHECK(L.c_lo[i] <= in.costs[i] + 1e-9);
            CHECK(in.costs[i] <= L.c_hi[i] + 1e-9);
            CHECK(L.v_lo[i] <= in.values[i] + 1e-9);
            CHECK(in.values[i] <= L.v_hi[i] + 1e-9);
        }
        L.observe(apply_mechanism(in, prof).feedback);
        for (int i = 0; i < 2; ++i) REQUIRE(L.seller(i).contains(ci.sellers[i], 1e-8));
        for (int j = 0; j < 2; ++j) REQUIRE(L.buyer(j).contains(ci.buyers[j], 1e-8));
    }
}
