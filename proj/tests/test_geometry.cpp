#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tsm/geometry.hpp"

using namespace tsm;

namespace {

Vec e(int d, int k) { return Vec::Unit(d, k); }

Vec random_unit(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    Vec v(d);
    for (int k = 0; k < d; ++k) v(k) = N(rng);
    return v.normalized();
}

// Distance from z to the half ball {|theta| <= 1, theta_1 <= 0}, in closed form.
double half_ball_distance(const Vec& z) {
    if (z(0) <= 0) return std::max(0.0, z.norm() - 1);
    Vec rest = z;
    rest(0) = 0;
    if (rest.norm() <= 1) return z(0);
    return (z - rest / rest.norm()).norm();
}

// Area of the half disk {theta_1 <= 0} on {theta_1 >= y}, by composite Simpson.
double half_disk_area_above(double y) {
    const int N = 20000;
    const double h = (0 - y) / N;
    auto f = [](double t) { return 2 * std::sqrt(std::max(0.0, 1 - t * t)); };
    double s = f(y) + f(0);
    for (int k = 1; k < N; ++k) s += (k % 2 ? 4 : 2) * f(y + k * h);
    return s * h / 3;
}

}  // namespace

TEST_CASE("widths of simple bodies") {
    for (int d : {1, 2, 3, 5}) {
        ConvexBody ball(d);
        std::mt19937_64 rng(d);
        CHECK(width(ball, random_unit(d, rng), 1e-8) == doctest::Approx(2).epsilon(1e-7));
    }
    ConvexBody half(3);
    half.cut_le(e(3, 0), 0.0);
    CHECK(width(half, e(3, 0), 1e-8) == doctest::Approx(1).epsilon(1e-7));
    ConvexBody cap(2);
    cap.cut_ge(e(2, 0), 0.5);
    CHECK(width(cap, e(2, 0), 1e-8) == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("support is an upper bound within tolerance") {
    std::mt19937_64 rng(61);
    ConvexBody half(3);
    half.cut_le(e(3, 0), 0.0);
    for (int r = 0; r < 200; ++r) {
        const Vec x = random_unit(3, rng);
        Vec rest = x;
        rest(0) = 0;
        const double truth = x(0) <= 0 ? 1.0 : rest.norm();
        const double s = half.support(x, 1e-7);
        CHECK(s >= truth - 1e-12);
        CHECK(s <= truth + 1e-7);
    }
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Planar support by candidates: x/|x|, line-circle and line-line intersections.
double planar_support(const ConvexBody& b, const Vec& x) {
    std::vector<Vec> cand{x.normalized()};
    const auto& hs = b.halfspaces();
    for (size_t i = 0; i < hs.size(); ++i) {
        const Vec& a = hs[i].a;
        const Vec t = v2(-a(1), a(0));
        const double r2 = 1 - hs[i].b * hs[i].b;
        if (r2 >= 0)
            for (double sgn : {-1.0, 1.0}) cand.push_back(hs[i].b * a + sgn * std::sqrt(r2) * t);
        for (size_t j = i + 1; j < hs.size(); ++j) {
            Mat M(2, 2);
            M << hs[i].a.transpose(), hs[j].a.transpose();
            if (std::abs(M.determinant()) < 1e-12) continue;
            cand.push_back(M.inverse() * v2(hs[i].b, hs[j].b));
        }
    }
    double best = -1e300;
    for (const auto& c : cand)
        if (b.contains(c, 1e-9)) best = std::max(best, x.dot(c));
    return best;
}

TEST_CASE("support agrees with a planar candidate oracle") {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(-0.6, 0.6);
    for (int r = 0; r < 300; ++r) {
        ConvexBody b(2);
        std::vector<Vec> normals;
        for (int k = 0; k < 6; ++k) {
            Vec a = v2(N(rng), N(rng));
            a.normalize();
            try {
                b.cut_le(a, U(rng));
                normals.push_back(a);
            } catch (const Error&) {
            }
        }
        // random directions and the cut normals themselves, where faces are flat
        std::vector<Vec> dirs = normals;
        for (int k = 0; k < 4; ++k) dirs.push_back(v2(N(rng), N(rng)));
        for (const auto& x : dirs) {
            const double s = b.support(x), o = planar_support(b, x);
            CHECK(s >= o - 1e-9);
            CHECK(s <= o + 1e-7);
        }
    }
}

TEST_CASE("cuts: redundant, effective and emptying") {
    ConvexBody b(2);
    CHECK_FALSE(b.cut_le(e(2, 0), 1.5));
    const auto v0 = b.version();
    CHECK(b.cut_le(e(2, 0), 0.2));
    CHECK(b.version() > v0);
    CHECK(b.contains(b.center()));
    CHECK(b.inradius() > 0);
    CHECK_FALSE(b.contains(Vec::Constant(2, 0.5)));
    try {
        b.cut_ge(e(2, 0), 0.9);
        CHECK(false);
    } catch (const Error& err) {
        CHECK(err.code() == Errc::EmptyBody);
    }
    CHECK(b.halfspaces().size() == 1);
    CHECK(b.contains(Vec::Zero(2)));
    CHECK(width(b, e(2, 0)) == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("padded membership matches the closed-form distance") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> U;
    for (int d : {2, 3, 4}) {
        ConvexBody half(d);
        half.cut_le(e(d, 0), 0.0);
        for (int r = 0; r < 2000; ++r) {
            const Vec z = random_unit(d, rng) * (1.6 * U(rng));
            const double rho = 0.3 * U(rng);
            const double dist = half_ball_distance(z);
            if (std::abs(dist - rho) < 1e-6) continue;
            CHECK(half.padded_member(z, rho) == (dist <= rho));
        }
    }
}

TEST_CASE("padded volume of balls") {
    const auto a = padded_volume_estimate(ConvexBody(2), 0.0, 200000, 3);
    CHECK(std::abs(a.value - std::numbers::pi) <= 3 * a.std_error);
    const auto b = padded_volume_estimate(ConvexBody(2), 0.5, 200000, 4);
    CHECK(std::abs(b.value - std::numbers::pi * 2.25) <= 3 * b.std_error);
    ConvexBody half(3);
    half.cut_le(e(3, 0), 0.0);
    CHECK(padded_volume(half, 0.0, 50000, 9) == padded_volume(half, 0.0, 50000, 9));
}

TEST_CASE("bisecting thresholds") {
    std::mt19937_64 rng(63);
    const Vec x = random_unit(2, rng);
    CHECK(std::abs(bisect_threshold(ConvexBody(2), 0.1, x, 0.5, 200000, 5)) < 0.01);

    ConvexBody half(2);
    half.cut_le(e(2, 0), 0.0);
    const double y = bisect_threshold(half, 0.0, e(2, 0), 0.5, 200000, 6);
    // median chord from the 1-D integral
    double lo = -1, hi = 0;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (half_disk_area_above(mid) > std::numbers::pi / 4 ? lo : hi) = mid;
    }
    CHECK(y == doctest::Approx(0.5 * (lo + hi)).epsilon(0.01));

    for (double f : {0.1, 0.3, 0.7}) {
        const double yf = bisect_threshold(half, 0.05, e(2, 0), f, 200000, 7);
        PaddedCloud check(half, 0.05, 99);
        check.draw(400000);
        CHECK(check.fraction_at_least(e(2, 0), yf) == doctest::Approx(f).epsilon(0.02));
    }
}

TEST_CASE("bisecting a flat direction is rejected") {
    try {
        bisect_threshold(ConvexBody(2), 0.0, Vec::Zero(2), 0.5, 1000, 1);
        CHECK(false);
    } catch (const Error& err) {
        CHECK(err.code() == Errc::DegenerateDirection);
    }
}

TEST_CASE("central cut of the unit disk") {
    const Ellipsoid n = lj_halfspace_update(Ellipsoid::ball(2), e(2, 0), Side::Ge, 0.0);
    CHECK(n.c(0) == doctest::Approx(1.0 / 3));
    CHECK(n.c(1) == doctest::Approx(0.0));
    CHECK(n.A(0, 0) == doctest::Approx(4.0 / 9));
    CHECK(n.A(1, 1) == doctest::Approx(4.0 / 3));
    CHECK(n.A(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("uninformative and impossible cuts") {
    const Ellipsoid b = Ellipsoid::ball(3);
    const Ellipsoid same = lj_halfspace_update(b, e(3, 1), Side::Ge, -2.0);
    CHECK((same.A - b.A).norm() == 0.0);
    CHECK((same.c - b.c).norm() == 0.0);
    try {
        lj_halfspace_update(b, e(3, 1), Side::Ge, 1.5);
        CHECK(false);
    } catch (const Error& err) {
        CHECK(err.code() == Errc::CutMissesEllipsoid);
    }
}

TEST_CASE("cuts shrink volume and keep the kept region") {
    std::mt19937_64 rng(64);
    std::uniform_real_distribution<double> U;
    std::normal_distribution<double> N;
    for (int d = 1; d <= 5; ++d) {
        for (int r = 0; r < 40; ++r) {
            Ellipsoid el = Ellipsoid::ball(d);
            // a few random cuts to get a generic ellipsoid
            for (int k = 0; k < 3; ++k) {
                const Vec a = random_unit(d, rng);
                el = lj_halfspace_update(el, a, Side::Le, a.dot(el.c) + 0.3 * U(rng) * std::sqrt(a.dot(el.A * a)));
            }
            const Vec a = random_unit(d, rng);
            const double mid = a.dot(el.c);
            const Ellipsoid cut = lj_halfspace_update(el, a, Side::Ge, mid);
            CHECK(cut.volume_factor() / el.volume_factor() <= std::exp(-1.0 / (2 * (d + 1))) + 1e-12);
            // points of the kept half stay inside
            Eigen::LLT<Mat> llt(el.A);
            const Mat L = llt.matrixL();
            for (int s = 0; s < 200; ++s) {
                Vec g(d);
                for (int k = 0; k < d; ++k) g(k) = N(rng);
                const Vec th = el.c + L * (g.normalized() * std::pow(U(rng), 1.0 / d));
                if (a.dot(th) >= mid) CHECK(cut.contains(th, 1e-9));
            }
        }
    }
}

TEST_CASE("ellipsoid widths") {
    CHECK(ellipsoid_width(Ellipsoid::ball(3), e(3, 2)) == doctest::Approx(2));
    Ellipsoid el = Ellipsoid::ball(2);
    el.A = Vec(Eigen::Vector2d(4, 1)).asDiagonal();
    CHECK(ellipsoid_width(el, e(2, 0)) == doctest::Approx(4));
    CHECK(ellipsoid_width(el, e(2, 1)) == doctest::Approx(2));
    CHECK(ellipsoid_support(el, e(2, 0)) == doctest::Approx(2));
}

TEST_CASE("padding schedules and the exploration bound") {
    CHECK(gft_padding(0, 2) == doctest::Approx(1.0 / 16));
    CHECK(gft_padding(3, 1) == doctest::Approx(1.0 / 64));
    CHECK(profit_padding(0, 1) == doctest::Approx(1.0 / 128));
    CHECK(profit_padding(1, 2) == doctest::Approx(std::exp2(-6) / 32));
    CHECK(exploration_bound(3, 1.0, 1e-4) == doctest::Approx(2 * 9 * std::log(20 * 4 * 1e4)));
}
