#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hyst/curves.hpp"
#include "hyst/errors.hpp"

using hyst::CurvePoint;
using hyst::MonotoneCurve;

namespace {

// Intro boundary pair used across the suites: the lower branch saturates at
// u = 4, the upper one (same shape traversed at double speed) at u = 2.
MonotoneCurve intro_lower() {
    return MonotoneCurve::piecewise_linear({{0, 0}, {4, 4}, {5, 4}});
}
MonotoneCurve intro_upper() {
    return MonotoneCurve::piecewise_linear({{0, 0}, {2, 4}, {5, 4}});
}

}  // namespace

TEST_SUITE_BEGIN("curves");

TEST_CASE("identity and affine shift") {
    MonotoneCurve id = MonotoneCurve::identity();
    CHECK(id.kind() == MonotoneCurve::Kind::Identity);
    CHECK(id(3.5) == 3.5);
    CHECK(id.slope(-7.0) == 1.0);
    CHECK(id.inverse_min(2.0) == 2.0);
    CHECK(id.inverse_max(2.0) == 2.0);

    MonotoneCurve sh = MonotoneCurve::affine_shift(1.5);
    CHECK(sh.kind() == MonotoneCurve::Kind::AffineShift);
    CHECK(sh.shift() == 1.5);
    CHECK(sh(4.0) == 2.5);
    CHECK(sh.slope(0.0) == 1.0);
    CHECK(sh.inverse_min(2.5) == 4.0);
    CHECK(sh.inverse_max(2.5) == 4.0);

    CHECK_THROWS_AS(MonotoneCurve::affine_shift(std::nan("")), hyst::BadInput);
}

TEST_CASE("piecewise linear values and extensions") {
    MonotoneCurve b = intro_lower();
    CHECK(b(0.0) == 0.0);
    CHECK(b(2.0) == doctest::Approx(2.0));
    CHECK(b(4.0) == 4.0);
    CHECK(b(4.5) == doctest::Approx(4.0));
    CHECK(b(5.0) == 4.0);
    // End segments continue linearly: slope 1 below, slope 0 above.
    CHECK(b(-1.0) == doctest::Approx(-1.0));
    CHECK(b(7.0) == doctest::Approx(4.0));
}

TEST_CASE("piecewise linear left-sided slopes") {
    MonotoneCurve b = intro_lower();
    CHECK(b.slope(-1.0) == 1.0);
    CHECK(b.slope(0.0) == 1.0);
    CHECK(b.slope(2.0) == 1.0);
    // At the kink the segment ending there answers.
    CHECK(b.slope(4.0) == 1.0);
    CHECK(b.slope(4.5) == 0.0);
    CHECK(b.slope(5.0) == 0.0);
    CHECK(b.slope(6.0) == 0.0);
}

TEST_CASE("piecewise linear endpoint inverses") {
    MonotoneCurve b = intro_lower();
    // The flat top [4, 5] attains 4 on a whole segment.
    CHECK(b.inverse_min(4.0) == 4.0);
    CHECK(b.inverse_max(4.0) == 5.0);
    CHECK(b.inverse_min(2.0) == doctest::Approx(2.0));
    CHECK(b.inverse_max(2.0) == doctest::Approx(2.0));
    // Below the span the slope-1 extension reaches any value.
    CHECK(b.inverse_min(-3.0) == doctest::Approx(-3.0));
    // Above the flat end nothing is reachable.
    CHECK_THROWS_AS(b.inverse_min(4.0 + 1e-9), hyst::OutOfRange);
    CHECK_THROWS_AS(b.inverse_max(5.0), hyst::OutOfRange);

    MonotoneCurve up = MonotoneCurve::piecewise_linear({{0, 1}, {1, 2}});
    CHECK(up.inverse_min(0.0) == doctest::Approx(-1.0));
    CHECK(up.inverse_max(3.0) == doctest::Approx(2.0));
}

TEST_CASE("piecewise linear validation") {
    CHECK_THROWS_AS(MonotoneCurve::piecewise_linear({{0, 0}}), hyst::BadInput);
    CHECK_THROWS_AS(MonotoneCurve::piecewise_linear({{0, 0}, {0, 1}}), hyst::BadInput);
    CHECK_THROWS_AS(MonotoneCurve::piecewise_linear({{1, 0}, {0, 1}}), hyst::BadInput);
    CHECK_THROWS_AS(MonotoneCurve::piecewise_linear({{0, 1}, {1, 0}}), hyst::BadInput);
    CHECK_THROWS_AS(
        MonotoneCurve::piecewise_linear({{0, 0}, {std::nan(""), 1}}), hyst::BadInput);
}

TEST_CASE("langmuir isotherm") {
    const double V = 543.0, B = 0.0382;
    MonotoneCurve g = MonotoneCurve::langmuir(V, B);
    CHECK(g.kind() == MonotoneCurve::Kind::Langmuir);
    CHECK(g.langmuir_V() == V);
    CHECK(g.langmuir_B() == B);
    CHECK(g(0.0) == 0.0);
    CHECK(g(100.0) == doctest::Approx(V * B * 100.0 / (1.0 + B * 100.0)));
    // Half saturation exactly at u = 1/B.
    CHECK(g(1.0 / B) == doctest::Approx(V / 2.0));
    // Tangent extension below zero keeps the initial slope V*B.
    CHECK(g(-1.0) == doctest::Approx(-V * B));
    CHECK(g.slope(-1.0) == doctest::Approx(V * B));
    CHECK(g.slope(0.0) == doctest::Approx(V * B));
    double d = 1.0 + B * 50.0;
    CHECK(g.slope(50.0) == doctest::Approx(V * B / (d * d)));

    CHECK(g.inverse_min(V / 2.0) == doctest::Approx(1.0 / B));
    CHECK(g.inverse_max(V / 2.0) == doctest::Approx(1.0 / B));
    CHECK(g.inverse_min(-V * B) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(g.inverse_min(V), hyst::OutOfRange);
    CHECK_THROWS_AS(g.inverse_min(V + 1.0), hyst::OutOfRange);

    CHECK_THROWS_AS(MonotoneCurve::langmuir(0.0, 1.0), hyst::BadInput);
    CHECK_THROWS_AS(MonotoneCurve::langmuir(1.0, -2.0), hyst::BadInput);
}

TEST_CASE("closed-form registry") {
    CHECK(hyst::closed_form_registered("quadlens_right"));
    CHECK(hyst::closed_form_registered("quadlens_left"));
    CHECK_FALSE(hyst::closed_form_registered("no_such_curve"));
    CHECK_THROWS_AS(MonotoneCurve::closed_form("no_such_curve"), hyst::BadInput);

    hyst::register_closed_form(
        "test_cubic",
        {[](double u) { return u * u * u; }, [](double u) { return 3.0 * u * u; }, 0.0, 2.0});
    MonotoneCurve c = MonotoneCurve::closed_form("test_cubic");
    CHECK(c.kind() == MonotoneCurve::Kind::ClosedForm);
    CHECK(c.name() == "test_cubic");
    CHECK(c(1.5) == doctest::Approx(3.375));
    // Tangent extension above hi = 2: f(2) + f'(2) * (u - 2).
    CHECK(c(3.0) == doctest::Approx(8.0 + 12.0));
    CHECK(c.slope(3.0) == doctest::Approx(12.0));
    CHECK(c.inverse_min(3.375) == doctest::Approx(1.5));

    CHECK_THROWS_AS(hyst::register_closed_form("bad", {nullptr, nullptr, 0.0, 1.0}),
                    hyst::BadInput);
    CHECK_THROWS_AS(
        hyst::register_closed_form(
            "bad", {[](double u) { return u; }, [](double) { return 1.0; }, 1.0, 1.0}),
        hyst::BadInput);
}

TEST_CASE("quadratic lens pair") {
    MonotoneCurve lo = MonotoneCurve::closed_form("quadlens_right");
    MonotoneCurve hi = MonotoneCurve::closed_form("quadlens_left");
    CHECK(lo(1.0) == doctest::Approx(0.0));
    CHECK(lo(3.0) == doctest::Approx(14.0 / 3.0));
    CHECK(hi(1.0) == doctest::Approx(0.0));
    CHECK(hi(3.0) == doctest::Approx(14.0 / 3.0));
    for (int i = 0; i <= 100; ++i) {
        double u = 1.0 + 2.0 * i / 100.0;
        CHECK(hi(u) >= lo(u) - 1e-12);
    }
    // Bisection inverse hits the interior to high accuracy.
    CHECK(lo.inverse_min(lo(2.0)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hi.inverse_min(hi(1.7)) == doctest::Approx(1.7).epsilon(1e-12));
    // Tangent extension below the domain.
    CHECK(lo(0.0) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("structural equality and accessor guards") {
    CHECK(MonotoneCurve::identity() == MonotoneCurve::identity());
    CHECK(MonotoneCurve::affine_shift(2.0) == MonotoneCurve::affine_shift(2.0));
    CHECK_FALSE(MonotoneCurve::affine_shift(2.0) == MonotoneCurve::affine_shift(3.0));
    CHECK_FALSE(MonotoneCurve::identity() == MonotoneCurve::affine_shift(0.0));
    CHECK(intro_lower() == intro_lower());
    CHECK_FALSE(intro_lower() == intro_upper());
    CHECK(MonotoneCurve::langmuir(1, 2) == MonotoneCurve::langmuir(1, 2));
    CHECK(MonotoneCurve::closed_form("quadlens_right") ==
          MonotoneCurve::closed_form("quadlens_right"));
    CHECK_FALSE(MonotoneCurve::closed_form("quadlens_right") ==
                MonotoneCurve::closed_form("quadlens_left"));

    CHECK_THROWS_AS(MonotoneCurve::identity().shift(), hyst::BadInput);
    CHECK_THROWS_AS(MonotoneCurve::affine_shift(1.0).points(), hyst::BadInput);
    CHECK_THROWS_AS(intro_lower().langmuir_V(), hyst::BadInput);
    CHECK_THROWS_AS(MonotoneCurve::langmuir(1, 1).name(), hyst::BadInput);
}

TEST_CASE("inverses bracket their argument") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dx(0.05, 1.5);
    std::uniform_real_distribution<double> dy(0.0, 1.0);
    std::uniform_real_distribution<double> du(-1.0, 9.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CurvePoint> pts{{0.0, 0.0}};
        for (int i = 0; i < 6; ++i)
            pts.push_back({pts.back().x + dx(rng), pts.back().y + dy(rng)});
        MonotoneCurve f = MonotoneCurve::piecewise_linear(pts);
        for (int i = 0; i < 20; ++i) {
            double u = du(rng);
            double w = f(u);
            double umin, umax;
            try {
                umin = f.inverse_min(w);
                umax = f.inverse_max(w);
            } catch (const hyst::OutOfRange&) {
                continue;  // flat end extension, value not attained
            }
            CHECK(umin <= umax + 1e-12);
            CHECK(umin <= u + 1e-9);
            CHECK(u <= umax + 1e-9);
            CHECK(f(umin) == doctest::Approx(w).epsilon(1e-9));
            CHECK(f(umax) == doctest::Approx(w).epsilon(1e-9));
        }
    }
}

TEST_CASE("random curves are nondecreasing with consistent slopes") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> dx(0.05, 1.5);
    std::uniform_real_distribution<double> dy(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CurvePoint> pts{{-1.0, 0.0}};
        for (int i = 0; i < 5; ++i)
            pts.push_back({pts.back().x + dx(rng), pts.back().y + dy(rng)});
        MonotoneCurve f = MonotoneCurve::piecewise_linear(pts);
        double prev = f(-2.0);
        for (int i = 1; i <= 1000; ++i) {
            double u = -2.0 + 10.0 * i / 1000.0;
            double now = f(u);
            CHECK(now >= prev - 1e-12);
            prev = now;
        }
        // Non-kink finite differences match the reported slope.
        std::uniform_real_distribution<double> dprobe(-1.5, 6.0);
        for (int i = 0; i < 25; ++i) {
            double u = dprobe(rng);
            bool near_kink = false;
            for (const CurvePoint& p : pts)
                if (std::abs(u - p.x) < 1e-4) near_kink = true;
            if (near_kink) continue;
            double hstep = 1e-7;
            double fd = (f(u + hstep) - f(u - hstep)) / (2.0 * hstep);
            CHECK(f.slope(u) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("intro boundary curves stay 1-Lipschitz in composition order") {
    MonotoneCurve lo = intro_lower();
    MonotoneCurve up = intro_upper();
    const std::vector<CurvePoint>& p = lo.points();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double s = (p[i + 1].y - p[i].y) / (p[i + 1].x - p[i].x);
        CHECK(s <= 1.0 + 1e-15);
        CHECK(s >= 0.0);
    }
    // Upper stays above lower everywhere in the shared span.
    for (int i = 0; i <= 1000; ++i) {
        double u = 5.0 * i / 1000.0;
        CHECK(up(u) >= lo(u) - 1e-12);
    }
}

TEST_SUITE_END();
