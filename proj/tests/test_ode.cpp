#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "hyst/calibrate.hpp"
#include "hyst/errors.hpp"
#include "hyst/ode.hpp"

using hyst::Hysteron;
using hyst::Model;
using hyst::ModelKind;
using hyst::ModelState;
using hyst::MonotoneCurve;
using hyst::OdeProblem;
using hyst::OdeRun;
using hyst::Pin;
using hyst::SolverConfig;
using hyst::Source;
using hyst::Truncation;
using hyst::Uniform;
using hyst::WRange;

namespace {

MonotoneCurve intro_upper() {
    return MonotoneCurve::piecewise_linear({{0, 0}, {2, 4}, {5, 4}});
}
MonotoneCurve intro_lower() {
    return MonotoneCurve::piecewise_linear({{0, 0}, {4, 4}, {5, 4}});
}

Model intro_play() { return hyst::calibrate_generalized(intro_upper(), intro_lower()); }

// Convex ascending / concave descending boundary pair on [1, 3].
Model lens_play() {
    return hyst::calibrate_generalized(MonotoneCurve::closed_form("quadlens_left"),
                                       MonotoneCurve::closed_form("quadlens_right"));
}

const WRange kLensBand{0.0, 14.0 / 3.0};

double mean_iters(const OdeRun& run) {
    return std::accumulate(run.iters.begin(), run.iters.end(), 0.0) /
           static_cast<double>(run.iters.size());
}

}  // namespace

TEST_SUITE_BEGIN("ode");

TEST_CASE("source conventions") {
    const double pi = std::numbers::pi;

    Source zero;
    CHECK(zero(1, 0.0, 0.1) == 0.0);

    // Smooth sources sample the step's right endpoint.
    Source sq = Source::smooth([](double t) { return t * t; });
    CHECK(sq(3, 0.2, 0.3) == doctest::Approx(0.09));

    Source avg = Source::averaged([](double t0, double t1) { return 0.5 * (t0 + t1); });
    CHECK(avg(1, 1.0, 2.0) == doctest::Approx(1.5));

    Source tab = Source::samples({10.0, 20.0});
    CHECK(tab(1, 0.0, 0.1) == 10.0);
    CHECK(tab(2, 0.1, 0.2) == 20.0);
    CHECK_THROWS_AS(tab(3, 0.2, 0.3), hyst::BadInput);

    Source ds = Source::decaying_sine();
    CHECK(ds(5, 1.9, 2.0) == doctest::Approx(3.5 * std::sin(2.0) * std::exp(-0.2)));

    // Sign source averages the +-1 plateaus exactly across the crossing at pi.
    Source sg = Source::decaying_sine_sign();
    CHECK(sg(1, 3.0, 3.2) == doctest::Approx((2.0 * (pi - 3.0) - 0.2) / 0.2));
    CHECK(sg(1, 0.1, 0.2) == doctest::Approx(1.0));

    Source sw = Source::square_wave(9.0);
    CHECK(sw(1, 8.0, 8.5) == doctest::Approx(1.0));
    CHECK(sw(1, 9.0, 9.5) == doctest::Approx(-1.0));
    CHECK(sw(1, 8.9, 9.2) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("residual is the increasing scalar equation of one step") {
    Model m = intro_play();
    ModelState s = hyst::init_state(m, 0.0);
    MonotoneCurve a = MonotoneCurve::identity();

    // Ascending from zero the output rides the lower curve: U + U = rhs.
    CHECK(hyst::residual(a, m, s, 2.0, 1.0) == doctest::Approx(0.0));
    CHECK(hyst::residual(a, m, s, 2.0, 0.5) < 0.0);
    CHECK(hyst::residual(a, m, s, 2.0, 1.5) > 0.0);
    // Past saturation only the accumulation term keeps growing.
    CHECK(hyst::residual(a, m, s, 8.5, 4.5) == doctest::Approx(0.0));
}

TEST_CASE("solve_step methods agree and commit the state") {
    Model m = intro_play();
    MonotoneCurve a = MonotoneCurve::identity();

    for (auto method : {SolverConfig::Method::Newton, SolverConfig::Method::Bracket,
                        SolverConfig::Method::NewtonWithBracketFallback}) {
        SolverConfig cfg;
        cfg.method = method;
        ModelState s = hyst::init_state(m, 0.0);

        auto r1 = hyst::solve_step(a, m, cfg, s, 2.0);
        CHECK(r1.u == doctest::Approx(1.0));
        CHECK(r1.w == doctest::Approx(1.0));
        CHECK(s.u == r1.u);
        CHECK(r1.iters >= 1);
        CHECK(std::abs(r1.residual) <= cfg.abs_tol + cfg.rel_tol * 2.0);

        auto r2 = hyst::solve_step(a, m, cfg, s, 8.5);
        CHECK(r2.u == doctest::Approx(4.5));
        CHECK(r2.w == doctest::Approx(4.0));
        CHECK(hyst::evaluate(m, s, s.u) == doctest::Approx(r2.w));
    }
}

TEST_CASE("newton counts every residual evaluation") {
    // Weightless row: the equation is a(U) = rhs, linear, solved on the
    // second evaluation (probe, correct, accept).
    Model m(ModelKind::LinearPlay, {Hysteron::unit(0.0, 0.0, 1.0, Truncation::identity())});
    ModelState s = hyst::init_state(m, 0.0);
    SolverConfig cfg;
    cfg.method = SolverConfig::Method::Newton;
    auto r = hyst::solve_step(MonotoneCurve::identity(), m, cfg, s, 2.0);
    CHECK(r.u == doctest::Approx(2.0));
    CHECK(r.iters == 2);
}

TEST_CASE("square wave drive walks up one boundary and back down the other") {
    OdeProblem p{MonotoneCurve::identity(), intro_play(), Source::square_wave(9.0),
                 0.0,                       hyst::LeftCurveInit{}, 18.0,
                 1e-3};
    SolverConfig cfg;
    OdeRun run = hyst::integrate(p, cfg);

    REQUIRE(run.t.size() == 18001);
    CHECK(run.t[0] == 0.0);
    CHECK(run.t.back() == doctest::Approx(18.0));

    // Exact path: U = t/2 until saturation at t = 8, then t - 4 up to 5;
    // back down along u = 14 - t, then (18 - t)/3 to end at zero exactly.
    CHECK(std::abs(run.U[9000] - 5.0) <= 1e-9);
    CHECK(std::abs(run.W[9000] - 4.0) <= 1e-9);
    CHECK(std::abs(run.U[4000] - 2.0) <= 1e-9);
    CHECK(std::abs(run.U[18000]) <= 1e-9);
    CHECK(std::abs(run.W[18000]) <= 1e-9);

    for (std::size_t n = 1; n <= 9000; ++n) CHECK(run.U[n] >= run.U[n - 1] - 1e-12);
    for (std::size_t n = 9001; n <= 18000; ++n) CHECK(run.U[n] <= run.U[n - 1] + 1e-12);

    CHECK(hyst::balance_check(run) <= 1e-10);
    CHECK(run.fallback_steps == 0);
    CHECK(*std::max_element(run.iters.begin(), run.iters.end()) <= 6);
    CHECK(hyst::is_admissible(p.model, run.final_state));
}

TEST_CASE("zero forcing holds the equilibrium exactly") {
    OdeProblem p{MonotoneCurve::identity(), lens_play(), Source{},
                 3.0,                       hyst::LeftCurveInit{}, 2.0,
                 0.1};
    SolverConfig cfg;
    OdeRun run = hyst::integrate(p, cfg);
    for (double u : run.U) CHECK(u == 3.0);
    for (double w : run.W) CHECK(w == doctest::Approx(14.0 / 3.0));
    CHECK(hyst::balance_check(run) == 0.0);
    for (int it : run.iters) CHECK(it == 1);
}

TEST_CASE("balance defect stays at solver precision on a dense model") {
    auto cal = hyst::calibrate_hierarchical(MonotoneCurve::closed_form("quadlens_left"),
                                            MonotoneCurve::closed_form("quadlens_right"),
                                            kLensBand, 11, Uniform{}, 20, 1, 1e9, Pin::Right);
    REQUIRE(std::accumulate(cal.slab_k.begin(), cal.slab_k.end(), 0LL) == 106);

    OdeProblem p{MonotoneCurve::identity(), cal.model, Source::decaying_sine_sign(),
                 1.0,                       hyst::LeftCurveInit{}, 10.0,
                 1e-3};
    SolverConfig cfg;
    OdeRun run = hyst::integrate(p, cfg);
    CHECK(hyst::balance_check(run) <= 1e-10);
    CHECK(run.fallback_steps == 0);
}

TEST_CASE("pure newton cycles on a near-vertical ramp and the fallback finishes") {
    // Steep weighted ramp at the origin: the tangent from either side
    // overshoots and newton bounces between the flat regions.
    Model m(ModelKind::NonlinearPlay, {Hysteron::unit(100.0, 0.0, 0.0, Truncation::ramp(0.01))});
    MonotoneCurve a = MonotoneCurve::identity();
    ModelState fresh = hyst::init_state(m, -1.0);

    SolverConfig newton;
    newton.method = SolverConfig::Method::Newton;
    {
        ModelState s = fresh;
        CHECK_THROWS_AS(hyst::solve_step(a, m, newton, s, 0.75), hyst::NoConvergence);
    }

    SolverConfig fb;
    fb.method = SolverConfig::Method::NewtonWithBracketFallback;
    ModelState s1 = fresh;
    auto r1 = hyst::solve_step(a, m, fb, s1, 0.75);
    CHECK(r1.fell_back);
    CHECK(r1.u == doctest::Approx(0.75 / 101.0));
    CHECK(r1.w == doctest::Approx(75.0 / 101.0));

    SolverConfig br;
    br.method = SolverConfig::Method::Bracket;
    ModelState s2 = fresh;
    auto r2 = hyst::solve_step(a, m, br, s2, 0.75);
    CHECK(r2.u == doctest::Approx(r1.u));
    CHECK(!r2.fell_back);
}

TEST_CASE("every lipschitz family completes a discontinuous drive") {
    auto gl = MonotoneCurve::closed_form("quadlens_left");
    auto gr = MonotoneCurve::closed_form("quadlens_right");
    std::vector<double> samp;
    for (int i = 0; i <= 50; ++i) samp.push_back(1.0 + 2.0 * i / 50.0);

    std::vector<Model> families;
    families.push_back(lens_play());
    families.push_back(
        hyst::calibrate_hierarchical(gl, gr, kLensBand, 11, Uniform{}, 20, 1, 1e9, Pin::Right)
            .model);
    families.push_back(hyst::calibrate_linear_play(gr, samp));
    families.push_back(hyst::calibrate_preisach(gl, gr, kLensBand, 100, 0.1));
    families.push_back(hyst::calibrate_preisach(gl, gr, kLensBand, 100, 0.0, true));

    for (const Model& m : families) {
        OdeProblem p{MonotoneCurve::identity(), m,    Source::decaying_sine_sign(), 1.0,
                     hyst::LeftCurveInit{},     10.0, 0.01};
        SolverConfig cfg;
        OdeRun run = hyst::integrate(p, cfg);
        CHECK(std::isfinite(run.U.back()));
        CHECK(hyst::is_admissible(m, run.final_state));
        CHECK(hyst::balance_check(run) <= 1e-4);
    }
}

TEST_CASE("scaled ramp kinks defeat pure newton but not the fallback") {
    auto gl = MonotoneCurve::closed_form("quadlens_left");
    auto gr = MonotoneCurve::closed_form("quadlens_right");
    Model m = hyst::calibrate_preisach(gl, gr, kLensBand, 100, 0.1);
    OdeProblem p{MonotoneCurve::identity(), m,    Source::decaying_sine_sign(), 1.0,
                 hyst::LeftCurveInit{},     10.0, 0.01};

    SolverConfig newton;
    newton.method = SolverConfig::Method::Newton;
    CHECK_THROWS_AS(hyst::integrate(p, newton), hyst::NoConvergence);

    SolverConfig fb;
    OdeRun run = hyst::integrate(p, fb);
    CHECK(run.fallback_steps >= 1);
}

TEST_CASE("newton stays cheap on the smooth curve pair") {
    OdeProblem p{MonotoneCurve::identity(), lens_play(), Source::decaying_sine_sign(),
                 1.0,                       hyst::LeftCurveInit{}, 10.0,
                 0.01};
    SolverConfig cfg;
    cfg.method = SolverConfig::Method::Newton;
    OdeRun run = hyst::integrate(p, cfg);
    CHECK(mean_iters(run) <= 5.0);
    CHECK(*std::max_element(run.iters.begin(), run.iters.end()) <= 10);
}

TEST_CASE("solver methods track each other along a run") {
    OdeProblem p{MonotoneCurve::identity(), lens_play(), Source::decaying_sine(),
                 1.0,                       hyst::LeftCurveInit{}, 10.0,
                 0.01};
    SolverConfig cn, cb;
    cn.method = SolverConfig::Method::Newton;
    cb.method = SolverConfig::Method::Bracket;
    cn.rel_tol = cb.rel_tol = 1e-10;
    OdeRun rn = hyst::integrate(p, cn);
    OdeRun rb = hyst::integrate(p, cb);
    double gap = 0.0;
    for (std::size_t n = 0; n < rn.U.size(); ++n)
        gap = std::max(gap, std::abs(rn.U[n] - rb.U[n]));
    CHECK(gap <= 1e-6);
}

TEST_CASE("first order convergence under the smooth drive") {
    OdeProblem p{MonotoneCurve::identity(), lens_play(), Source::decaying_sine(),
                 1.0,                       hyst::LeftCurveInit{}, 10.0,
                 0.1};
    SolverConfig cfg;
    // The default stopping tolerance leaves per-step slop comparable to the
    // finest-step discretization error; tighten it so the rate is the
    // scheme's, not the solver's.
    cfg.rel_tol = 1e-9;
    auto tab = hyst::convergence_study(p, cfg, {0.1, 0.01, 0.001, 1e-4});

    REQUIRE(tab.rows.size() == 3);
    CHECK(tab.rows[0].tau == doctest::Approx(0.1));
    CHECK(tab.rows[2].tau == doctest::Approx(0.001));
    const double eu[3] = {0.0670, 0.00689, 0.000692};
    const double ew[3] = {0.1083, 0.01100, 0.001092};
    for (int i = 0; i < 3; ++i) {
        CHECK(tab.rows[i].E_u >= 0.7 * eu[i]);
        CHECK(tab.rows[i].E_u <= 1.3 * eu[i]);
        CHECK(tab.rows[i].E_w >= 0.7 * ew[i]);
        CHECK(tab.rows[i].E_w <= 1.3 * ew[i]);
    }
    CHECK(tab.p_u >= 0.9);
    CHECK(tab.p_u <= 1.1);
    CHECK(tab.p_w >= 0.9);
    CHECK(tab.p_w <= 1.1);
}

TEST_CASE("a weightless model reduces to plain implicit euler") {
    Model m(ModelKind::LinearPlay, {Hysteron::unit(0.0, 0.0, 1.0, Truncation::identity())});
    OdeProblem p{MonotoneCurve::identity(), m,    Source::decaying_sine(), 1.0,
                 hyst::LeftCurveInit{},     10.0, 0.1};
    SolverConfig cfg;
    cfg.rel_tol = 1e-9;
    auto tab = hyst::convergence_study(p, cfg, {0.1, 0.05, 0.025, 0.0125, 1.953125e-4});
    REQUIRE(tab.rows.size() == 4);
    CHECK(tab.p_u == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("convergence study validates its step ladder") {
    OdeProblem p{MonotoneCurve::identity(), intro_play(), Source::decaying_sine(),
                 0.0,                       hyst::LeftCurveInit{}, 1.0,
                 0.1};
    SolverConfig cfg;
    CHECK_THROWS_AS(hyst::convergence_study(p, cfg, {0.1}), hyst::BadInput);
    CHECK_THROWS_AS(hyst::convergence_study(p, cfg, {0.1, 0.03}), hyst::BadInput);
}

TEST_CASE("integrate validates the clock and the model") {
    OdeProblem p{MonotoneCurve::identity(), intro_play(), Source{},
                 0.0,                       hyst::LeftCurveInit{}, 1.0,
                 0.3};
    SolverConfig cfg;
    CHECK_THROWS_AS(hyst::integrate(p, cfg), hyst::BadInput);
    p.tau = -0.1;
    CHECK_THROWS_AS(hyst::integrate(p, cfg), hyst::BadInput);
    p.tau = 0.0;
    CHECK_THROWS_AS(hyst::integrate(p, cfg), hyst::BadInput);

    // A binary-inexact but divisible clock must pass.
    p.tau = 0.1;
    CHECK_NOTHROW(hyst::integrate(p, cfg));

    auto gl = MonotoneCurve::closed_form("quadlens_left");
    auto gr = MonotoneCurve::closed_form("quadlens_right");
    OdeProblem raw{MonotoneCurve::identity(),
                   hyst::calibrate_preisach(gl, gr, kLensBand, 10, 0.0),
                   Source{},
                   1.0,
                   hyst::LeftCurveInit{},
                   1.0,
                   0.1};
    CHECK_THROWS_AS(hyst::integrate(raw, cfg), hyst::BadInput);
}

TEST_CASE("keep_v stores one internal snapshot per time point") {
    OdeProblem p{MonotoneCurve::identity(), intro_play(), Source::square_wave(0.5),
                 0.0,                       hyst::LeftCurveInit{}, 1.0,
                 0.1};
    SolverConfig cfg;
    OdeRun bare = hyst::integrate(p, cfg);
    CHECK(bare.V.empty());
    OdeRun kept = hyst::integrate(p, cfg, true);
    REQUIRE(kept.V.size() == kept.U.size());
    CHECK(kept.V[0].size() == p.model.size());
}

TEST_CASE("monotone loading moves input and output up together") {
    OdeProblem p{MonotoneCurve::identity(), lens_play(),
                 Source::smooth([](double) { return 2.0; }),
                 1.0,                       hyst::LeftCurveInit{}, 2.0,
                 0.01};
    SolverConfig cfg;
    OdeRun run = hyst::integrate(p, cfg);
    for (std::size_t n = 1; n < run.U.size(); ++n) {
        CHECK(run.U[n] > run.U[n - 1]);
        CHECK(run.W[n] >= run.W[n - 1] - 1e-12);
    }
}

TEST_CASE("random systems contract in the weighted output metric") {
    std::mt19937 rng(20260815);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int systems = 0;
    while (systems < 1000) {
        std::uniform_int_distribution<int> nk(1, 5);
        int K = nk(rng);
        bool ramps = unit(rng) < 0.5;
        std::vector<Hysteron> rows;
        for (int k = 0; k < K; ++k) {
            double mu = 0.1 + 1.9 * unit(rng);
            double alpha = -2.0 + 2.0 * unit(rng);
            double beta = alpha + 2.0 * unit(rng);
            rows.push_back(Hysteron::unit(
                mu, alpha, beta,
                ramps ? Truncation::ramp(0.2 + 1.8 * unit(rng)) : Truncation::identity()));
        }
        Model m(ramps ? ModelKind::NonlinearPlay : ModelKind::LinearPlay, std::move(rows));

        double u0 = -1.0 + 2.0 * unit(rng);
        // Two admissible starts at the same input, one componentwise above
        // the other.
        std::vector<double> va, vb;
        for (int k = 0; k < K; ++k) {
            double lo = u0 - m[k].beta(), hi = u0 - m[k].alpha();
            double x = lo + (hi - lo) * unit(rng);
            double y = lo + (hi - lo) * unit(rng);
            va.push_back(std::max(x, y));
            vb.push_back(std::min(x, y));
        }

        std::vector<double> F;
        for (int n = 0; n < 20; ++n) F.push_back(-2.0 + 4.0 * unit(rng));

        OdeProblem base{MonotoneCurve::identity(), m,   Source::samples(F), u0,
                        hyst::ExplicitInit{va},    5.0, 0.25};
        SolverConfig cfg;
        OdeRun ra = hyst::integrate(base, cfg, true);
        base.init = hyst::ExplicitInit{vb};
        OdeRun rb = hyst::integrate(base, cfg, true);

        double scale = 0.0;
        for (std::size_t n = 0; n < ra.U.size(); ++n)
            scale = std::max({scale, std::abs(ra.U[n]) + std::abs(ra.W[n]),
                              std::abs(rb.U[n]) + std::abs(rb.W[n])});
        double slack = 8.0 * (cfg.abs_tol + cfg.rel_tol * (scale + 2.0));

        double prev = 0.0;
        for (std::size_t n = 0; n < ra.U.size(); ++n) {
            double d = std::abs(ra.U[n] - rb.U[n]);
            for (int k = 0; k < K; ++k)
                d += m[k].mu * std::abs(m[k].trunc(ra.V[n][k]) - m[k].trunc(rb.V[n][k]));
            if (n > 0) CHECK(d <= prev + slack);
            prev = d;

            // The higher start stays higher: the step map preserves order.
            CHECK(ra.U[n] >= rb.U[n] - slack);
            CHECK(ra.W[n] >= rb.W[n] - slack);
        }
        ++systems;
    }
}

TEST_SUITE_END();
