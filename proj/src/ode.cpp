#include "hyst/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>
#include <utility>

#include "hyst/errors.hpp"

namespace hyst {

Source::Source() : fn_([](int, double, double) { return 0.0; }) {}

Source Source::smooth(std::function<double(double)> f) {
    Source s;
    s.fn_ = [f = std::move(f)](int, double, double t1) { return f(t1); };
    return s;
}

Source Source::averaged(std::function<double(double, double)> cell_avg) {
    Source s;
    s.fn_ = [g = std::move(cell_avg)](int, double t0, double t1) { return g(t0, t1); };
    return s;
}

Source Source::samples(std::vector<double> F) {
    Source s;
    s.fn_ = [F = std::move(F)](int n, double, double) {
        if (n < 1 || static_cast<std::size_t>(n) > F.size())
            throw BadInput("sampled source is shorter than the run");
        return F[n - 1];
    };
    return s;
}

Source Source::decaying_sine() {
    return smooth([](double t) { return 3.5 * std::sin(t) * std::exp(-0.1 * t); });
}

Source Source::decaying_sine_sign() {
    // sign(3.5 sin(t) e^{-0.1t}) = sign(sin t); integrate the +-1 plateaus
    // between the crossings at multiples of pi.
    return averaged([](double t0, double t1) {
        const double pi = 3.14159265358979323846;
        double total = 0.0;
        long long k = static_cast<long long>(std::floor(t0 / pi));
        double a = t0;
        while (a < t1 - 1e-15) {
            double b = std::min((k + 1) * pi, t1);
            total += ((k % 2 + 2) % 2 == 0 ? 1.0 : -1.0) * (b - a);
            a = b;
            ++k;
        }
        return total / (t1 - t0);
    });
}

Source Source::square_wave(double t_flip) {
    return averaged([t_flip](double t0, double t1) {
        double up = std::clamp(t_flip - t0, 0.0, t1 - t0);
        return (2.0 * up - (t1 - t0)) / (t1 - t0);
    });
}

double Source::operator()(int n, double t_prev, double t_now) const {
    return fn_(n, t_prev, t_now);
}

double residual(const MonotoneCurve& a, const Model& m, const ModelState& state, double rhs,
                double U) {
    return a(U) + evaluate(m, state, U) - rhs;
}

namespace {

struct RootResult {
    double u;
    int iters;
    double rho;
};

// Expands a bracket around u0 by doubling, then closes in with a secant step
// safeguarded to stay inside the bracket (midpoint whenever the secant
// stalls or escapes).
RootResult bracket_solve(const MonotoneCurve& a, const Model& m, const ModelState& state,
                         double rhs, double u0, double width, double tol, int iters_used) {
    auto rho = [&](double U) { return residual(a, m, state, rhs, U); };
    // A curve-pair window can be ordered only on part of the line; probing
    // outside that set throws. Pull the probe back toward a point known to
    // be inside so a root sitting right at the domain's edge stays
    // reachable. A root strictly outside still fails the expansion loops.
    auto probe = [&](double x, double anchor) -> std::pair<double, double> {
        for (int i = 0;; ++i) {
            try {
                return {x, rho(x)};
            } catch (const ConstraintOrderViolation&) {
                if (i >= 80) throw;
                x = 0.5 * (x + anchor);
            }
        }
    };
    double lo, hi, flo, fhi;
    std::tie(lo, flo) = probe(u0 - width, u0);
    std::tie(hi, fhi) = probe(u0 + width, u0);
    int iters = iters_used + 2;
    for (int grow = 0; flo > 0.0; ++grow) {
        if (grow >= 64) throw NoConvergence("bracket expansion failed on the left");
        std::tie(lo, flo) = probe(lo - (hi - lo), lo);
        ++iters;
    }
    for (int grow = 0; fhi < 0.0; ++grow) {
        if (grow >= 64) throw NoConvergence("bracket expansion failed on the right");
        std::tie(hi, fhi) = probe(hi + (hi - lo), hi);
        ++iters;
    }
    if (std::abs(flo) <= tol) return {lo, iters, flo};
    if (std::abs(fhi) <= tol) return {hi, iters, fhi};
    int last_side = 0;  // +1 replaced hi, -1 replaced lo
    for (int i = 0; i < 200; ++i) {
        double x;
        if (fhi != flo) {
            x = hi - fhi * (hi - lo) / (fhi - flo);
            if (!(x > lo && x < hi) || last_side == 2 || last_side == -2)
                x = 0.5 * (lo + hi);
        } else {
            x = 0.5 * (lo + hi);
        }
        double fx = rho(x);
        ++iters;
        if (std::abs(fx) <= tol) return {x, iters, fx};
        if (fx < 0.0) {
            last_side = (last_side < 0) ? last_side - 1 : -1;
            lo = x;
            flo = fx;
        } else {
            last_side = (last_side > 0) ? last_side + 1 : 1;
            hi = x;
            fhi = fx;
        }
    }
    throw NoConvergence("bracketed solve exhausted its iterations");
}

}  // namespace

StepResult solve_step(const MonotoneCurve& a, const Model& m, const SolverConfig& cfg,
                      ModelState& state, double rhs) {
    const double tol = cfg.abs_tol + cfg.rel_tol * std::abs(rhs);
    const double scale = std::max(1.0, std::abs(state.u));
    const double start_width =
        std::max(std::abs(rhs - a(state.u) - evaluate(m, state, state.u)), 1e-8 * scale);

    auto finish = [&](double U, int iters, double rho, bool fell_back) {
        double w = step(m, state, U);
        return StepResult{U, w, iters, rho, fell_back};
    };

    if (cfg.method == SolverConfig::Method::Bracket) {
        RootResult r = bracket_solve(a, m, state, rhs, state.u, start_width, tol, 0);
        return finish(r.u, r.iters, r.rho, false);
    }

    const bool may_fall_back = cfg.method == SolverConfig::Method::NewtonWithBracketFallback;
    const int stall_limit = std::max(1, cfg.max_iter / 4);
    double U = state.u;
    double best = std::numeric_limits<double>::infinity();
    int stall = 0;
    int iters = 0;
    bool give_up = false;
    while (iters < cfg.max_iter) {
        double rho = residual(a, m, state, rhs, U);
        ++iters;
        if (std::abs(rho) <= tol) return finish(U, iters, rho, false);
        if (std::abs(rho) < best) {
            best = std::abs(rho);
            stall = 0;
        } else if (++stall >= stall_limit && may_fall_back) {
            give_up = true;
            break;
        }
        double slope;
        try {
            slope = a.slope(U) + evaluate_slope(m, state, U);
        } catch (const SlopeUnavailable&) {
            if (!may_fall_back) throw;
            give_up = true;
            break;
        }
        double next = U - rho / slope;
        if (!std::isfinite(next) || slope <= 0.0) {
            if (!may_fall_back)
                throw NoConvergence("Newton produced an unusable update");
            give_up = true;
            break;
        }
        U = next;
    }
    if (!may_fall_back) {
        std::ostringstream os;
        os << "Newton failed to reach |rho| <= " << tol << " in " << cfg.max_iter
           << " iterations";
        throw NoConvergence(os.str());
    }
    (void)give_up;
    RootResult r = bracket_solve(a, m, state, rhs, state.u, start_width, tol, iters);
    return finish(r.u, r.iters, r.rho, true);
}

OdeRun integrate(const OdeProblem& p, const SolverConfig& cfg, bool keep_v) {
    if (!(p.tau > 0.0)) throw BadInput("integrate needs tau > 0");
    for (std::size_t k = 0; k < p.model.size(); ++k)
        if (!p.model[k].trunc.lipschitz())
            throw BadInput("integrate: hysteron output has a jump; regularize or smooth it first");
    double steps = p.T / p.tau;
    long long N = std::llround(steps);
    if (N < 1 || std::abs(steps - static_cast<double>(N)) > 1e-9 * std::max(1.0, steps))
        throw BadInput("tau must divide T into whole steps");

    OdeRun run;
    ModelState state = init_state(p.model, p.u_init, p.init);
    double U = p.u_init;
    double W = evaluate(p.model, state, state.u);
    run.t.push_back(0.0);
    run.U.push_back(U);
    run.W.push_back(W);
    if (keep_v) run.V.push_back(state.v);

    const std::size_t K = p.model.size();
    std::vector<double> b_prev(K);
    for (std::size_t k = 0; k < K; ++k) b_prev[k] = p.model[k].trunc(state.v[k]);

    for (long long n = 1; n <= N; ++n) {
        double t0 = p.tau * (n - 1), t1 = p.tau * n;
        double F = p.source(static_cast<int>(n), t0, t1);
        double rhs = p.a(U) + W + p.tau * F;
        StepResult s = solve_step(p.a, p.model, cfg, state, rhs);

        double moved = std::abs(p.a(s.u) - p.a(U));
        for (std::size_t k = 0; k < K; ++k) {
            double b_now = p.model[k].trunc(state.v[k]);
            moved += p.model[k].mu * std::abs(b_now - b_prev[k]);
            b_prev[k] = b_now;
        }
        run.balance.push_back(std::abs(moved - p.tau * std::abs(F)));

        U = s.u;
        W = s.w;
        run.t.push_back(t1);
        run.U.push_back(U);
        run.W.push_back(W);
        run.iters.push_back(s.iters);
        run.residual.push_back(s.residual);
        if (keep_v) run.V.push_back(state.v);
        if (s.fell_back) ++run.fallback_steps;
    }
    run.final_state = std::move(state);
    return run;
}

double balance_check(const OdeRun& run) {
    double worst = 0.0;
    for (double d : run.balance) worst = std::max(worst, d);
    return worst;
}

ConvergenceTable convergence_study(const OdeProblem& p, const SolverConfig& cfg,
                                   const std::vector<double>& taus) {
    if (taus.size() < 2) throw BadInput("convergence_study needs at least two tau values");
    std::vector<double> sorted = taus;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double fine = sorted.back();
    sorted.pop_back();

    OdeProblem fp = p;
    fp.tau = fine;
    OdeRun fine_run = integrate(fp, cfg);

    ConvergenceTable table;
    for (double tau : sorted) {
        double ratio = tau / fine;
        long long k = std::llround(ratio);
        if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio)
            throw BadInput("each tau must be an integer multiple of the finest");
        OdeProblem cp = p;
        cp.tau = tau;
        OdeRun run = integrate(cp, cfg);
        double eu = 0.0, ew = 0.0;
        for (std::size_t n = 0; n < run.U.size(); ++n) {
            std::size_t j = n * static_cast<std::size_t>(k);
            eu = std::max(eu, std::abs(run.U[n] - fine_run.U[j]));
            ew = std::max(ew, std::abs(run.W[n] - fine_run.W[j]));
        }
        table.rows.push_back({tau, eu, ew});
    }

    auto fit = [&](auto pick) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double n = static_cast<double>(table.rows.size());
        for (const ConvergenceRow& row : table.rows) {
            double x = std::log(row.tau), y = std::log(pick(row));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    table.p_u = fit([](const ConvergenceRow& r) { return r.E_u; });
    table.p_w = fit([](const ConvergenceRow& r) { return r.E_w; });
    return table;
}

}  // namespace hyst
