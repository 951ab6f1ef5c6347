#include "hyst/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "hyst/errors.hpp"

namespace hyst {

namespace {

int thread_budget(std::size_t cells) {
    int want = 0;
    if (const char* env = std::getenv("HYST_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 0)
            throw BadInput("HYST_THREADS must be a nonnegative integer");
        want = static_cast<int>(v);
    }
    if (want == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        want = hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
    }
    if (cells < 512) want = 1;  // per-cell solves too cheap to farm out
    return std::max(1, static_cast<int>(std::min<std::size_t>(want, cells)));
}

double ghost_value(const PdeProblem& p, double t) { return p.inflow ? p.inflow(t) : 0.0; }

}  // namespace

CflReport cfl_check(const PdeProblem& p, double u_lo, double u_hi) {
    if (u_hi < u_lo) std::swap(u_lo, u_hi);
    constexpr int kProbes = 1025;
    double speed = 0.0;
    for (int i = 0; i < kProbes; ++i) {
        double u = u_lo + (u_hi - u_lo) * i / (kProbes - 1);
        speed = std::max(speed, p.flux.slope(u));
    }
    return {speed, p.lambda * speed <= 1.0 + 1e-12};
}

GridState init_grid(const PdeProblem& p) {
    if (!(p.h > 0.0) || !(p.x_max > p.x_min)) throw BadInput("grid needs h > 0 and x_max > x_min");
    if (!(p.lambda > 0.0)) throw BadInput("grid needs lambda > 0");
    if (!p.u_init) throw BadInput("grid needs initial data");
    for (std::size_t k = 0; k < p.model.size(); ++k)
        if (!p.model[k].trunc.lipschitz())
            throw BadInput("init_grid: hysteron output has a jump; regularize or smooth it first");
    double cells = (p.x_max - p.x_min) / p.h;
    long long J = std::llround(cells);
    if (J < 1 || std::abs(cells - static_cast<double>(J)) > 1e-9 * std::max(1.0, cells))
        throw BadInput("h must divide the domain into whole cells");

    GridState s;
    s.N = static_cast<long long>(std::ceil(p.T / (p.lambda * p.h) - 1e-9));
    if (s.N < 1) throw BadInput("T too small for one step");
    s.tau = p.T / static_cast<double>(s.N);
    s.x.resize(J);
    s.U.resize(J);
    s.W.resize(J);
    s.cell.reserve(J);
    double u_lo = 0.0, u_hi = 0.0;
    for (long long j = 0; j < J; ++j) {
        s.x[j] = p.x_min + p.h * static_cast<double>(j + 1);
        s.U[j] = p.u_init(s.x[j]);
        u_lo = std::min(u_lo, s.U[j]);
        u_hi = std::max(u_hi, s.U[j]);
        ModelState st = init_state(p.model, s.U[j]);
        if (p.rest == CellRest::Right)
            for (std::size_t k = 0; k < p.model.size(); ++k)
                st.v[k] = p.model[k].right(s.U[j]);
        s.W[j] = evaluate(p.model, st, s.U[j]);
        s.cell.push_back(std::move(st));
    }
    if (p.inflow) {
        for (int i = 0; i <= 1024; ++i) {
            double phi = p.inflow(p.T * i / 1024.0);
            u_lo = std::min(u_lo, phi);
            u_hi = std::max(u_hi, phi);
        }
    }
    CflReport cfl = cfl_check(p, u_lo, u_hi);
    if (!cfl.ok) {
        std::ostringstream os;
        os << "CFL violated: lambda * max flux slope = " << p.lambda * cfl.max_speed << " > 1";
        throw BadInput(os.str());
    }
    return s;
}

void pde_step(const PdeProblem& p, GridState& s) {
    const std::size_t J = s.U.size();
    const double t_new = s.tau * static_cast<double>(s.n + 1);
    const double lam = s.tau / p.h;
    const double ghost = ghost_value(p, t_new);

    std::vector<double> U_new(J), W_new(J);
    int threads = thread_budget(J);
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&](std::size_t j_begin, std::size_t j_end) {
        try {
            for (std::size_t j = j_begin; j < j_end; ++j) {
                double left = (j == 0) ? ghost : s.U[j - 1];
                double rhs = p.a(s.U[j]) + s.W[j] - lam * (p.flux(s.U[j]) - p.flux(left));
                try {
                    StepResult r = solve_step(p.a, p.model, p.solver, s.cell[j], rhs);
                    U_new[j] = r.u;
                    W_new[j] = r.w;
                } catch (const NoConvergence& e) {
                    std::ostringstream os;
                    os << "cell " << (j + 1) << " at step " << (s.n + 1) << ": " << e.what();
                    throw NoConvergence(os.str());
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (threads == 1) {
        work(0, J);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        std::size_t chunk = (J + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::size_t b = std::min(J, chunk * static_cast<std::size_t>(t));
            std::size_t e = std::min(J, b + chunk);
            pool.emplace_back(work, b, e);
        }
        for (std::thread& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    s.U = std::move(U_new);
    s.W = std::move(W_new);
    ++s.n;
}

PdeRun integrate(const PdeProblem& p, const std::vector<double>& snapshot_times,
                 int trace_stride) {
    GridState s = init_grid(p);
    const std::size_t J = s.U.size();

    std::vector<long long> snap_step;
    snap_step.reserve(snapshot_times.size());
    for (double t : snapshot_times)
        snap_step.push_back(std::clamp<long long>(std::llround(t / s.tau), 0, s.N));

    PdeRun run;
    run.x = s.x;

    auto take_snapshots = [&](long long n) {
        for (std::size_t i = 0; i < snap_step.size(); ++i) {
            if (snap_step[i] != n) continue;
            run.snapshot_times.push_back(s.tau * static_cast<double>(n));
            run.snapshots_u.push_back(s.U);
            run.snapshots_w.push_back(s.W);
        }
    };
    auto take_trace = [&](long long n) {
        if (trace_stride <= 0 || n % trace_stride != 0) return;
        for (std::size_t j = 0; j < J; j += static_cast<std::size_t>(trace_stride))
            run.trace.emplace_back(s.U[j], s.W[j]);
    };

    auto mass = [&]() {
        double total = 0.0;
        for (std::size_t j = 0; j < J; ++j) total += (p.a(s.U[j]) + s.W[j]) * p.h;
        return total;
    };

    take_snapshots(0);
    take_trace(0);
    double mass_prev = mass();
    std::vector<double> aU_prev(J), W_prev = s.W;
    for (std::size_t j = 0; j < J; ++j) aU_prev[j] = p.a(s.U[j]);

    while (s.n < s.N) {
        double outflow = p.flux(s.U[J - 1]);
        double ghost = ghost_value(p, s.tau * static_cast<double>(s.n + 1));
        pde_step(p, s);

        double expected = s.tau * (p.flux(ghost) - outflow);
        double mass_now = mass();
        run.conservation_defect =
            std::max(run.conservation_defect, std::abs(mass_now - mass_prev - expected));
        mass_prev = mass_now;

        std::vector<double> aU_now(J);
        for (std::size_t j = 0; j < J; ++j) aU_now[j] = p.a(s.U[j]);
        double tv = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            tv += p.h * (std::abs(aU_now[j] - aU_prev[j]) + std::abs(s.W[j] - W_prev[j]));
            if (j > 0)
                tv += s.tau *
                      (std::abs(aU_now[j] - aU_now[j - 1]) + std::abs(s.W[j] - s.W[j - 1]));
        }
        aU_prev = std::move(aU_now);
        W_prev = s.W;
        run.tv_t += tv;

        take_snapshots(s.n);
        take_trace(s.n);
    }
    run.final_state = std::move(s);
    return run;
}

PdeConvergenceTable pde_convergence(const PdeProblem& p, const std::vector<double>& hs) {
    if (hs.size() < 2) throw BadInput("pde_convergence needs at least two h values");
    std::vector<double> sorted = hs;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double fine = sorted.back();
    sorted.pop_back();

    PdeProblem fp = p;
    fp.h = fine;
    PdeRun fine_run = integrate(fp, {}, 0);
    const std::vector<double>& Uf = fine_run.final_state.U;

    PdeConvergenceTable table;
    for (double h : sorted) {
        double ratio = h / fine;
        long long k = std::llround(ratio);
        if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio)
            throw BadInput("each h must be an integer multiple of the finest");
        PdeProblem cp = p;
        cp.h = h;
        PdeRun run = integrate(cp, {}, 0);
        const std::vector<double>& U = run.final_state.U;
        double err = 0.0;
        for (std::size_t j = 0; j < U.size(); ++j) {
            std::size_t jf = (j + 1) * static_cast<std::size_t>(k) - 1;
            err += std::abs(U[j] - Uf[jf]);
        }
        table.rows.push_back({h, h * err});
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(table.rows.size());
    for (const PdeConvergenceRow& row : table.rows) {
        double x = std::log(row.h), y = std::log(row.E_h);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    table.p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return table;
}

}  // namespace hyst
