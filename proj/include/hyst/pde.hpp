#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hyst/ode.hpp"

namespace hyst {

// Which window bound freshly sampled cells rest on. Left is the descending
// boundary curve; Right matches a medium loaded by a rising sweep.
enum class CellRest { Left, Right };

// 1-D transport d/dt(a(u) + w) + d/dx flux(u) = 0 with upwind explicit flux
// and an implicit per-cell hysteresis solve. Cells sit at x_j = x_min + j*h,
// j = 1..J; the inflow function supplies the ghost value left of cell 1.
struct PdeProblem {
    MonotoneCurve a;
    MonotoneCurve flux;  // nondecreasing: transport is rightward
    Model model;
    double x_min = 0.0;
    double x_max = 1.0;
    double h = 0.1;
    std::function<double(double)> u_init;
    std::function<double(double)> inflow;  // phi(t); empty means zero
    CellRest rest = CellRest::Left;
    double T = 1.0;
    double lambda = 0.9;  // target tau/h; tau is snapped so N steps reach T
    SolverConfig solver;
};

struct GridState {
    std::vector<double> x;
    std::vector<double> U;
    std::vector<double> W;
    std::vector<ModelState> cell;
    long long n = 0;  // completed steps
    double tau = 0.0;
    long long N = 0;  // steps to reach T
};

struct CflReport {
    double max_speed;
    bool ok;
};

// Steepest flux slope sampled over [u_lo, u_hi]; ok iff lambda * slope <= 1.
CflReport cfl_check(const PdeProblem& p, double u_lo, double u_hi);

// Samples the initial data, rests every cell per p.rest, snaps tau, and
// verifies the CFL bound over the initial data and inflow range; throws
// BadInput when the bound fails.
GridState init_grid(const PdeProblem& p);

// One step: explicit upwind flux differences assembled from time level n,
// then each cell solves its implicit problem independently. Cell work is
// split across HYST_THREADS threads (0 or unset picks a machine default);
// the result is identical for any split.
void pde_step(const PdeProblem& p, GridState& s);

struct PdeRun {
    std::vector<double> x;
    std::vector<double> snapshot_times;            // actual step times used
    std::vector<std::vector<double>> snapshots_u;
    std::vector<std::vector<double>> snapshots_w;
    std::vector<std::pair<double, double>> trace;  // (U, W) cloud over cells and steps
    double conservation_defect = 0.0;  // worst per-step mass ledger mismatch
    double tv_t = 0.0;  // space-time variation of a(U) and W together
    GridState final_state;
};

// Runs to T collecting snapshots at the steps nearest the requested times.
// trace_stride thins the (U, W) cloud in both space and time; 0 disables it.
PdeRun integrate(const PdeProblem& p, const std::vector<double>& snapshot_times,
                 int trace_stride = 1);

struct PdeConvergenceRow {
    double h;
    double E_h;  // h * sum_j |U_j - U_fine(x_j)| at final time
};

struct PdeConvergenceTable {
    std::vector<PdeConvergenceRow> rows;  // proxy excluded
    double p;                             // log-log least squares slope
};

// Reruns the problem at each h; the finest h is the proxy. Every h must be
// an integer multiple of the finest so cells align.
PdeConvergenceTable pde_convergence(const PdeProblem& p, const std::vector<double>& hs);

}  // namespace hyst
