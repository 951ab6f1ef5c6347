#pragma once

#include <functional>
#include <vector>

#include "hyst/model.hpp"

namespace hyst {

// Per-step forcing value F^n. Smooth sources sample at the step's right
// endpoint; discontinuous ones take the exact cell average so the step sum
// telescopes the integral of f.
class Source {
  public:
    Source();  // zero

    static Source smooth(std::function<double(double)> f);
    static Source averaged(std::function<double(double, double)> cell_avg);
    static Source samples(std::vector<double> F);  // F^1..F^N, one per step
    // 3.5 sin(t) e^{-0.1 t}
    static Source decaying_sine();
    // sign of decaying_sine: sign(sin t), averaged exactly over each step
    static Source decaying_sine_sign();
    // +1 before t_flip, -1 after, averaged exactly over each step
    static Source square_wave(double t_flip);

    // n is 1-based; (t_prev, t_now] is the step.
    double operator()(int n, double t_prev, double t_now) const;

  private:
    std::function<double(int, double, double)> fn_;
};

struct OdeProblem {
    MonotoneCurve a;  // strongly monotone accumulation term
    Model model;
    Source source;
    double u_init = 0.0;
    InitPolicy init = LeftCurveInit{};
    double T = 1.0;
    double tau = 0.1;
};

struct SolverConfig {
    enum class Method { Newton, Bracket, NewtonWithBracketFallback };
    Method method = Method::NewtonWithBracketFallback;
    double abs_tol = 1e-14;
    double rel_tol = 1e-6;
    int max_iter = 100;
};

// rho(U) = a(U) + evaluate(model, state, U) - rhs; strictly increasing in U.
double residual(const MonotoneCurve& a, const Model& m, const ModelState& state, double rhs,
                double U);

struct StepResult {
    double u;
    double w;
    int iters;
    double residual;
    bool fell_back;  // Newton gave up and the bracketed solve finished
};

// Solves rho(U) = 0 to |rho| <= abs_tol + rel_tol*|rhs| and commits the
// state. Newton starts from state.u; the bracketed solve expands an interval
// around state.u by doubling, then runs a secant-bisection hybrid that never
// leaves the bracket. Throws NoConvergence (pure Newton only, or a bracket
// that fails to capture a sign change).
StepResult solve_step(const MonotoneCurve& a, const Model& m, const SolverConfig& cfg,
                      ModelState& state, double rhs);

struct OdeRun {
    std::vector<double> t;         // t_0..t_N
    std::vector<double> U;
    std::vector<double> W;
    std::vector<int> iters;        // per step, index n-1
    std::vector<double> residual;  // per step
    std::vector<double> balance;   // per step: | |da| + sum mu|db_k| - tau|F^n| |
    std::vector<std::vector<double>> V;  // internal values per sample when kept
    int fallback_steps = 0;
    ModelState final_state;
};

// Runs N = T/tau steps of the implicit scheme
//   a(U^n) + G(V^{n-1}; U^n) = a(U^{n-1}) + W^{n-1} + tau F^n
// carrying the committed W so the left side telescopes exactly.
OdeRun integrate(const OdeProblem& p, const SolverConfig& cfg, bool keep_v = false);

// Worst per-step defect of the balance identity collected during the run.
double balance_check(const OdeRun& run);

struct ConvergenceRow {
    double tau;
    double E_u;  // max_n |U^n - U_fine| on shared time points
    double E_w;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // one per tau, coarse to fine, proxy excluded
    double p_u;                        // log-log least squares slope of E_u
    double p_w;
};

// Reruns the problem at each tau; the finest tau is the proxy for the true
// solution and is excluded from the rows. Every tau must be an integer
// multiple of the finest.
ConvergenceTable convergence_study(const OdeProblem& p, const SolverConfig& cfg,
                                   const std::vector<double>& taus);

}  // namespace hyst
