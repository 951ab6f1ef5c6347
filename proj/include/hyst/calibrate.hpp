#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "hyst/model.hpp"

namespace hyst {

// Matched level samples of a bounding-curve pair: w strictly increasing,
// u_left[k] and u_right[k] the abscissae where the left and right curves
// attain w[k].
struct ScanningData {
    std::vector<double> w;
    std::vector<double> u_left;
    std::vector<double> u_right;

    // Inverts both curves at the given levels and validates the result.
    static ScanningData from_curves(const MonotoneCurve& gl, const MonotoneCurve& gr,
                                    const std::vector<double>& levels);

    void validate() const;  // sizes match, w strictly increasing, abscissae nondecreasing
};

// Output band swept by a calibration: [lo, hi] in w.
struct WRange {
    double lo;
    double hi;
};

// Region bounded below by the segment (alpha,w_min)-(beta,w_min), above by
// (A,w_max)-(B,w_max), and on the sides by monotone curves gl (through the
// left corners) and gr (through the right corners).
struct GeneralizedTrapezoid {
    double alpha = 0.0;
    double beta = 0.0;
    double A = 0.0;
    double B = 0.0;
    double w_min = 0.0;
    double w_max = 0.0;
    MonotoneCurve gl;
    MonotoneCurve gr;

    // Straight sides through the corners.
    static GeneralizedTrapezoid linear(double alpha, double beta, double A, double B,
                                       double w_min, double w_max);
    // Corners found by inverting the curves at w_min and w_max.
    static GeneralizedTrapezoid from_curves(const MonotoneCurve& gl, const MonotoneCurve& gr,
                                            WRange range);

    double height() const { return w_max - w_min; }
    // Same corners, straight sides.
    GeneralizedTrapezoid secant() const;

    // Corner ordering chain and sampled side ordering; throws BadInput.
    void validate() const;
};

// Irreducible fraction m/n.
struct RationalApprox {
    long long m;
    long long n;
    double value;
};

// Best fraction m/n for r under the budget m*n <= kmax: smallest |m/n - r|,
// ties broken by smaller m*n, then smaller m.
RationalApprox rational_approx(double r, long long kmax);

// Which side slope survives unchanged when the ratio is rounded to m/n.
enum class Pin { Left, Right };

struct TrapezoidCalibration {
    Model model;                    // m*n ramp hysterons
    GeneralizedTrapezoid adjusted;  // straight sides, one top corner moved
    long long m;
    long long n;
};

// Single hysteron with arbitrary window curves and identity output.
// Window ordering is enforced lazily, at evaluation time.
Model calibrate_generalized(const MonotoneCurve& gl, const MonotoneCurve& gr);

// K relay-like hysterons on uniform levels of the band. eps > 0 produces
// scaled-ramp rows [1/eps, alpha_k, beta_k, ScaledRamp(eps*h, eps*h)];
// eps = 0 produces unit steps (evaluation only: steps have no usable slope);
// smooth = true produces smooth steps instead (requires eps = 0).
Model calibrate_preisach(const MonotoneCurve& gl, const MonotoneCurve& gr, WRange range,
                         int K, double eps, bool smooth = false);

// Identity-output hysterons whose up-sweep from samples.front() reproduces
// the secant interpolant of gr. Weights are second differences of the secant
// slopes; a concave span yields NegativeWeight, an exactly straight span
// drops its zero-weight row.
Model calibrate_linear_play(const MonotoneCurve& gr, const std::vector<double>& samples);

// Steps: take side slopes from the corners, round their ratio to m/n under
// the budget, keep the pinned side's slope, recompute the other, and lay out
// m*n equal hysterons whose alpha values form m groups of n spaced h_star
// (dual for beta). The free top corner moves to the adjusted position.
TrapezoidCalibration calibrate_trapezoid(const GeneralizedTrapezoid& t, long long kmax,
                                         Pin pin = Pin::Left);

struct Uniform {};
struct Adaptive {
    double tol;  // sup secant-vs-curve deviation allowed per slab side
};
using PartitionStrategy = std::variant<Uniform, Adaptive>;

// Stack of slabs covering the band, adjacent slabs sharing corners exactly.
// Uniform: I equal levels. Adaptive: start from I equal levels, then bisect
// the slab with the worst side deviation until all are within tol.
std::vector<GeneralizedTrapezoid> partition_range(const MonotoneCurve& gl,
                                                  const MonotoneCurve& gr, WRange range, int I,
                                                  const PartitionStrategy& strategy);

struct HierarchicalResult {
    Model model;
    std::vector<long long> slab_k;  // hysterons per slab in the accepted pass
    int q_used = 0;                 // accepted pass number
    double boundary_err = 0.0;
    bool budget_exceeded = false;   // no pass met tol; best pass returned
};

// Covers the band with slabs and calibrates each one, pinning every slab's
// bottom corners to the previous slab's adjusted top corners so the stack
// stays connected. Passes q = 1..qmax rerun the whole stack with the
// per-slab budget halved each time; the result is the cheapest pass whose
// boundary error meets tol.
HierarchicalResult calibrate_hierarchical(const MonotoneCurve& gl, const MonotoneCurve& gr,
                                          WRange range, int I, const PartitionStrategy& strategy,
                                          long long kmax_per_slab, int qmax, double tol,
                                          Pin pin = Pin::Right);

// Sup vertical distance between the model's swept boundary and the curve
// pair, over an up-down sweep of the model's own saturation span. The
// reference is shifted to start at zero and clipped to the model's total
// height. Requires bounded outputs and affine windows (NotApplicable).
double boundary_error(const Model& m, const MonotoneCurve& gl, const MonotoneCurve& gr,
                      int n_samples = 2001);

// Smallest u in [u_lo, u_hi] where the gap gl - gr closes, found by
// bisection; BadInput when the gap does not change sign.
double curve_crossing(const MonotoneCurve& gl, const MonotoneCurve& gr, double u_lo,
                      double u_hi);

}  // namespace hyst
