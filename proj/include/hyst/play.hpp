#pragma once

#include "hyst/curves.hpp"

namespace hyst {

// Relative tolerance for the lower <= upper constraint ordering check.
inline constexpr double kOrderTol = 1e-12;

// Projects s onto [lo, hi]. Throws ConstraintOrderViolation when lo exceeds
// hi beyond kOrderTol * max(1, |lo|, |hi|); a violation within the tolerance
// collapses the interval to its midpoint.
double checked_clamp(double lo, double hi, double s);

// One deterministic update of a play state: clamp the carried value vbar to
// the window [right(u), left(u)].
double play_update(const MonotoneCurve& left, const MonotoneCurve& right,
                   double vbar, double u);

// Output shaping applied to a play state. All variants are nondecreasing;
// heights are exact for the ramp family and a supremum for the smooth step.
class Truncation {
  public:
    enum class Kind { Identity, Ramp, ScaledRamp, Heaviside, SmoothErf };

    Truncation();  // identity

    static Truncation identity();
    // clamp(s, 0, h)
    static Truncation ramp(double h);
    // (h/eps) * clamp(s, 0, eps): reaches height h over a width-eps rise.
    static Truncation scaled_ramp(double h, double eps);
    // Left-continuous step: 0 for s <= 0, h for s > 0. Has no slope.
    static Truncation heaviside(double h);
    // (h/2) * (erf(2s/h - 1) + 1): smooth, strictly increasing, height h.
    static Truncation smooth_erf(double h);

    double operator()(double s) const;
    // Left-sided derivative; throws SlopeUnavailable for the step.
    double slope(double s) const;
    // True when the map has a finite Lipschitz constant.
    bool lipschitz() const;
    // Supremum of the output range (infinity for identity).
    double height() const;

    Kind kind() const;
    double h() const;    // Ramp, ScaledRamp, Heaviside, SmoothErf
    double eps() const;  // ScaledRamp only

    friend bool operator==(const Truncation& a, const Truncation& b);

  private:
    Kind kind_ = Kind::Identity;
    double h_ = 0.0;
    double eps_ = 0.0;
};

}  // namespace hyst
