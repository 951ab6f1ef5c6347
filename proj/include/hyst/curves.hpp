#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hyst {

struct CurvePoint {
    double x;
    double y;
};

// Closed-form curve body used by the registry. fn must be continuous and
// nondecreasing on [lo, hi]; outside the domain the curve continues along
// the tangent at the nearest endpoint.
struct ClosedFormDef {
    std::function<double(double)> fn;
    std::function<double(double)> slope;
    double lo;
    double hi;
};

void register_closed_form(const std::string& name, ClosedFormDef def);
bool closed_form_registered(const std::string& name);

// Continuous nondecreasing scalar function on the whole real line, with
// one-sided slopes and endpoint inverses. Immutable and cheap to copy.
class MonotoneCurve {
  public:
    enum class Kind { Identity, AffineShift, PiecewiseLinear, Langmuir, ClosedForm };

    MonotoneCurve();  // identity

    static MonotoneCurve identity();
    // u -> u - c
    static MonotoneCurve affine_shift(double c);
    // Interpolates the given breakpoints; continues linearly with the end
    // segment slopes outside the breakpoint span. x strictly increasing,
    // y nondecreasing, at least two points.
    static MonotoneCurve piecewise_linear(std::vector<CurvePoint> pts);
    // u -> V*B*u / (1 + B*u) for u >= 0, tangent extension V*B*u for u < 0.
    static MonotoneCurve langmuir(double V, double B);
    // Looks up a registered closed-form body by name.
    static MonotoneCurve closed_form(const std::string& name);

    double operator()(double u) const;
    // Left-sided derivative at kinks; end segment slope outside the span.
    double slope(double u) const;
    // Smallest / largest u attaining value w. When w is attained within the
    // breakpoint span the answer stays inside it; values beyond the span are
    // reachable only through an end extension with positive slope, otherwise
    // OutOfRange is thrown.
    double inverse_min(double w) const;
    double inverse_max(double w) const;

    Kind kind() const;
    double shift() const;                       // AffineShift only
    const std::vector<CurvePoint>& points() const;  // PiecewiseLinear only
    double langmuir_V() const;                  // Langmuir only
    double langmuir_B() const;                  // Langmuir only
    const std::string& name() const;            // ClosedForm only

    // Structural equality: same kind and parameters (closed forms by name).
    friend bool operator==(const MonotoneCurve& a, const MonotoneCurve& b);

  private:
    struct Impl;
    explicit MonotoneCurve(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

}  // namespace hyst
