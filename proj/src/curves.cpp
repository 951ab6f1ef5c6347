#include "hyst/curves.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "hyst/errors.hpp"

namespace hyst {

namespace {

std::mutex registry_mutex;
std::map<std::string, ClosedFormDef>& registry() {
    static std::map<std::string, ClosedFormDef> r;
    return r;
}

// Two strictly increasing demo curves forming a convex/concave lens on [1, 3]:
// the lower one is a convex quadratic, the upper one its point reflection
// about the lens center (2, 7/3).
void register_builtins_locked() {
    static bool done = false;
    if (done) return;
    done = true;
    auto quad = [](double u) { return (u - 1.0) * (u - 1.0) + (u - 1.0) / 3.0; };
    auto quad_slope = [](double u) { return 2.0 * (u - 1.0) + 1.0 / 3.0; };
    registry()["quadlens_right"] = ClosedFormDef{quad, quad_slope, 1.0, 3.0};
    registry()["quadlens_left"] = ClosedFormDef{
        [quad](double u) { return 14.0 / 3.0 - quad(4.0 - u); },
        [quad_slope](double u) { return quad_slope(4.0 - u); }, 1.0, 3.0};
}

}  // namespace

void register_closed_form(const std::string& name, ClosedFormDef def) {
    if (!def.fn || !def.slope || !(def.lo < def.hi))
        throw BadInput("closed-form definition needs fn, slope and lo < hi");
    std::lock_guard<std::mutex> lock(registry_mutex);
    register_builtins_locked();
    registry()[name] = std::move(def);
}

bool closed_form_registered(const std::string& name) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    register_builtins_locked();
    return registry().count(name) > 0;
}

struct MonotoneCurve::Impl {
    Kind kind = Kind::Identity;
    double c = 0.0;
    double V = 0.0, B = 0.0;
    std::vector<CurvePoint> pts;
    std::string name;
    ClosedFormDef def;
};

MonotoneCurve::MonotoneCurve() : MonotoneCurve(std::make_shared<const Impl>()) {}
MonotoneCurve::MonotoneCurve(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

MonotoneCurve MonotoneCurve::identity() { return MonotoneCurve(); }

MonotoneCurve MonotoneCurve::affine_shift(double c) {
    if (!std::isfinite(c)) throw BadInput("affine shift must be finite");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::AffineShift;
    impl->c = c;
    return MonotoneCurve(std::move(impl));
}

MonotoneCurve MonotoneCurve::piecewise_linear(std::vector<CurvePoint> pts) {
    if (pts.size() < 2) throw BadInput("piecewise-linear curve needs at least two points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y))
            throw BadInput("piecewise-linear point is not finite");
        if (i > 0 && !(pts[i - 1].x < pts[i].x))
            throw BadInput("piecewise-linear x coordinates must be strictly increasing");
        if (i > 0 && pts[i - 1].y > pts[i].y)
            throw BadInput("piecewise-linear y coordinates must be nondecreasing");
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::PiecewiseLinear;
    impl->pts = std::move(pts);
    return MonotoneCurve(std::move(impl));
}

MonotoneCurve MonotoneCurve::langmuir(double V, double B) {
    if (!(V > 0.0) || !(B > 0.0) || !std::isfinite(V) || !std::isfinite(B))
        throw BadInput("langmuir parameters must be finite and positive");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Langmuir;
    impl->V = V;
    impl->B = B;
    return MonotoneCurve(std::move(impl));
}

MonotoneCurve MonotoneCurve::closed_form(const std::string& name) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    register_builtins_locked();
    auto it = registry().find(name);
    if (it == registry().end()) throw BadInput("unknown closed-form curve: " + name);
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::ClosedForm;
    impl->name = name;
    impl->def = it->second;
    return MonotoneCurve(std::move(impl));
}

namespace {

// Index of the segment [pts[i], pts[i+1]] whose half-open cover (x_i, x_{i+1}]
// contains u; clamped to the end segments. Breakpoints answer exactly.
std::size_t segment_left_of(const std::vector<CurvePoint>& pts, double u) {
    if (u <= pts.front().x) return 0;
    auto it = std::lower_bound(pts.begin(), pts.end(), u,
                               [](const CurvePoint& p, double v) { return p.x < v; });
    std::size_t i = static_cast<std::size_t>(it - pts.begin());
    if (i >= pts.size()) return pts.size() - 2;
    return i == 0 ? 0 : i - 1;
}

double seg_slope(const std::vector<CurvePoint>& pts, std::size_t i) {
    return (pts[i + 1].y - pts[i].y) / (pts[i + 1].x - pts[i].x);
}

double closed_form_eval(const ClosedFormDef& d, double u) {
    if (u < d.lo) return d.fn(d.lo) + d.slope(d.lo) * (u - d.lo);
    if (u > d.hi) return d.fn(d.hi) + d.slope(d.hi) * (u - d.hi);
    return d.fn(u);
}

}  // namespace

double MonotoneCurve::operator()(double u) const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case Kind::Identity: return u;
        case Kind::AffineShift: return u - im.c;
        case Kind::Langmuir:
            return u < 0.0 ? im.V * im.B * u : im.V * im.B * u / (1.0 + im.B * u);
        case Kind::ClosedForm: return closed_form_eval(im.def, u);
        case Kind::PiecewiseLinear: {
            const auto& p = im.pts;
            std::size_t i = segment_left_of(p, u);
            if (u == p[i].x) return p[i].y;
            if (u == p[i + 1].x) return p[i + 1].y;
            return p[i].y + seg_slope(p, i) * (u - p[i].x);
        }
    }
    throw Error("unreachable curve kind");
}

double MonotoneCurve::slope(double u) const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case Kind::Identity:
        case Kind::AffineShift: return 1.0;
        case Kind::Langmuir: {
            if (u < 0.0) return im.V * im.B;
            double d = 1.0 + im.B * u;
            return im.V * im.B / (d * d);
        }
        case Kind::ClosedForm: {
            if (u < im.def.lo) return im.def.slope(im.def.lo);
            if (u > im.def.hi) return im.def.slope(im.def.hi);
            return im.def.slope(u);
        }
        case Kind::PiecewiseLinear: {
            const auto& p = im.pts;
            if (u <= p.front().x) return seg_slope(p, 0);
            // Left-sided: a breakpoint reports the slope of the segment ending there.
            auto it = std::lower_bound(p.begin(), p.end(), u,
                                       [](const CurvePoint& q, double v) { return q.x < v; });
            std::size_t i = static_cast<std::size_t>(it - p.begin());
            if (i >= p.size()) return seg_slope(p, p.size() - 2);
            return seg_slope(p, i - 1);
        }
    }
    throw Error("unreachable curve kind");
}

namespace {

double pwl_inverse(const std::vector<CurvePoint>& p, double w, bool want_min) {
    const double ylo = p.front().y, yhi = p.back().y;
    if (w < ylo) {
        double s = seg_slope(p, 0);
        if (s > 0.0) return p.front().x + (w - ylo) / s;
        throw OutOfRange("value below curve range");
    }
    if (w > yhi) {
        double s = seg_slope(p, p.size() - 2);
        if (s > 0.0) return p.back().x + (w - yhi) / s;
        throw OutOfRange("value above curve range");
    }
    if (want_min) {
        // First breakpoint at or above w; exact hits answer with the breakpoint.
        auto it = std::lower_bound(p.begin(), p.end(), w,
                                   [](const CurvePoint& q, double v) { return q.y < v; });
        std::size_t j = static_cast<std::size_t>(it - p.begin());
        if (p[j].y == w) return p[j].x;
        return p[j - 1].x + (w - p[j - 1].y) / seg_slope(p, j - 1);
    }
    // Last breakpoint at or below w.
    auto it = std::upper_bound(p.begin(), p.end(), w,
                               [](double v, const CurvePoint& q) { return v < q.y; });
    std::size_t j = static_cast<std::size_t>(it - p.begin()) - 1;
    if (p[j].y == w) return p[j].x;
    return p[j].x + (w - p[j].y) / seg_slope(p, j);
}

double closed_form_inverse(const ClosedFormDef& d, double w) {
    double flo = d.fn(d.lo), fhi = d.fn(d.hi);
    if (w < flo) {
        double s = d.slope(d.lo);
        if (s > 0.0) return d.lo + (w - flo) / s;
        throw OutOfRange("value below curve range");
    }
    if (w > fhi) {
        double s = d.slope(d.hi);
        if (s > 0.0) return d.hi + (w - fhi) / s;
        throw OutOfRange("value above curve range");
    }
    double a = d.lo, b = d.hi;
    for (int i = 0; i < 200 && b - a > 1e-16 * std::max(1.0, std::abs(a)); ++i) {
        double m = 0.5 * (a + b);
        if (d.fn(m) < w)
            a = m;
        else
            b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace

double MonotoneCurve::inverse_min(double w) const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case Kind::Identity: return w;
        case Kind::AffineShift: return w + im.c;
        case Kind::Langmuir:
            if (w >= im.V) throw OutOfRange("value at or above langmuir saturation");
            return w < 0.0 ? w / (im.V * im.B) : w / (im.B * (im.V - w));
        case Kind::ClosedForm: return closed_form_inverse(im.def, w);
        case Kind::PiecewiseLinear: return pwl_inverse(im.pts, w, true);
    }
    throw Error("unreachable curve kind");
}

double MonotoneCurve::inverse_max(double w) const {
    const Impl& im = *impl_;
    if (im.kind == Kind::PiecewiseLinear) return pwl_inverse(im.pts, w, false);
    return inverse_min(w);
}

MonotoneCurve::Kind MonotoneCurve::kind() const { return impl_->kind; }

double MonotoneCurve::shift() const {
    if (impl_->kind != Kind::AffineShift) throw BadInput("curve is not an affine shift");
    return impl_->c;
}

const std::vector<CurvePoint>& MonotoneCurve::points() const {
    if (impl_->kind != Kind::PiecewiseLinear) throw BadInput("curve is not piecewise linear");
    return impl_->pts;
}

double MonotoneCurve::langmuir_V() const {
    if (impl_->kind != Kind::Langmuir) throw BadInput("curve is not langmuir");
    return impl_->V;
}

double MonotoneCurve::langmuir_B() const {
    if (impl_->kind != Kind::Langmuir) throw BadInput("curve is not langmuir");
    return impl_->B;
}

const std::string& MonotoneCurve::name() const {
    if (impl_->kind != Kind::ClosedForm) throw BadInput("curve is not a registered closed form");
    return impl_->name;
}

bool operator==(const MonotoneCurve& a, const MonotoneCurve& b) {
    const auto& x = *a.impl_;
    const auto& y = *b.impl_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case MonotoneCurve::Kind::Identity: return true;
        case MonotoneCurve::Kind::AffineShift: return x.c == y.c;
        case MonotoneCurve::Kind::Langmuir: return x.V == y.V && x.B == y.B;
        case MonotoneCurve::Kind::ClosedForm: return x.name == y.name;
        case MonotoneCurve::Kind::PiecewiseLinear: {
            if (x.pts.size() != y.pts.size()) return false;
            for (std::size_t i = 0; i < x.pts.size(); ++i)
                if (x.pts[i].x != y.pts[i].x || x.pts[i].y != y.pts[i].y) return false;
            return true;
        }
    }
    return false;
}

}  // namespace hyst
