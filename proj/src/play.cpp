#include "hyst/play.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hyst/errors.hpp"

namespace hyst {

double checked_clamp(double lo, double hi, double s) {
    if (lo > hi) {
        double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
        if (lo > hi + kOrderTol * scale) {
            std::ostringstream os;
            os << "constraint order violated: lower " << lo << " > upper " << hi;
            throw ConstraintOrderViolation(os.str());
        }
        return 0.5 * (lo + hi);
    }
    return std::min(std::max(s, lo), hi);
}

double play_update(const MonotoneCurve& left, const MonotoneCurve& right,
                   double vbar, double u) {
    return checked_clamp(right(u), left(u), vbar);
}

Truncation::Truncation() = default;

Truncation Truncation::identity() { return Truncation(); }

Truncation Truncation::ramp(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw BadInput("ramp height must be finite and positive");
    Truncation t;
    t.kind_ = Kind::Ramp;
    t.h_ = h;
    return t;
}

Truncation Truncation::scaled_ramp(double h, double eps) {
    if (!(h > 0.0) || !std::isfinite(h)) throw BadInput("ramp height must be finite and positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw BadInput("ramp width must be finite and positive");
    Truncation t;
    t.kind_ = Kind::ScaledRamp;
    t.h_ = h;
    t.eps_ = eps;
    return t;
}

Truncation Truncation::heaviside(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw BadInput("step height must be finite and positive");
    Truncation t;
    t.kind_ = Kind::Heaviside;
    t.h_ = h;
    return t;
}

Truncation Truncation::smooth_erf(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw BadInput("step height must be finite and positive");
    Truncation t;
    t.kind_ = Kind::SmoothErf;
    t.h_ = h;
    return t;
}

double Truncation::operator()(double s) const {
    switch (kind_) {
        case Kind::Identity: return s;
        case Kind::Ramp: return std::min(std::max(s, 0.0), h_);
        case Kind::ScaledRamp: return (h_ / eps_) * std::min(std::max(s, 0.0), eps_);
        case Kind::Heaviside: return s > 0.0 ? h_ : 0.0;
        case Kind::SmoothErf: return 0.5 * h_ * (std::erf(2.0 * s / h_ - 1.0) + 1.0);
    }
    return s;
}

double Truncation::slope(double s) const {
    switch (kind_) {
        case Kind::Identity: return 1.0;
        case Kind::Ramp: return (s > 0.0 && s <= h_) ? 1.0 : 0.0;
        case Kind::ScaledRamp: return (s > 0.0 && s <= eps_) ? h_ / eps_ : 0.0;
        case Kind::Heaviside: throw SlopeUnavailable("step truncation has no slope");
        case Kind::SmoothErf: {
            double z = 2.0 * s / h_ - 1.0;
            return 2.0 * std::numbers::inv_sqrtpi * std::exp(-z * z);
        }
    }
    return 1.0;
}

bool Truncation::lipschitz() const { return kind_ != Kind::Heaviside; }

double Truncation::height() const {
    return kind_ == Kind::Identity ? std::numeric_limits<double>::infinity() : h_;
}

Truncation::Kind Truncation::kind() const { return kind_; }
double Truncation::h() const { return h_; }
double Truncation::eps() const { return eps_; }

bool operator==(const Truncation& a, const Truncation& b) {
    return a.kind_ == b.kind_ && a.h_ == b.h_ && a.eps_ == b.eps_;
}

}  // namespace hyst
