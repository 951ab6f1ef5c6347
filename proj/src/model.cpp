#include "hyst/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hyst/errors.hpp"

namespace hyst {

Hysteron Hysteron::unit(double mu, double alpha, double beta, Truncation trunc) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha > beta)
        throw BadInput("hysteron window needs finite alpha <= beta");
    return Hysteron{mu, MonotoneCurve::affine_shift(alpha), MonotoneCurve::affine_shift(beta),
                    std::move(trunc)};
}

Hysteron Hysteron::curve_pair(double mu, MonotoneCurve left, MonotoneCurve right,
                              Truncation trunc) {
    return Hysteron{mu, std::move(left), std::move(right), std::move(trunc)};
}

bool Hysteron::affine() const {
    return left.kind() == MonotoneCurve::Kind::AffineShift &&
           right.kind() == MonotoneCurve::Kind::AffineShift;
}

double Hysteron::alpha() const { return left.shift(); }
double Hysteron::beta() const { return right.shift(); }

const char* kind_label(ModelKind k) {
    switch (k) {
        case ModelKind::GeneralizedPlay: return "generalized-play";
        case ModelKind::NonlinearPlay: return "nonlinear-play";
        case ModelKind::LinearPlay: return "linear-play";
        case ModelKind::PreisachRaw: return "preisach-raw";
        case ModelKind::PreisachRegularized: return "preisach-reg";
        case ModelKind::PreisachSmooth: return "preisach-smooth";
    }
    return "?";
}

ModelKind kind_from_label(const std::string& label) {
    for (ModelKind k : {ModelKind::GeneralizedPlay, ModelKind::NonlinearPlay,
                        ModelKind::LinearPlay, ModelKind::PreisachRaw,
                        ModelKind::PreisachRegularized, ModelKind::PreisachSmooth})
        if (label == kind_label(k)) return k;
    throw BadInput("unknown model kind '" + label + "'");
}

namespace {

Truncation::Kind required_trunc(ModelKind k) {
    switch (k) {
        case ModelKind::GeneralizedPlay: return Truncation::Kind::Identity;
        case ModelKind::NonlinearPlay: return Truncation::Kind::Ramp;
        case ModelKind::LinearPlay: return Truncation::Kind::Identity;
        case ModelKind::PreisachRaw: return Truncation::Kind::Heaviside;
        case ModelKind::PreisachRegularized: return Truncation::Kind::ScaledRamp;
        case ModelKind::PreisachSmooth: return Truncation::Kind::SmoothErf;
    }
    return Truncation::Kind::Identity;
}

}  // namespace

Model::Model(ModelKind kind, std::vector<Hysteron> hysterons)
    : kind_(kind), hysterons_(std::move(hysterons)) {
    if (hysterons_.empty()) throw BadInput("model needs at least one hysteron");
    if (kind_ == ModelKind::GeneralizedPlay) {
        if (hysterons_.size() != 1)
            throw BadInput("generalized-play model holds exactly one hysteron");
        if (hysterons_[0].mu != 1.0)
            throw BadInput("generalized-play model uses unit weight");
    }
    for (std::size_t k = 0; k < hysterons_.size(); ++k) {
        const Hysteron& h = hysterons_[k];
        std::ostringstream at;
        at << "hysteron " << k << " of a " << kind_label(kind_) << " model";
        if (!std::isfinite(h.mu) || h.mu < 0.0)
            throw BadInput(at.str() + ": weight must be finite and nonnegative");
        if (h.trunc.kind() != required_trunc(kind_))
            throw BadInput(at.str() + ": wrong output shaping for this kind");
        if (kind_ != ModelKind::GeneralizedPlay && !h.affine())
            throw BadInput(at.str() + ": window must be an affine pair");
    }
}

ModelState init_state(const Model& m, double u0, const InitPolicy& policy) {
    ModelState s;
    s.u = u0;
    s.v.resize(m.size());
    if (std::holds_alternative<LeftCurveInit>(policy)) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            double lo = m[k].right(u0), hi = m[k].left(u0);
            checked_clamp(lo, hi, hi);  // surfaces an order violation at u0
            s.v[k] = hi;
        }
        return s;
    }
    const auto& v = std::get<ExplicitInit>(policy).v;
    if (v.size() != m.size()) throw BadInput("explicit init has the wrong number of values");
    for (std::size_t k = 0; k < m.size(); ++k) {
        double lo = m[k].right(u0), hi = m[k].left(u0);
        double tol = kOrderTol * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (!(v[k] >= lo - tol) || !(v[k] <= hi + tol)) {
            std::ostringstream os;
            os << "initial value " << v[k] << " of hysteron " << k << " outside window ["
               << lo << ", " << hi << "] at input " << u0;
            throw InadmissibleInit(os.str());
        }
        s.v[k] = v[k];
    }
    return s;
}

bool is_admissible(const Model& m, const ModelState& state) {
    if (state.v.size() != m.size()) return false;
    for (std::size_t k = 0; k < m.size(); ++k) {
        double lo = m[k].right(state.u), hi = m[k].left(state.u);
        double tol = kOrderTol * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (lo > hi + tol) return false;
        if (!(state.v[k] >= lo - tol) || !(state.v[k] <= hi + tol)) return false;
    }
    return true;
}

double evaluate(const Model& m, const ModelState& state, double u) {
    double w = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Hysteron& h = m[k];
        double v = checked_clamp(h.right(u), h.left(u), state.v[k]);
        w += h.mu * h.trunc(v);
    }
    return w;
}

double evaluate_slope(const Model& m, const ModelState& state, double u) {
    double dw = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Hysteron& h = m[k];
        double lo = h.right(u), hi = h.left(u);
        double vbar = state.v[k];
        double cs;
        if (vbar <= lo)
            cs = h.right.slope(u);
        else if (vbar >= hi)
            cs = h.left.slope(u);
        else
            continue;
        double v = checked_clamp(lo, hi, vbar);
        dw += h.mu * h.trunc.slope(v) * cs;
    }
    return dw;
}

double step(const Model& m, ModelState& state, double u) {
    double w = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Hysteron& h = m[k];
        double v = checked_clamp(h.right(u), h.left(u), state.v[k]);
        state.v[k] = v;
        w += h.mu * h.trunc(v);
    }
    state.u = u;
    return w;
}

namespace {

void check_targets(double from, const std::vector<double>& peaks) {
    if (peaks.empty()) throw BadInput("path needs at least one peak");
    double prev = from;
    for (double p : peaks) {
        if (!std::isfinite(p)) throw BadInput("path peak is not finite");
        if (p == prev) throw BadInput("consecutive path peaks must differ");
        prev = p;
    }
}

}  // namespace

Trace scan_from(const Model& m, ModelState& state, const std::vector<double>& peaks,
                int samples_per_segment, bool keep_v) {
    if (samples_per_segment < 1) throw BadInput("need at least one sample per segment");
    check_targets(state.u, peaks);
    Trace tr;
    tr.u.reserve(1 + peaks.size() * samples_per_segment);
    tr.w.reserve(tr.u.capacity());
    tr.u.push_back(state.u);
    tr.w.push_back(evaluate(m, state, state.u));
    if (keep_v) tr.v.push_back(state.v);
    double a = state.u;
    for (double b : peaks) {
        for (int j = 1; j <= samples_per_segment; ++j) {
            double u = j == samples_per_segment
                           ? b
                           : a + (b - a) * (static_cast<double>(j) / samples_per_segment);
            double w = step(m, state, u);
            tr.u.push_back(u);
            tr.w.push_back(w);
            if (keep_v) tr.v.push_back(state.v);
        }
        a = b;
    }
    return tr;
}

Trace scan(const Model& m, const std::vector<double>& peaks, int samples_per_segment,
           const InitPolicy& policy, bool keep_v) {
    if (peaks.size() < 2) throw BadInput("path needs a start and at least one peak");
    ModelState s = init_state(m, peaks.front(), policy);
    std::vector<double> rest(peaks.begin() + 1, peaks.end());
    return scan_from(m, s, rest, samples_per_segment, keep_v);
}

std::vector<SignatureRow> preisach_signature(const Model& m) {
    std::vector<SignatureRow> rows;
    rows.reserve(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m[k].affine())
            throw NotApplicable("switching-plane signature needs affine windows");
        rows.push_back({m[k].alpha(), m[k].beta(), m[k].mu});
    }
    return rows;
}

}  // namespace hyst
