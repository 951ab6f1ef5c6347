#include "hyst/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "hyst/errors.hpp"
#include "hyst/play.hpp"

namespace hyst {

namespace {

[[noreturn]] void bad(const std::string& what) { throw BadInput(what); }

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Sup deviation of the curve from the chord through (u0,w0)-(u1,w1).
double secant_dev(const MonotoneCurve& g, double u0, double u1, double w0, double w1) {
    if (u1 <= u0) return 0.0;
    constexpr int kProbes = 257;
    double worst = 0.0;
    for (int i = 0; i < kProbes; ++i) {
        double t = static_cast<double>(i) / (kProbes - 1);
        double u = lerp(u0, u1, t);
        double chord = w0 + (w1 - w0) * (u - u0) / (u1 - u0);
        worst = std::max(worst, std::abs(g(u) - chord));
    }
    return worst;
}

}  // namespace

ScanningData ScanningData::from_curves(const MonotoneCurve& gl, const MonotoneCurve& gr,
                                       const std::vector<double>& levels) {
    ScanningData d;
    d.w = levels;
    d.u_left.reserve(levels.size());
    d.u_right.reserve(levels.size());
    for (double w : levels) {
        d.u_left.push_back(gl.inverse_min(w));
        d.u_right.push_back(gr.inverse_max(w));
    }
    d.validate();
    return d;
}

void ScanningData::validate() const {
    if (w.size() < 2) bad("scanning data needs at least two levels");
    if (u_left.size() != w.size() || u_right.size() != w.size())
        bad("scanning data columns differ in length");
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        if (!(w[k] < w[k + 1])) bad("scanning levels must be strictly increasing");
        if (u_left[k] > u_left[k + 1] || u_right[k] > u_right[k + 1])
            bad("scanning abscissae must be nondecreasing");
    }
    for (std::size_t k = 0; k < w.size(); ++k)
        if (!std::isfinite(w[k]) || !std::isfinite(u_left[k]) || !std::isfinite(u_right[k]))
            bad("scanning data must be finite");
}

GeneralizedTrapezoid GeneralizedTrapezoid::linear(double alpha, double beta, double A, double B,
                                                  double w_min, double w_max) {
    GeneralizedTrapezoid t;
    t.alpha = alpha;
    t.beta = beta;
    t.A = A;
    t.B = B;
    t.w_min = w_min;
    t.w_max = w_max;
    t.gl = MonotoneCurve::piecewise_linear({{alpha, w_min}, {A, w_max}});
    t.gr = MonotoneCurve::piecewise_linear({{beta, w_min}, {B, w_max}});
    t.validate();
    return t;
}

GeneralizedTrapezoid GeneralizedTrapezoid::from_curves(const MonotoneCurve& gl,
                                                       const MonotoneCurve& gr, WRange range) {
    GeneralizedTrapezoid t;
    t.w_min = range.lo;
    t.w_max = range.hi;
    t.alpha = gl.inverse_min(range.lo);
    t.A = gl.inverse_min(range.hi);
    t.beta = gr.inverse_max(range.lo);
    t.B = gr.inverse_max(range.hi);
    t.gl = gl;
    t.gr = gr;
    t.validate();
    return t;
}

GeneralizedTrapezoid GeneralizedTrapezoid::secant() const {
    return linear(alpha, beta, A, B, w_min, w_max);
}

void GeneralizedTrapezoid::validate() const {
    for (double v : {alpha, beta, A, B, w_min, w_max})
        if (!std::isfinite(v)) bad("trapezoid corners must be finite");
    if (!(w_min < w_max)) bad("trapezoid needs w_min < w_max");
    double uscale = std::max({1.0, std::abs(alpha), std::abs(beta), std::abs(A), std::abs(B)});
    double slack = kOrderTol * uscale;
    if (alpha > beta + slack) bad("trapezoid bottom corners out of order (alpha > beta)");
    if (A > B + slack) bad("trapezoid top corners out of order (A > B)");
    if (!(alpha < A)) bad("trapezoid left side has no width (alpha >= A)");
    if (!(beta < B)) bad("trapezoid right side has no width (beta >= B)");
    double lo = std::max(alpha, beta);
    double hi = std::min(A, B);
    if (lo < hi) {
        double wslack = 1e-9 * std::max(1.0, std::max(std::abs(w_min), std::abs(w_max)));
        for (int i = 1; i < 8; ++i) {
            double u = lerp(lo, hi, i / 8.0);
            if (gl(u) < gr(u) - wslack) bad("trapezoid sides cross inside the band");
        }
    }
}

RationalApprox rational_approx(double r, long long kmax) {
    if (!(r > 0.0) || !std::isfinite(r)) bad("rational_approx needs a finite ratio > 0");
    if (kmax < 1) bad("rational_approx needs kmax >= 1");
    long long best_m = 1, best_n = 1;
    double best_err = std::numeric_limits<double>::infinity();
    for (long long n = 1; n <= kmax; ++n) {
        double rn = r * static_cast<double>(n);
        long long cands[4] = {std::max<long long>(1, static_cast<long long>(std::floor(rn))),
                              std::max<long long>(1, static_cast<long long>(std::ceil(rn))), 1,
                              std::max<long long>(1, kmax / n)};
        for (long long m : cands) {
            if (m * n > kmax || std::gcd(m, n) != 1) continue;
            double err = std::abs(static_cast<double>(m) / static_cast<double>(n) - r);
            bool better = err < best_err ||
                          (err == best_err && (m * n < best_m * best_n ||
                                               (m * n == best_m * best_n && m < best_m)));
            if (better) {
                best_err = err;
                best_m = m;
                best_n = n;
            }
        }
    }
    return {best_m, best_n, static_cast<double>(best_m) / static_cast<double>(best_n)};
}

Model calibrate_generalized(const MonotoneCurve& gl, const MonotoneCurve& gr) {
    return Model(ModelKind::GeneralizedPlay,
                 {Hysteron::curve_pair(1.0, gl, gr, Truncation::identity())});
}

Model calibrate_preisach(const MonotoneCurve& gl, const MonotoneCurve& gr, WRange range, int K,
                         double eps, bool smooth) {
    if (K < 1) bad("calibrate_preisach needs K >= 1");
    if (!(eps >= 0.0)) bad("calibrate_preisach needs eps >= 0");
    if (smooth && eps > 0.0) bad("calibrate_preisach: smooth steps take eps = 0");
    if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || !(range.lo < range.hi))
        bad("calibrate_preisach needs a finite band lo < hi");
    double h = (range.hi - range.lo) / K;
    std::vector<double> levels(K + 1);
    for (int k = 0; k <= K; ++k) levels[k] = range.lo + h * k;
    levels.back() = range.hi;
    ScanningData d = ScanningData::from_curves(gl, gr, levels);
    std::vector<Hysteron> rows;
    rows.reserve(K);
    for (int k = 0; k < K; ++k) {
        double alpha = 0.5 * (d.u_left[k] + d.u_left[k + 1]);
        double beta = 0.5 * (d.u_right[k] + d.u_right[k + 1]);
        if (smooth)
            rows.push_back(Hysteron::unit(1.0, alpha, beta, Truncation::smooth_erf(h)));
        else if (eps > 0.0)
            rows.push_back(Hysteron::unit(1.0 / eps, alpha, beta,
                                          Truncation::scaled_ramp(eps * h, eps * h)));
        else
            rows.push_back(Hysteron::unit(1.0, alpha, beta, Truncation::heaviside(h)));
    }
    ModelKind kind = smooth ? ModelKind::PreisachSmooth
                            : (eps > 0.0 ? ModelKind::PreisachRegularized : ModelKind::PreisachRaw);
    return Model(kind, std::move(rows));
}

Model calibrate_linear_play(const MonotoneCurve& gr, const std::vector<double>& samples) {
    if (samples.size() < 2) bad("calibrate_linear_play needs at least two samples");
    for (std::size_t k = 0; k + 1 < samples.size(); ++k)
        if (!(samples[k] < samples[k + 1]))
            bad("calibrate_linear_play samples must be strictly increasing");
    std::vector<double> s(samples.size() - 1);
    double smax = 0.0;
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        s[k] = (gr(samples[k + 1]) - gr(samples[k])) / (samples[k + 1] - samples[k]);
        smax = std::max(smax, std::abs(s[k]));
    }
    double drop = 1e-12 * std::max(1.0, smax);
    std::vector<Hysteron> rows;
    rows.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        double mu = (k == 0) ? s[0] : s[k] - s[k - 1];
        if (mu < -drop) {
            std::ostringstream os;
            os << "calibrate_linear_play: secant slopes decrease at sample " << k
               << " (curve not convex there)";
            throw NegativeWeight(os.str());
        }
        if (mu <= drop) continue;  // exactly straight span adds nothing
        rows.push_back(Hysteron::unit(mu, samples.front(), samples[k], Truncation::identity()));
    }
    if (rows.empty()) bad("calibrate_linear_play: curve is flat over the samples");
    return Model(ModelKind::LinearPlay, std::move(rows));
}

TrapezoidCalibration calibrate_trapezoid(const GeneralizedTrapezoid& t, long long kmax, Pin pin) {
    if (t.w_max > t.w_min && (t.A == t.alpha || t.B == t.beta))
        throw DegenerateSlope("calibrate_trapezoid: a side of the trapezoid is vertical");
    t.validate();
    double h = t.height();
    double s_l = h / (t.A - t.alpha);
    double s_r = h / (t.B - t.beta);
    double r = (t.A - t.alpha) / (t.B - t.beta);  // = s_r / s_l
    RationalApprox fr = rational_approx(r, kmax);
    long long m = fr.m, n = fr.n;
    double mu_star = (pin == Pin::Left) ? s_l * static_cast<double>(m)
                                        : s_r * static_cast<double>(n);
    double h_star = h / mu_star;
    long long K = m * n;
    double mu_k = mu_star / static_cast<double>(K);

    // alpha: m groups of n equal values; beta: n groups of m; the two index
    // maps interleave so row k pairs group j = floor(k/n) with l = floor(k/m).
    std::vector<double> alphas(K), betas(K);
    for (long long j = 0; j < m; ++j)
        for (long long l = 0; l < n; ++l) alphas[j * n + l] = t.alpha + static_cast<double>(j) * h_star;
    for (long long l = 0; l < n; ++l)
        for (long long j = 0; j < m; ++j) betas[l * m + j] = t.beta + static_cast<double>(l) * h_star;
    // A slab leaning hard toward the free side can place a riser past its
    // partner on the other staircase (equivalently: adjusted top corners out
    // of order). Pull the free side's riser back to keep every window
    // ordered; the pinned boundary keeps its exact staircase and the band
    // near the offending corner is covered more coarsely.
    for (long long k = 0; k < K; ++k)
        if (alphas[k] > betas[k]) {
            if (pin == Pin::Right)
                alphas[k] = betas[k];
            else
                betas[k] = alphas[k];
        }

    std::vector<Hysteron> rows;
    rows.reserve(K);
    for (long long k = 0; k < K; ++k)
        rows.push_back(Hysteron::unit(mu_k, alphas[k], betas[k], Truncation::ramp(h_star)));

    double A_star = (pin == Pin::Left) ? t.A : t.alpha + static_cast<double>(m) * h_star;
    double B_star = (pin == Pin::Right) ? t.B : t.beta + static_cast<double>(n) * h_star;
    if (A_star > B_star) {
        if (pin == Pin::Right)
            A_star = B_star;
        else
            B_star = A_star;
    }
    return {Model(ModelKind::NonlinearPlay, std::move(rows)),
            GeneralizedTrapezoid::linear(t.alpha, t.beta, A_star, B_star, t.w_min, t.w_max), m, n};
}

std::vector<GeneralizedTrapezoid> partition_range(const MonotoneCurve& gl,
                                                  const MonotoneCurve& gr, WRange range, int I,
                                                  const PartitionStrategy& strategy) {
    if (I < 1) bad("partition_range needs I >= 1");
    if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || !(range.lo < range.hi))
        bad("partition_range needs a finite band lo < hi");
    std::vector<double> levels(I + 1);
    for (int i = 0; i <= I; ++i) levels[i] = lerp(range.lo, range.hi, static_cast<double>(i) / I);
    levels.back() = range.hi;

    if (const auto* adaptive = std::get_if<Adaptive>(&strategy)) {
        if (!(adaptive->tol > 0.0)) bad("adaptive partition needs tol > 0");
        constexpr std::size_t kMaxSlabs = 2000;
        auto dev = [&](double w0, double w1) {
            double l0 = gl.inverse_min(w0), l1 = gl.inverse_min(w1);
            double r0 = gr.inverse_max(w0), r1 = gr.inverse_max(w1);
            return std::max(secant_dev(gl, l0, l1, w0, w1), secant_dev(gr, r0, r1, w0, w1));
        };
        while (levels.size() - 1 < kMaxSlabs) {
            std::size_t worst = 0;
            double worst_dev = -1.0;
            for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
                double d = dev(levels[i], levels[i + 1]);
                if (d > worst_dev) {
                    worst_dev = d;
                    worst = i;
                }
            }
            if (worst_dev <= adaptive->tol) break;
            levels.insert(levels.begin() + worst + 1, 0.5 * (levels[worst] + levels[worst + 1]));
        }
    }

    // Shared corner values so adjacent slabs coincide exactly.
    std::vector<double> ul(levels.size()), ur(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        ul[i] = gl.inverse_min(levels[i]);
        ur[i] = gr.inverse_max(levels[i]);
    }
    std::vector<GeneralizedTrapezoid> slabs;
    slabs.reserve(levels.size() - 1);
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        GeneralizedTrapezoid t;
        t.alpha = ul[i];
        t.A = ul[i + 1];
        t.beta = ur[i];
        t.B = ur[i + 1];
        t.w_min = levels[i];
        t.w_max = levels[i + 1];
        t.gl = gl;
        t.gr = gr;
        t.validate();
        slabs.push_back(std::move(t));
    }
    return slabs;
}

HierarchicalResult calibrate_hierarchical(const MonotoneCurve& gl, const MonotoneCurve& gr,
                                          WRange range, int I, const PartitionStrategy& strategy,
                                          long long kmax_per_slab, int qmax, double tol, Pin pin) {
    if (kmax_per_slab < 1) bad("calibrate_hierarchical needs kmax_per_slab >= 1");
    if (qmax < 1) bad("calibrate_hierarchical needs qmax >= 1");
    std::vector<GeneralizedTrapezoid> slabs = partition_range(gl, gr, range, I, strategy);

    struct Pass {
        Model model{ModelKind::NonlinearPlay, {Hysteron::unit(1, 0, 0, Truncation::ramp(1))}};
        std::vector<long long> slab_k;
        long long total = 0;
        double err = 0.0;
        bool feasible = false;
    };
    std::vector<Pass> passes;
    std::exception_ptr first_failure;
    for (int q = 1; q <= qmax; ++q) {
        long long kq = std::max<long long>(1, kmax_per_slab >> (q - 1));
        Pass pass;
        try {
            std::vector<Hysteron> rows;
            bool pinned = false;
            double pin_a = 0.0, pin_b = 0.0;
            for (const GeneralizedTrapezoid& slab : slabs) {
                GeneralizedTrapezoid trial = slab;
                if (pinned) {
                    trial.alpha = pin_a;
                    trial.beta = pin_b;
                }
                TrapezoidCalibration c = calibrate_trapezoid(trial, kq, pin);
                pin_a = c.adjusted.A;
                pin_b = c.adjusted.B;
                pinned = true;
                pass.slab_k.push_back(c.m * c.n);
                pass.total += c.m * c.n;
                for (const Hysteron& hy : c.model.hysterons()) rows.push_back(hy);
            }
            pass.model = Model(ModelKind::NonlinearPlay, std::move(rows));
            pass.err = boundary_error(pass.model, gl, gr);
            pass.feasible = true;
        } catch (const Error&) {
            // A coarse budget can degenerate a pinned slab (the previous
            // slab's adjusted corner lands on or past this slab's own top).
            // Such a pass simply does not compete.
            if (!first_failure) first_failure = std::current_exception();
            pass.slab_k.clear();
            pass.total = 0;
        }
        passes.push_back(std::move(pass));
        if (kq == 1) break;  // further passes repeat the coarsest budget
    }

    int chosen = -1;
    for (std::size_t q = 0; q < passes.size(); ++q) {
        if (passes[q].feasible && passes[q].err <= tol &&
            (chosen < 0 || passes[q].total < passes[chosen].total))
            chosen = static_cast<int>(q);
    }
    bool budget_exceeded = chosen < 0;
    if (chosen < 0) {
        for (std::size_t q = 0; q < passes.size(); ++q)
            if (passes[q].feasible && (chosen < 0 || passes[q].err < passes[chosen].err))
                chosen = static_cast<int>(q);
    }
    if (chosen < 0) std::rethrow_exception(first_failure);
    Pass& best = passes[chosen];
    return HierarchicalResult{std::move(best.model), std::move(best.slab_k), chosen + 1, best.err,
                              budget_exceeded};
}

double boundary_error(const Model& m, const MonotoneCurve& gl, const MonotoneCurve& gr,
                      int n_samples) {
    if (n_samples < 2) bad("boundary_error needs n_samples >= 2");
    if (m.kind() == ModelKind::GeneralizedPlay)
        throw NotApplicable("boundary_error: generalized play has no saturation span");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (const Hysteron& hy : m.hysterons()) {
        const Truncation& b = hy.trunc;
        if (!std::isfinite(b.height()))
            throw NotApplicable("boundary_error: unbounded output has no saturation span");
        double rise = 0.0;  // carried value at which the output saturates
        switch (b.kind()) {
            case Truncation::Kind::Ramp:
            case Truncation::Kind::SmoothErf: rise = b.h(); break;
            case Truncation::Kind::ScaledRamp: rise = b.eps(); break;
            case Truncation::Kind::Heaviside: rise = 0.0; break;
            case Truncation::Kind::Identity: break;  // unreachable: height is infinite
        }
        lo = std::min(lo, hy.alpha());
        hi = std::max(hi, hy.beta() + rise);
        total += hy.mu * b.height();
    }
    double w_bot = gl(lo);
    auto ref = [&](const MonotoneCurve& g, double u) {
        return std::clamp(g(u) - w_bot, 0.0, total);
    };
    ModelState st = init_state(m, lo);
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        double u = lerp(lo, hi, static_cast<double>(i) / (n_samples - 1));
        worst = std::max(worst, std::abs(step(m, st, u) - ref(gr, u)));
    }
    for (int i = n_samples - 1; i >= 0; --i) {
        double u = lerp(lo, hi, static_cast<double>(i) / (n_samples - 1));
        worst = std::max(worst, std::abs(step(m, st, u) - ref(gl, u)));
    }
    return worst;
}

double curve_crossing(const MonotoneCurve& gl, const MonotoneCurve& gr, double u_lo,
                      double u_hi) {
    double a = u_lo, b = u_hi;
    double fa = gl(a) - gr(a);
    double fb = gl(b) - gr(b);
    if (!(fa > 0.0) || !(fb < 0.0))
        bad("curve_crossing: gap must be positive at u_lo and negative at u_hi");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (a + b);
        if (gl(mid) - gr(mid) > 0.0)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

}  // namespace hyst
