#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "hyst/curves.hpp"
#include "hyst/play.hpp"

namespace hyst {

// Model families, distinguished by what each hysteron is allowed to carry.
//   GeneralizedPlay    one hysteron, arbitrary curve pair, identity output
//   NonlinearPlay      affine pairs, ramp outputs
//   LinearPlay         affine pairs, identity outputs
//   PreisachRaw        affine pairs, step outputs
//   PreisachRegularized affine pairs, ramp outputs with unit-area scaling
//   PreisachSmooth     affine pairs, smooth step outputs
enum class ModelKind {
    GeneralizedPlay,
    NonlinearPlay,
    LinearPlay,
    PreisachRaw,
    PreisachRegularized,
    PreisachSmooth,
};

// Stable text names, used in messages and the model file format.
const char* kind_label(ModelKind k);
ModelKind kind_from_label(const std::string& label);

// One weighted play element. The internal value is confined to the moving
// window [right(u), left(u)]; the output is mu * trunc(value).
struct Hysteron {
    double mu;
    MonotoneCurve left;
    MonotoneCurve right;
    Truncation trunc;

    // Affine window u - [alpha, beta] with the given output shaping.
    static Hysteron unit(double mu, double alpha, double beta, Truncation trunc);
    static Hysteron curve_pair(double mu, MonotoneCurve left, MonotoneCurve right,
                               Truncation trunc);

    bool affine() const;   // both window curves are affine shifts
    double alpha() const;  // affine only
    double beta() const;   // affine only
};

class Model {
  public:
    Model(ModelKind kind, std::vector<Hysteron> hysterons);

    ModelKind kind() const { return kind_; }
    std::size_t size() const { return hysterons_.size(); }
    const Hysteron& operator[](std::size_t k) const { return hysterons_[k]; }
    const std::vector<Hysteron>& hysterons() const { return hysterons_; }

  private:
    ModelKind kind_;
    std::vector<Hysteron> hysterons_;
};

// Internal values of all hysterons together with the input they were
// committed at.
struct ModelState {
    std::vector<double> v;
    double u = 0.0;
};

struct LeftCurveInit {};
struct ExplicitInit {
    std::vector<double> v;
};
using InitPolicy = std::variant<LeftCurveInit, ExplicitInit>;

// Builds the state at input u0. LeftCurveInit rests every value on its upper
// window bound; ExplicitInit is validated against the window and throws
// InadmissibleInit outside it.
ModelState init_state(const Model& m, double u0, const InitPolicy& policy = LeftCurveInit{});

// True when every value lies in its window at state.u, up to kOrderTol slack.
bool is_admissible(const Model& m, const ModelState& state);

// Output at input u from the given committed state; the state is not touched.
double evaluate(const Model& m, const ModelState& state, double u);

// One-sided output derivative at input u: active window sides contribute
// their curve slope through the truncation slope, interior values contribute
// nothing. Throws SlopeUnavailable when a step output is hit on its jump.
double evaluate_slope(const Model& m, const ModelState& state, double u);

// Commits the update to state and returns the output.
double step(const Model& m, ModelState& state, double u);

// Input path sampled along straight segments between consecutive peaks.
// v[i] holds all internal values of sample i when keep_v is set.
struct Trace {
    std::vector<double> u;
    std::vector<double> w;
    std::vector<std::vector<double>> v;
};

// Runs the path peaks[0] -> peaks[1] -> ... with samples_per_segment updates
// per segment. The first sample is the state at peaks[0]. Consecutive peaks
// must differ.
Trace scan(const Model& m, const std::vector<double>& peaks, int samples_per_segment,
           const InitPolicy& policy = LeftCurveInit{}, bool keep_v = false);

// Same, continuing from (and committing to) an existing state.
Trace scan_from(const Model& m, ModelState& state, const std::vector<double>& peaks,
                int samples_per_segment, bool keep_v = false);

// Weighted switching points of an affine model, one row per hysteron.
// Throws NotApplicable when any window is not an affine pair.
struct SignatureRow {
    double alpha;
    double beta;
    double mu;
};
std::vector<SignatureRow> preisach_signature(const Model& m);

}  // namespace hyst
