#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gaussian.hpp"
#include "interaction.hpp"
#include "schedule.hpp"

namespace spherefield {

/// Closed-form smooth bump amplitude * exp(-1/(1 - |x-center|^2/radius^2)).
struct BumpFunction {
    Eigen::VectorXd center;  // in R^D
    double radius = 1.0;
    double amplitude = 1.0;

    double operator()(const Eigen::VectorXd& x) const {
        const double r = (x - center).norm() / radius;
        return amplitude * detail::bump_profile(r);
    }

    double min_xd() const { return center(center.size() - 1) - radius; }
    double max_xd() const { return center(center.size() - 1) + radius; }
};

// Cylindrical functional F[T] = Ftilde(f_1(T), ..., f_m(T)) with compactly
// supported smooth test functions on R^D and a bounded continuous Ftilde.
struct CylindricalFunctional {
    std::vector<BumpFunction> test_functions;
    std::function<double(const double*)> ftilde;
    double sup_bound = 0.0;

    int arity() const { return static_cast<int>(test_functions.size()); }
};

// Coefficient representations of f_j o s at radius R, plus the evaluator.
struct PulledBackFunctional {
    std::vector<SpectralField> pullbacks;
    std::function<double(const double*)> ftilde;
    double sup_bound = 0.0;
    double support_min_xd = 0.0;  // A: min of the test-function supports in x_D
    double support_max_xd = 0.0;  // B: max extent of the supports
    double R = 1.0;
    bool tail_ok = true;  // H^k mass above l_max/2 below 1% of total

    int arity() const { return static_cast<int>(pullbacks.size()); }

    /// The V+ membership condition delta < A and R > B.
    bool in_vplus(double delta) const { return delta < support_min_xd && R > support_max_xd; }
};

/// Analyzes each f_j o s into coefficients on the transform's grid.
inline PulledBackFunctional pull_back(const CylindricalFunctional& F, const Transform& tr, int sobolev_k = 1) {
    const auto& grid = tr.grid();
    const double R = grid.R;
    PulledBackFunctional out;
    out.ftilde = F.ftilde;
    out.sup_bound = F.sup_bound;
    out.R = R;
    out.support_min_xd = std::numeric_limits<double>::infinity();
    out.support_max_xd = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd values(grid.n());
    for (const auto& f : F.test_functions) {
        // Angular width of the pulled-back support must be resolvable.
        const double d = f.center.norm();
        const double lo = std::max(0.0, d - f.radius), hi = d + f.radius;
        const double width = 2.0 * (std::atan(hi / (2.0 * R)) - std::atan(lo / (2.0 * R)));
        if (width < 2.0 * grid.node_spacing())
            throw ResolutionError("pull_back: test-function support narrower than the node spacing");
        for (int i = 0; i < grid.n(); ++i) {
            const SpherePoint p = grid.point(i);
            // Near the removed pole the image is far outside any compact support.
            if (2.0 * R - p.y < 1e-9 * R) {
                values(i) = 0.0;
                continue;
            }
            values(i) = f(stereographic_project(p));
        }
        SpectralField pb = tr.analyze(values);
        double total = 0.0, tail = 0.0;
        for (int l = 0; l <= pb.l_max; ++l) {
            const double w = std::pow(eigenvalue(pb.D, l) + 1.0, sobolev_k);
            const double mass = w * pb.coeffs.segment(degree_offset(pb.D, l), degeneracy(pb.D, l)).squaredNorm();
            total += mass;
            if (2 * l > pb.l_max) tail += mass;
        }
        if (tail > 0.01 * total) out.tail_ok = false;
        out.support_min_xd = std::min(out.support_min_xd, f.min_xd());
        out.support_max_xd = std::max(out.support_max_xd, f.max_xd());
        out.pullbacks.push_back(std::move(pb));
    }
    return out;
}

/// Ftilde(phi(f_1 o s), ..., phi(f_m o s)).
inline double evaluate_functional(const PulledBackFunctional& F, const SpectralField& phi) {
    std::vector<double> args(static_cast<std::size_t>(F.arity()));
    for (int j = 0; j < F.arity(); ++j) args[static_cast<std::size_t>(j)] = pair_fields(phi, F.pullbacks[static_cast<std::size_t>(j)]);
    return F.ftilde(args.data());
}

struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    long samples = 0;
    double ess = 0.0;
    std::uint64_t seed = 0;
    int n = 0;
};

// Per-sample data of a weighted Monte Carlo run: base log-weights (additive
// Lagrangian offsets are dropped, they cancel in every normalized ratio) and
// the values of each requested functional of the sampled field.
struct WeightedRun {
    Eigen::VectorXd logw;   // samples
    Eigen::MatrixXd fvals;  // samples x K
};

/// Draws `samples` independent fields from per-index sub-streams of the
/// sampler's seed, evaluating the action (when present) and each functional.
/// Deterministic for fixed seed regardless of the worker count.
inline WeightedRun run_weighted(const FreeFieldSampler& sampler, long samples,
                                const std::function<double(const SpectralField&)>& base_action,
                                const std::vector<std::function<double(const SpectralField&)>>& evals,
                                int workers = 1) {
    WeightedRun run;
    run.logw = Eigen::VectorXd::Zero(samples);
    run.fvals.resize(samples, static_cast<int>(evals.size()));
    parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
        FreeFieldSampler sub = sampler.fork(i);
        const SpectralField phi = sub.sample();
        if (base_action) run.logw(static_cast<int>(i)) = -base_action(phi);
        for (std::size_t kf = 0; kf < evals.size(); ++kf)
            run.fvals(static_cast<int>(i), static_cast<int>(kf)) = evals[kf](phi);
    });
    return run;
}

struct RatioEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double ess = 0.0;
};

/// Self-normalized importance-sampling ratio sum(w f)/sum(w) with w =
/// exp(logw - max logw), delta-method standard error, and effective sample
/// size (sum w)^2 / sum w^2.
inline RatioEstimate self_normalized_ratio(const Eigen::VectorXd& logw, const Eigen::VectorXd& f) {
    if (logw.size() != f.size() || logw.size() < 1) throw ShapeMismatchError("self_normalized_ratio: length mismatch");
    const double c = logw.maxCoeff();
    const Eigen::VectorXd w = (logw.array() - c).exp();
    const double sw = w.sum();
    RatioEstimate r;
    r.value = w.dot(f) / sw;
    r.ess = sw * sw / w.squaredNorm();
    r.std_error = std::sqrt(w.array().square().matrix().dot((f.array() - r.value).square().matrix())) / sw;
    return r;
}

/// Reweighted Monte Carlo estimate of I_n(F) per the regularized functional
/// integral: i.i.d. free-field samples, weights exp(-action). The value is a
/// convex combination of F samples, clamped so |value| <= sup|Ftilde| holds
/// exactly in floating point as well.
inline EstimateReport estimate(const PulledBackFunctional& F, int n, const ActionEvaluator* action,
                               const FreeFieldSampler& sampler, long samples, int workers = 1) {
    if (samples < 2) throw Error("estimate: need samples >= 2");
    std::function<double(const SpectralField&)> base_action;
    if (action != nullptr) base_action = [action](const SpectralField& phi) { return action->base_action(phi); };
    const WeightedRun run = run_weighted(
        sampler, samples, base_action, {[&](const SpectralField& phi) { return evaluate_functional(F, phi); }},
        workers);
    const RatioEstimate r = self_normalized_ratio(run.logw, run.fvals.col(0));
    if (r.ess < 2.0) throw DegenerateWeightsError("estimate: effective sample size below 2");
    EstimateReport rep;
    rep.value = std::clamp(r.value, -F.sup_bound, F.sup_bound);
    rep.std_error = r.std_error;
    rep.samples = samples;
    rep.ess = r.ess;
    rep.seed = sampler.seed();
    rep.n = n;
    return rep;
}

struct SequenceDiagnostics {
    double max_abs = 0.0;
    double cesaro_mean = 0.0;
    double last_window_mean = 0.0;
    bool converged = false;
    double tolerance = 0.0;
};

/// Bounded-sequence diagnostics standing in for a Banach limit: the sup bound
/// check, the Cesaro mean, a last-window Cauchy flag, and the window mean.
inline SequenceDiagnostics sequence_diagnostics(const std::vector<double>& values, double sup_bound,
                                                double tolerance = 1e-2) {
    if (values.empty()) throw Error("sequence_diagnostics: need at least one value");
    SequenceDiagnostics d;
    d.tolerance = tolerance;
    double sum = 0.0;
    for (double v : values) {
        d.max_abs = std::max(d.max_abs, std::abs(v));
        sum += v;
    }
    if (d.max_abs > sup_bound)
        throw BoundViolationError("sequence_diagnostics: |I_n| exceeds the functional sup bound");
    d.cesaro_mean = sum / static_cast<double>(values.size());
    const std::size_t window = std::max<std::size_t>(2, values.size() / 4);
    const std::size_t start = values.size() > window ? values.size() - window : 0;
    double lo = values[start], hi = values[start], wsum = 0.0;
    for (std::size_t i = start; i < values.size(); ++i) {
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
        wsum += values[i];
    }
    d.last_window_mean = wsum / static_cast<double>(values.size() - start);
    d.converged = (hi - lo) <= tolerance;
    return d;
}

// Small catalog of bounded Ftilde evaluators used by the suites and the CLI.
namespace ftilde {

inline CylindricalFunctional constant(double c) {
    CylindricalFunctional F;
    F.ftilde = [c](const double*) { return c; };
    F.sup_bound = std::abs(c);
    return F;
}

/// m = 1 smooth clamp of the identity at `bound`.
inline std::function<double(const double*)> clamped_identity(double bound) {
    return [bound](const double* v) { return detail::clamp_linear(v[0], bound); };
}

/// cos of the sum of the pairings; bounded by 1.
inline std::function<double(const double*)> cosine(int arity) {
    return [arity](const double* v) {
        double s = 0.0;
        for (int j = 0; j < arity; ++j) s += v[j];
        return std::cos(s);
    };
}

/// Product of per-argument clamps at `bound`; bounded by bound^arity.
inline std::function<double(const double*)> clamped_product(int arity, double bound) {
    return [arity, bound](const double* v) {
        double p = 1.0;
        for (int j = 0; j < arity; ++j) p *= detail::clamp_linear(v[j], bound);
        return p;
    };
}

}  // namespace ftilde

}  // namespace spherefield
