#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <vector>

#include "estimator.hpp"

namespace spherefield {

/// Coefficients of theta -> f(O^-1 theta) for an orthogonal O on the centered
/// coordinates, by resampling on the grid and re-analyzing. Rotations map
/// degree-l harmonics to degree-l harmonics, so on band-limited fields this
/// is exact up to round-off; `aliasing_warn` is set when the input carries
/// significant mass at the band limit (a proxy for truncated content).
inline SpectralField rotate_function(const SpectralField& f, const Eigen::MatrixXd& O, const Transform& tr,
                                     bool* aliasing_warn = nullptr) {
    if (O.rows() != f.D + 1 || O.cols() != f.D + 1) throw ShapeMismatchError("rotate_function: rotation size mismatch");
    const auto& grid = tr.grid();
    Eigen::VectorXd values(grid.n());
    const Eigen::MatrixXd Oinv = O.transpose();
    for (int i = 0; i < grid.n(); ++i) values(i) = tr.evaluate(f, Oinv * grid.unit.col(i));
    if (aliasing_warn != nullptr) {
        const int off = degree_offset(f.D, f.l_max);
        const double top = f.coeffs.segment(off, degeneracy(f.D, f.l_max)).norm();
        *aliasing_warn = top > 1e-6 * std::max(1e-300, f.coeffs.norm());
    }
    return tr.analyze(values);
}

// The rotation O_{t,R} carrying the south pole to the stereographic preimage
// of the translation vector t, acting in the plane spanned by the pole axis
// and that preimage and fixing its orthogonal complement.
struct TranslationWitness {
    Eigen::VectorXd t;
    double R = 1.0;
    Eigen::MatrixXd rotation;  // (D+1) x (D+1) on centered coordinates, det = 1
};

inline TranslationWitness build_translation_rotation(const Eigen::VectorXd& t, double R) {
    const int D = static_cast<int>(t.size());
    TranslationWitness w;
    w.t = t;
    w.R = R;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(D + 1);
    a(D) = -1.0;  // south pole direction
    const SpherePoint q = stereographic_inverse(t, R);
    Eigen::VectorXd b(D + 1);
    b.head(D) = q.x / R;
    b(D) = (q.y - R) / R;
    const double c = a.dot(b);
    Eigen::VectorXd v = b - c * a;
    const double s = v.norm();
    w.rotation = Eigen::MatrixXd::Identity(D + 1, D + 1);
    if (s < 1e-15) return w;  // t = 0
    v /= s;
    w.rotation += (c - 1.0) * (a * a.transpose() + v * v.transpose()) + s * (v * a.transpose() - a * v.transpose());
    return w;
}

/// || (t f) o s  -  O_{t,R}(f o s) ||_{H^k}: how far translating the test
/// function differs from rotating its pullback.
inline double translation_residual(const BumpFunction& f, const Eigen::VectorXd& t, double R, int k,
                                   const Transform& tr) {
    if (tr.R() != R) throw ShapeMismatchError("translation_residual: transform radius mismatch");
    BumpFunction shifted = f;
    shifted.center = f.center + t;
    CylindricalFunctional Ft;
    Ft.test_functions = {shifted};
    Ft.ftilde = [](const double* v) { return v[0]; };
    Ft.sup_bound = std::abs(f.amplitude);
    CylindricalFunctional F0;
    F0.test_functions = {f};
    F0.ftilde = Ft.ftilde;
    F0.sup_bound = Ft.sup_bound;

    const SpectralField translated = pull_back(Ft, tr).pullbacks[0];
    const SpectralField base = pull_back(F0, tr).pullbacks[0];
    const TranslationWitness w = build_translation_rotation(t, R);
    SpectralField rotated = rotate_function(base, w.rotation, tr);
    SpectralField diff = translated;
    diff.coeffs -= rotated.coeffs;
    return sobolev_norm(diff, k);
}

/// F with every test-function pullback reflected in x_D (the functional F_Theta).
inline PulledBackFunctional theta_reflect(const PulledBackFunctional& F) {
    PulledBackFunctional out = F;
    for (auto& pb : out.pullbacks) pb = reflect_field(pb);
    return out;
}

// Shared knobs of a suite run at schedule index n: grid/transform at R_n,
// mollifier, Lagrangian, seed and sample budget.
struct SuiteSetup {
    const Transform* tr = nullptr;
    CutoffSchedule schedule;
    int n = 1;
    MollifierSpec mollifier = MollifierSpec::standard_bump();
    LagrangianTerm L = LagrangianTerm::zero();
    std::uint64_t seed = 1;
    long samples = 1000;
    int workers = 1;

    int k = 2;

    ZonalKernel kernel() const {
        return build_kernel_clamped(mollifier, schedule.Lambda(n), tr->R(), tr->grid(), tr->l_max());
    }

    FreeFieldSampler sampler() const { return FreeFieldSampler(tr->D(), tr->R(), tr->l_max(), k, seed); }
};

// Collar-excluded action: the integral over S^{+alpha delta} union
// S^{-alpha delta}, evaluated as the sum of the two half-sphere integrals.
struct RestrictedAction {
    ActionEvaluator plus;
    ActionEvaluator minus;

    RestrictedAction(const Transform& tr, const ZonalKernel& kernel, const LagrangianTerm& L, double delta,
                     double alpha)
        : plus(tr, kernel, L, RegionSpec::plus(delta, alpha)), minus(tr, kernel, L, RegionSpec::minus(delta, alpha)) {}

    double base_action(const SpectralField& phi) const { return plus.base_action(phi) + minus.base_action(phi); }
};

struct RPGramReport {
    int p = 0;
    Eigen::MatrixXd gram;
    Eigen::MatrixXd std_errors;
    double min_eigenvalue = 0.0;
    double max_std_error = 0.0;
    double deviation_bound = 0.0;  // ||F||_inf^2 M_n R_n^D / Lambda_n, max over the family
    bool collar_excluded = true;
    double ess = 0.0;
};

/// Gram matrix of estimates of I_n(F_i (F_j)_Theta) under the collar-excluded
/// action. Samples are shared across entries; the matrix is symmetrized,
/// which common random numbers make exact.
inline RPGramReport rp_gram(const std::vector<PulledBackFunctional>& family, const SuiteSetup& setup) {
    const int p = static_cast<int>(family.size());
    if (p < 1) throw Error("rp_gram: empty family");
    const double delta = setup.schedule.delta(setup.n);
    for (const auto& F : family)
        if (!F.in_vplus(delta))
            throw VPlusViolationError("rp_gram: functional support not in V+ at delta = 1/Lambda_n");

    const ZonalKernel kernel = setup.kernel();
    RestrictedAction action(*setup.tr, kernel, setup.L, delta, setup.schedule.alpha);

    std::vector<std::function<double(const SpectralField&)>> evals;
    std::vector<PulledBackFunctional> reflected;
    reflected.reserve(family.size());
    for (const auto& F : family) reflected.push_back(theta_reflect(F));
    for (int i = 0; i < p; ++i) {
        evals.emplace_back([&family, i](const SpectralField& phi) { return evaluate_functional(family[static_cast<std::size_t>(i)], phi); });
        evals.emplace_back([&reflected, i](const SpectralField& phi) { return evaluate_functional(reflected[static_cast<std::size_t>(i)], phi); });
    }
    const WeightedRun run = run_weighted(
        setup.sampler(), setup.samples,
        [&action](const SpectralField& phi) { return action.base_action(phi); }, evals, setup.workers);

    RPGramReport rep;
    rep.p = p;
    rep.gram.resize(p, p);
    rep.std_errors.resize(p, p);
    double sup_max = 0.0;
    for (int i = 0; i < p; ++i) {
        sup_max = std::max(sup_max, family[static_cast<std::size_t>(i)].sup_bound);
        for (int j = 0; j < p; ++j) {
            const Eigen::VectorXd prod = run.fvals.col(2 * i).cwiseProduct(run.fvals.col(2 * j + 1));
            const RatioEstimate r = self_normalized_ratio(run.logw, prod);
            if (r.ess < 2.0) throw DegenerateWeightsError("rp_gram: effective sample size below 2");
            rep.gram(i, j) = r.value;
            rep.std_errors(i, j) = r.std_error;
            rep.ess = r.ess;
        }
    }
    rep.gram = (0.5 * (rep.gram + rep.gram.transpose())).eval();
    rep.std_errors = (0.5 * (rep.std_errors + rep.std_errors.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rep.gram);
    rep.min_eigenvalue = eig.eigenvalues().minCoeff();
    rep.max_std_error = rep.std_errors.maxCoeff();
    rep.deviation_bound = sup_max * sup_max * setup.schedule.ratio(setup.n);
    return rep;
}

struct RpDeviationReport {
    double deviation = 0.0;    // |I_full(F F_Theta) - I_restricted(F F_Theta)|
    double bound = 0.0;        // ||F||_inf^2 M_n R_n^D / Lambda_n
    double std_error = 0.0;    // combined error of the two estimates
    double value_full = 0.0;
    double value_restricted = 0.0;
};

/// Compares the F F_Theta expectation under the full action against the
/// collar-excluded one, with the scheduled bound.
inline RpDeviationReport rp_deviation(const PulledBackFunctional& F, const SuiteSetup& setup) {
    const double delta = setup.schedule.delta(setup.n);
    if (!F.in_vplus(delta)) throw VPlusViolationError("rp_deviation: functional support not in V+");
    const ZonalKernel kernel = setup.kernel();
    ActionEvaluator full(*setup.tr, kernel, setup.L, RegionSpec::full());
    RestrictedAction restricted(*setup.tr, kernel, setup.L, delta, setup.schedule.alpha);
    const PulledBackFunctional Ftheta = theta_reflect(F);

    const long N = setup.samples;
    Eigen::VectorXd logw_full(N), logw_restr(N), g(N);
    const FreeFieldSampler base = setup.sampler();
    parallel_for(static_cast<std::size_t>(N), setup.workers, [&](std::size_t i) {
        FreeFieldSampler sub = base.fork(i);
        const SpectralField phi = sub.sample();
        logw_full(static_cast<int>(i)) = -full.base_action(phi);
        logw_restr(static_cast<int>(i)) = -restricted.base_action(phi);
        g(static_cast<int>(i)) = evaluate_functional(F, phi) * evaluate_functional(Ftheta, phi);
    });
    const RatioEstimate rf = self_normalized_ratio(logw_full, g);
    const RatioEstimate rr = self_normalized_ratio(logw_restr, g);
    if (rf.ess < 2.0 || rr.ess < 2.0) throw DegenerateWeightsError("rp_deviation: effective sample size below 2");
    RpDeviationReport rep;
    rep.value_full = rf.value;
    rep.value_restricted = rr.value;
    rep.deviation = std::abs(rf.value - rr.value);
    rep.bound = F.sup_bound * F.sup_bound * setup.schedule.ratio(setup.n);
    rep.std_error = std::sqrt(rf.std_error * rf.std_error + rr.std_error * rr.std_error);
    return rep;
}

struct MarkovReport {
    double lhs = 0.0;  // E[F(phi+) F_Theta(phi-) w+ w-] (normalized)
    double rhs = 0.0;  // (E[F(phi+) w+])^2 (normalized)
    double combined_std_error = 0.0;
    double theta_leg_plus = 0.0;   // E[F(phi+) w+]
    double theta_leg_minus = 0.0;  // E[F_Theta(phi-) w-]
    double theta_leg_std_error = 0.0;
};

/// Monte Carlo check of the factorization of the collar-excluded expectation
/// into independent half-sphere pieces and its square form.
inline MarkovReport markov_factorization_check(const PulledBackFunctional& F, const SuiteSetup& setup,
                                               const HalfSpaceDecomposition& decomp) {
    const double delta = setup.schedule.delta(setup.n);
    if (!F.in_vplus(delta)) throw VPlusViolationError("markov_factorization_check: functional support not in V+");
    const ZonalKernel kernel = setup.kernel();
    ActionEvaluator plus_action(*setup.tr, kernel, setup.L, RegionSpec::plus(delta, setup.schedule.alpha));
    ActionEvaluator minus_action(*setup.tr, kernel, setup.L, RegionSpec::minus(delta, setup.schedule.alpha));
    const PulledBackFunctional Ftheta = theta_reflect(F);

    const long N = setup.samples;
    Eigen::VectorXd lw_plus(N), lw_minus(N), fp(N), fm(N);
    parallel_for(static_cast<std::size_t>(N), setup.workers, [&](std::size_t i) {
        const auto parts = sample_decomposed(decomp, substream_seed(setup.seed, i));
        const SpectralField& phip = parts[0];
        const SpectralField& phim = parts[2];
        lw_plus(static_cast<int>(i)) = -plus_action.base_action(phip);
        lw_minus(static_cast<int>(i)) = -minus_action.base_action(phim);
        fp(static_cast<int>(i)) = evaluate_functional(F, phip);
        fm(static_cast<int>(i)) = evaluate_functional(Ftheta, phim);
    });
    const RatioEstimate lhs = self_normalized_ratio(lw_plus + lw_minus, fp.cwiseProduct(fm));
    const RatioEstimate leg_plus = self_normalized_ratio(lw_plus, fp);
    const RatioEstimate leg_minus = self_normalized_ratio(lw_minus, fm);
    if (lhs.ess < 2.0) throw DegenerateWeightsError("markov_factorization_check: effective sample size below 2");
    MarkovReport rep;
    rep.lhs = lhs.value;
    rep.rhs = leg_plus.value * leg_plus.value;
    rep.combined_std_error = std::sqrt(lhs.std_error * lhs.std_error +
                                       4.0 * leg_plus.value * leg_plus.value * leg_plus.std_error * leg_plus.std_error);
    rep.theta_leg_plus = leg_plus.value;
    rep.theta_leg_minus = leg_minus.value;
    rep.theta_leg_std_error =
        std::sqrt(leg_plus.std_error * leg_plus.std_error + leg_minus.std_error * leg_minus.std_error);
    return rep;
}

struct InvarianceRow {
    std::string label;
    double value = 0.0;
    double std_error = 0.0;
    double diff_from_base = 0.0;
    double combined_std_error = 0.0;
    double crn_diff = 0.0;  // round-trip common-random-numbers difference
};

struct InvarianceReport {
    std::vector<InvarianceRow> rows;
    bool all_within_3se = true;
};

/// Estimates I(F_O) for each rotation with shared seeds and compares against
/// the unrotated estimate. The CRN column applies O then O^-1 to the test
/// functions, so it isolates the transform round-trip from Monte Carlo noise.
inline InvarianceReport rotation_invariance_suite(const PulledBackFunctional& F,
                                                  const std::vector<std::pair<std::string, Eigen::MatrixXd>>& rotations,
                                                  const SuiteSetup& setup) {
    const ZonalKernel kernel = setup.kernel();
    ActionEvaluator full(*setup.tr, kernel, setup.L, RegionSpec::full());
    const FreeFieldSampler sampler = setup.sampler();
    auto run_for = [&](const PulledBackFunctional& G) {
        return estimate(G, setup.n, &full, sampler, setup.samples, setup.workers);
    };
    const EstimateReport base = run_for(F);
    InvarianceReport rep;
    rep.rows.push_back({"identity", base.value, base.std_error, 0.0, base.std_error * std::numbers::sqrt2, 0.0});
    for (const auto& [label, O] : rotations) {
        PulledBackFunctional FO = F;
        PulledBackFunctional Frt = F;  // O then O^-1 round trip
        for (std::size_t j = 0; j < F.pullbacks.size(); ++j) {
            FO.pullbacks[j] = rotate_function(F.pullbacks[j], O, *setup.tr);
            Frt.pullbacks[j] = rotate_function(FO.pullbacks[j], O.transpose(), *setup.tr);
        }
        const EstimateReport er = run_for(FO);
        const EstimateReport ert = run_for(Frt);
        InvarianceRow row;
        row.label = label;
        row.value = er.value;
        row.std_error = er.std_error;
        row.diff_from_base = er.value - base.value;
        row.combined_std_error = std::sqrt(er.std_error * er.std_error + base.std_error * base.std_error);
        row.crn_diff = std::abs(ert.value - base.value);
        if (std::abs(row.diff_from_base) > 3.0 * row.combined_std_error) rep.all_within_3se = false;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace spherefield
