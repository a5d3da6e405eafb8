#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "mollifier.hpp"

namespace spherefield {

// A bounded local Lagrangian of (phi_Lambda, grad^2 phi_Lambda, ...,
// (grad^2)^{arity-1} phi_Lambda). Additive constants are carried in `offset`
// separately from the evaluator: they cancel exactly in the self-normalized
// estimator, which is what makes L -> L + c a bit-exact no-op there.
struct LagrangianTerm {
    int arity = 1;                                       // J = N + 1 field arguments
    std::function<double(const double*)> eval;           // base evaluator, |eval| <= sup_bound - |offset|
    double sup_bound = 0.0;                              // M >= sup |L|
    double offset = 0.0;

    double operator()(const double* v) const { return eval(v) + offset; }

    static LagrangianTerm zero() {
        return {1, [](const double*) { return 0.0; }, 0.0, 0.0};
    }
};

/// L' = L + M >= 0 with M' = 2M; estimates downstream are unchanged.
inline LagrangianTerm normalize_nonnegative(const LagrangianTerm& L) {
    LagrangianTerm out = L;
    out.offset += L.sup_bound;
    out.sup_bound = 2.0 * L.sup_bound;
    return out;
}

// Bounded phi^4 approximant family: bare constants (A_n, B_n, C_n) and clamp
// scales s_n -> infinity. The clamped monomials tend pointwise to x, x^2, x^4.
struct Phi4Family {
    std::function<double(int)> A = [](int) { return 1.0; };
    std::function<double(int)> B = [](int) { return 1.0; };
    std::function<double(int)> C = [](int) { return 1.0; };
    std::function<double(int)> s = [](int n) { return static_cast<double>(n); };
};

namespace detail {

inline double clamp_linear(double x, double s) { return s * std::tanh(x / s); }
inline double clamp_square(double x, double s) { return s * s * std::tanh(x * x / (s * s)); }
inline double clamp_quartic(double x, double s) {
    const double x2 = x * x;
    return s * s * s * s * std::tanh(x2 * x2 / (s * s * s * s));
}

}  // namespace detail

/// L_n(u, w) = A_n f_n(u w) + B_n g_n(u) + C_n h_n(u), arity 2, with smooth
/// clamps of x, x^2, x^4 at scale s_n.
inline LagrangianTerm phi4_evaluator(const Phi4Family& family, int n) {
    if (n < 1) throw Error("phi4_evaluator: n must be >= 1");
    const double a = family.A(n), b = family.B(n), c = family.C(n), s = family.s(n);
    LagrangianTerm L;
    L.arity = 2;
    L.eval = [a, b, c, s](const double* v) {
        return a * detail::clamp_linear(v[0] * v[1], s) + b * detail::clamp_square(v[0], s) +
               c * detail::clamp_quartic(v[0], s);
    };
    L.sup_bound = std::abs(a) * s + std::abs(b) * s * s + std::abs(c) * s * s * s * s;
    return L;
}

// Precomputed action integral over a node region: quadrature sum of
// L(phi_Lambda, ..., (grad^2)^{N} phi_Lambda) at the region's nodes, in fixed
// node order for a deterministic reduction.
class ActionEvaluator {
public:
    ActionEvaluator(const Transform& tr, const ZonalKernel& kernel, LagrangianTerm L, const RegionSpec& region)
        : transform_(&tr), L_(std::move(L)), region_(region) {
        if (kernel.l_max() != tr.l_max()) throw ShapeMismatchError("ActionEvaluator: kernel band limit mismatch");
        const auto& grid = tr.grid();
        nodes_ = region_nodes(region, grid);
        weights_.resize(nodes_.size());
        Yr_.resize(static_cast<int>(nodes_.size()), tr.basis().cols());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            weights_(static_cast<int>(i)) = grid.weights(nodes_[i]);
            Yr_.row(static_cast<int>(i)) = tr.basis().row(nodes_[i]);
        }
        measure_ = weights_.sum();
        const int M = static_cast<int>(tr.basis().cols());
        multipliers_.resize(L_.arity);
        for (int j = 0; j < L_.arity; ++j) {
            multipliers_[j].resize(M);
            for (int l = 0; l <= tr.l_max(); ++l) {
                const double lam = -eigenvalue(grid.D, l) / (grid.R * grid.R);
                double factor = kernel.multipliers(l);
                for (int p = 0; p < j; ++p) factor *= lam;
                multipliers_[j].segment(degree_offset(grid.D, l), degeneracy(grid.D, l)).setConstant(factor);
            }
        }
    }

    const LagrangianTerm& lagrangian() const { return L_; }
    const RegionSpec& region() const { return region_; }
    double region_measure() const { return measure_; }

    /// Action integral without the Lagrangian's additive offset.
    double base_action(const SpectralField& phi) const {
        if (phi.l_max != transform_->l_max() || phi.D != transform_->D())
            throw ShapeMismatchError("ActionEvaluator: field shape mismatch");
        const int nr = static_cast<int>(nodes_.size());
        const int J = L_.arity;
        Eigen::MatrixXd vals(nr, J);
        for (int j = 0; j < J; ++j)
            vals.col(j) = Yr_ * multipliers_[j].cwiseProduct(phi.coeffs);
        std::vector<double> v(static_cast<std::size_t>(J));
        double total = 0.0;
        for (int i = 0; i < nr; ++i) {
            for (int j = 0; j < J; ++j) v[static_cast<std::size_t>(j)] = vals(i, j);
            const double li = L_.eval(v.data());
            if (!std::isfinite(li)) throw NonFiniteError("evaluate_action: Lagrangian returned a non-finite value");
            total += weights_(i) * li;
        }
        return total;
    }

    /// Full action including the offset term offset * |region|.
    double action(const SpectralField& phi) const { return base_action(phi) + L_.offset * measure_; }

private:
    const Transform* transform_;
    LagrangianTerm L_;
    RegionSpec region_;
    std::vector<int> nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd Yr_;
    std::vector<Eigen::VectorXd> multipliers_;
    double measure_ = 0.0;
};

/// One-shot action integral over `region`.
inline double evaluate_action(const SpectralField& phi, const ZonalKernel& kernel, const LagrangianTerm& L,
                              const Transform& tr, const RegionSpec& region) {
    return ActionEvaluator(tr, kernel, L, region).action(phi);
}

}  // namespace spherefield
