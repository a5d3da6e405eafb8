#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <random>

#include "harmonics.hpp"

namespace spherefield {

/// Free-field covariance B(f, g) = sum f_{l,m} g_{l,m} / (l(l+D-1) + 1).
inline double covariance(const SpectralField& f, const SpectralField& g) {
    require_same_shape(f, g, "covariance");
    double total = 0.0;
    for (int l = 0; l <= f.l_max; ++l) {
        const int off = degree_offset(f.D, l);
        const int deg = static_cast<int>(degeneracy(f.D, l));
        total += f.coeffs.segment(off, deg).dot(g.coeffs.segment(off, deg)) / (eigenvalue(f.D, l) + 1.0);
    }
    return total;
}

/// Duality pairing phi(f) = sum phi_{l,m} f_{l,m}.
inline double pair_fields(const SpectralField& phi, const SpectralField& f) {
    require_same_shape(phi, f, "pair");
    return phi.coeffs.dot(f.coeffs);
}

/// Per-coefficient standard deviations of the free Gaussian measure.
inline Eigen::VectorXd mode_stddevs(int D, int l_max) {
    Eigen::VectorXd sd(coeff_count(D, l_max));
    for (int l = 0; l <= l_max; ++l) {
        const double s = 1.0 / std::sqrt(eigenvalue(D, l) + 1.0);
        sd.segment(degree_offset(D, l), degeneracy(D, l)).setConstant(s);
    }
    return sd;
}

// Seeded sampler for the free measure: independent centered Gaussian
// coefficients with Var(phi_{l,m}) = 1/(l(l+D-1)+1). One sampler per worker;
// use fork(i) to derive independent per-sample sub-streams.
class FreeFieldSampler {
public:
    FreeFieldSampler(int D, double R, int l_max, int k, std::uint64_t seed)
        : D_(D), R_(R), l_max_(l_max), k_(k), seed_(seed), engine_(seed), sd_(mode_stddevs(D, l_max)) {}

    int D() const { return D_; }
    double R() const { return R_; }
    int l_max() const { return l_max_; }
    int sobolev_index() const { return k_; }
    std::uint64_t seed() const { return seed_; }

    SpectralField sample() {
        SpectralField f(D_, R_, l_max_);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs(i) = sd_(i) * normal(engine_);
        return f;
    }

    /// Independent sampler for sub-stream i of this sampler's seed.
    FreeFieldSampler fork(std::uint64_t i) const {
        return FreeFieldSampler(D_, R_, l_max_, k_, substream_seed(seed_, i));
    }

private:
    int D_;
    double R_;
    int l_max_;
    int k_;
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    Eigen::VectorXd sd_;
};

/// Coefficient map of theta -> phi(Theta theta), Theta the x_D reflection.
/// Exact in the basis: sin-type coefficients flip sign.
inline SpectralField reflect_field(const SpectralField& f) {
    SpectralField out = f;
    for (int l = 1; l <= f.l_max; ++l) {
        const int off = degree_offset(f.D, l);
        if (f.D == 1) {
            out.coeffs(off + 1) = -f.coeffs(off + 1);
        } else {
            for (int m = 1; m <= l; ++m) out.coeffs(off + 2 * m) = -f.coeffs(off + 2 * m);
        }
    }
    return out;
}

// H^k-orthogonal split of the truncated coefficient space into subspaces of
// (band-limited) fields supported in the plus region, the minus region, and
// the collar complement. Projectors satisfy P+ + P0 + P- = I and Pa Pb = 0
// up to round-off; covariance blocks are Ba(f,g) = B(Pa f, Pa g).
struct HalfSpaceDecomposition {
    int D = 1;
    double R = 1.0;
    int l_max = 0;
    int k = 1;
    double delta = 0.0;
    double alpha = 1.0;
    Eigen::MatrixXd Pplus, Pzero, Pminus;  // projectors on coefficient space

    const Eigen::MatrixXd& projector(RegionKind kind) const {
        switch (kind) {
            case RegionKind::plus: return Pplus;
            case RegionKind::minus: return Pminus;
            case RegionKind::collar: return Pzero;
            default: throw Error("projector: full region has no projector");
        }
    }

    SpectralField project(RegionKind kind, const SpectralField& f) const {
        SpectralField out = f;
        out.coeffs = projector(kind) * f.coeffs;
        return out;
    }

    double block_covariance(RegionKind kind, const SpectralField& f, const SpectralField& g) const {
        return covariance(project(kind, f), project(kind, g));
    }
};

namespace detail {

inline double bump_profile(double r) {
    // exp(-1/(1-r^2)) on (-1, 1), 0 outside; the standard smooth bump.
    if (r * r >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r * r));
}

// H^k-orthonormal basis (as columns, in the H^k-weighted coordinates) of the
// span of `cols`, dropping directions below a relative singular value cutoff.
inline Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& cols, double rel_tol = 1e-10) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

}  // namespace detail

/// Builds the half-space decomposition at collar half-width delta. The plus
/// and minus subspaces are spans of band-limited smooth bumps centered at
/// nodes whose bump support stays inside the respective region; the minus
/// span is orthogonalized against the plus span so the three projectors are
/// mutually orthogonal to round-off.
inline HalfSpaceDecomposition build_decomposition(double delta, double alpha, const QuadratureGrid& grid,
                                                  int l_max, int k) {
    if (delta <= 0.0) throw Error("build_decomposition: delta must be > 0");
    Transform tr(grid, l_max);
    const int M = coeff_count(grid.D, l_max);
    const int n = grid.n();

    // Smooth bump of angular radius rho around each admissible node.
    const double rho = 2.0 * grid.node_spacing();
    const double margin = grid.R * rho;

    Eigen::VectorXd hk_weight(M);
    for (int l = 0; l <= l_max; ++l)
        hk_weight.segment(degree_offset(grid.D, l), degeneracy(grid.D, l))
            .setConstant(std::pow(eigenvalue(grid.D, l) + 1.0, 0.5 * k));

    auto bump_columns = [&](bool plus_side) {
        std::vector<int> centers;
        for (int i = 0; i < n; ++i) {
            const double xd = plus_side ? grid.xd(i) : -grid.xd(i);
            if (xd - margin > delta) centers.push_back(i);
        }
        if (centers.empty())
            throw DegenerateRegionError("build_decomposition: a half-space region contains no nodes");
        Eigen::MatrixXd cols(M, static_cast<int>(centers.size()));
        Eigen::VectorXd values(n);
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const Eigen::VectorXd uc = grid.unit.col(centers[c]);
            for (int i = 0; i < n; ++i) {
                const double dot = std::clamp(uc.dot(grid.unit.col(i)), -1.0, 1.0);
                values(i) = detail::bump_profile(std::acos(dot) / rho);
            }
            cols.col(c) = hk_weight.cwiseProduct(tr.analyze(values).coeffs);
        }
        return cols;
    };

    const Eigen::MatrixXd Wplus = detail::orthonormal_range(bump_columns(true));
    Eigen::MatrixXd minus_cols = bump_columns(false);
    minus_cols -= Wplus * (Wplus.transpose() * minus_cols);
    const Eigen::MatrixXd Wminus = detail::orthonormal_range(minus_cols);

    const Eigen::MatrixXd Qplus = Wplus * Wplus.transpose();
    const Eigen::MatrixXd Qminus = Wminus * Wminus.transpose();
    const Eigen::MatrixXd Qzero = Eigen::MatrixXd::Identity(M, M) - Qplus - Qminus;

    const Eigen::VectorXd inv_w = hk_weight.cwiseInverse();
    HalfSpaceDecomposition d;
    d.D = grid.D;
    d.R = grid.R;
    d.l_max = l_max;
    d.k = k;
    d.delta = delta;
    d.alpha = alpha;
    d.Pplus = inv_w.asDiagonal() * Qplus * hk_weight.asDiagonal();
    d.Pminus = inv_w.asDiagonal() * Qminus * hk_weight.asDiagonal();
    d.Pzero = inv_w.asDiagonal() * Qzero * hk_weight.asDiagonal();
    return d;
}

/// Draws (phi+, phi0, phi-) from the three independent Gaussian measures with
/// covariances B+, B0, B-. Component a is (Pa)^T phi_a with phi_a an
/// independent free-field sample, so Cov(phi_a(f), phi_a(g)) = B(Pa f, Pa g).
inline std::array<SpectralField, 3> sample_decomposed(const HalfSpaceDecomposition& d, std::uint64_t seed) {
    std::array<SpectralField, 3> out;
    const Eigen::MatrixXd* P[3] = {&d.Pplus, &d.Pzero, &d.Pminus};
    for (int a = 0; a < 3; ++a) {
        FreeFieldSampler s(d.D, d.R, d.l_max, d.k, substream_seed(seed, static_cast<std::uint64_t>(a)));
        SpectralField phi = s.sample();
        out[a] = phi;
        out[a].coeffs = P[a]->transpose() * phi.coeffs;
    }
    return out;
}

}  // namespace spherefield
