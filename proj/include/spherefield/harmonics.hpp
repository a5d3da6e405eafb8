#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "geometry.hpp"

namespace spherefield {

/// Dimension of the space of degree-l spherical harmonics on S^D.
inline std::int64_t degeneracy(int D, int l) {
    if (D < 1 || l < 0) throw Error("degeneracy: need D >= 1, l >= 0");
    if (l == 0) return 1;
    if (D == 1) return 2;
    // (2l + D - 1) * (l + D - 2)! / ((D - 1)! l!)  ==  (2l + D - 1)/(D - 1) * C(l + D - 2, l)
    unsigned __int128 binom = 1;
    for (int i = 1; i <= D - 2; ++i) {
        binom = binom * static_cast<unsigned>(l + i);
        binom /= static_cast<unsigned>(i);
        if (binom > static_cast<unsigned __int128>(INT64_MAX)) throw OverflowError("degeneracy: overflow");
    }
    unsigned __int128 num = binom * static_cast<unsigned>(2 * l + D - 1);
    if (num / static_cast<unsigned>(D - 1) > static_cast<unsigned __int128>(INT64_MAX))
        throw OverflowError("degeneracy: overflow");
    return static_cast<std::int64_t>(num / static_cast<unsigned>(D - 1));
}

/// Positive Laplace-Beltrami spectral value l(l + D - 1) on the unit sphere.
inline double eigenvalue(int D, int l) {
    if (D < 1 || l < 0) throw Error("eigenvalue: need D >= 1, l >= 0");
    return static_cast<double>(l) * (l + D - 1.0);
}

struct HarmonicIndex {
    int l = 0;
    int m = 0;  // intra-degree index, 0 <= m < degeneracy(D, l)
};

/// Offset of degree l in the flat coefficient layout.
inline int degree_offset(int D, int l) {
    if (D == 1) return l == 0 ? 0 : 2 * l - 1;
    return l * l;  // D == 2
}

inline int coeff_count(int D, int l_max) {
    if (D == 1) return 2 * l_max + 1;
    return (l_max + 1) * (l_max + 1);
}

// A real field on S_R stored as harmonic coefficients. Intra-degree layout:
//   D=1: [cos l.theta, sin l.theta] at offsets 2l-1, 2l (l >= 1)
//   D=2: zonal at l^2, then [cos m.phi, sin m.phi] pairs at l^2 + 2m - 1, l^2 + 2m
struct SpectralField {
    int D = 1;
    double R = 1.0;
    int l_max = 0;
    Eigen::VectorXd coeffs;

    SpectralField() = default;
    SpectralField(int D_, double R_, int l_max_)
        : D(D_), R(R_), l_max(l_max_), coeffs(Eigen::VectorXd::Zero(coeff_count(D_, l_max_))) {}

    double& at(int l, int m) { return coeffs(degree_offset(D, l) + m); }
    double at(int l, int m) const { return coeffs(degree_offset(D, l) + m); }

    bool same_shape(const SpectralField& o) const {
        return D == o.D && R == o.R && l_max == o.l_max;
    }
};

inline void require_same_shape(const SpectralField& a, const SpectralField& b, const char* who) {
    if (!a.same_shape(b)) throw ShapeMismatchError(std::string(who) + ": field shape mismatch");
}

namespace detail {

// Fully normalized associated Legendre values Pbar_l^m(z) for fixed m,
// l = m..l_max (Holmes-Featherstone recurrence, no Condon-Shortley phase).
// Normalization: Y_{l,0} = Pbar_l^0, Y_{l,m}^{cos/sin} = sqrt(2) Pbar_l^m {cos,sin}(m phi)
// is orthonormal on the unit 2-sphere.
inline void normalized_plm(int m, int l_max, double z, Eigen::VectorXd& out) {
    const double pi = std::numbers::pi;
    out.resize(l_max - m + 1);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    double pmm = std::sqrt(1.0 / (4.0 * pi));
    for (int k = 1; k <= m; ++k) pmm *= s * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    out(0) = pmm;
    if (l_max == m) return;
    double pm1 = z * std::sqrt(2.0 * m + 3.0) * pmm;
    out(1) = pm1;
    double pm2 = pmm;
    for (int l = m + 2; l <= l_max; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
        const double b = std::sqrt(((2.0 * l + 1.0) * ((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m)) /
                                   ((2.0 * l - 3.0) * (static_cast<double>(l) * l - static_cast<double>(m) * m)));
        const double p = a * z * pm1 - b * pm2;
        out(l - m) = p;
        pm2 = pm1;
        pm1 = p;
    }
}

}  // namespace detail

/// Row of basis values (Y_{l,m})(u) at a centered unit point u, for all
/// coefficients up to l_max, in the flat layout above.
inline Eigen::RowVectorXd basis_row(int D, int l_max, const Eigen::VectorXd& u) {
    const double pi = std::numbers::pi;
    Eigen::RowVectorXd row(coeff_count(D, l_max));
    if (D == 1) {
        const double theta = std::atan2(u(0), -u(1));  // angle from the south pole
        row(0) = 1.0 / std::sqrt(2.0 * pi);
        const double c = 1.0 / std::sqrt(pi);
        for (int l = 1; l <= l_max; ++l) {
            row(2 * l - 1) = c * std::cos(l * theta);
            row(2 * l) = c * std::sin(l * theta);
        }
    } else {
        const double z = u(2);
        const double phi = std::atan2(u(1), u(0));
        Eigen::VectorXd plm;
        const double sqrt2 = std::numbers::sqrt2;
        for (int m = 0; m <= l_max; ++m) {
            detail::normalized_plm(m, l_max, z, plm);
            if (m == 0) {
                for (int l = 0; l <= l_max; ++l) row(l * l) = plm(l);
            } else {
                const double cm = sqrt2 * std::cos(m * phi);
                const double sm = sqrt2 * std::sin(m * phi);
                for (int l = m; l <= l_max; ++l) {
                    row(l * l + 2 * m - 1) = cm * plm(l - m);
                    row(l * l + 2 * m) = sm * plm(l - m);
                }
            }
        }
    }
    return row;
}

// Precomputed synthesis/analysis operator tying a grid to a band limit.
// Exactness requires grid.l_exact >= l_max.
class Transform {
public:
    Transform(const QuadratureGrid& grid, int l_max) : grid_(grid), l_max_(l_max) {
        if (grid.l_exact < l_max)
            throw ShapeMismatchError("Transform: grid is not exact for the requested band limit");
        const int n = grid.n();
        Y_.resize(n, coeff_count(grid.D, l_max));
        for (int i = 0; i < n; ++i) Y_.row(i) = basis_row(grid.D, l_max, grid.unit.col(i));
        rd_ = std::pow(grid.R, grid.D);
    }

    const QuadratureGrid& grid() const { return grid_; }
    int l_max() const { return l_max_; }
    int D() const { return grid_.D; }
    double R() const { return grid_.R; }
    const Eigen::MatrixXd& basis() const { return Y_; }
    double radius_power() const { return rd_; }

    /// Pointwise node values of the coefficient field.
    Eigen::VectorXd synthesize(const SpectralField& f) const {
        check(f);
        return Y_ * f.coeffs;
    }

    /// Quadrature projection of node values back onto the basis.
    SpectralField analyze(const Eigen::VectorXd& values) const {
        if (values.size() != grid_.n()) throw ShapeMismatchError("analyze: node value length mismatch");
        SpectralField f(grid_.D, grid_.R, l_max_);
        f.coeffs = Y_.transpose() * (grid_.weights.cwiseProduct(values)) / rd_;
        return f;
    }

    /// Value of the field at an arbitrary centered unit point.
    double evaluate(const SpectralField& f, const Eigen::VectorXd& u) const {
        check(f);
        return basis_row(grid_.D, l_max_, u) * f.coeffs;
    }

private:
    void check(const SpectralField& f) const {
        if (f.D != grid_.D || f.R != grid_.R || f.l_max != l_max_)
            throw ShapeMismatchError("Transform: field/grid band limit mismatch");
    }

    QuadratureGrid grid_;
    int l_max_;
    Eigen::MatrixXd Y_;
    double rd_;
};

/// Coefficient-wise (-eigenvalue/R^2)^N; the pointwise Laplace-Beltrami
/// spectrum on the radius-R sphere.
inline SpectralField apply_laplacian_power(const SpectralField& f, int N) {
    if (N < 0) throw Error("apply_laplacian_power: N must be >= 0");
    SpectralField out = f;
    if (N == 0) return out;
    for (int l = 0; l <= f.l_max; ++l) {
        const double lam = -eigenvalue(f.D, l) / (f.R * f.R);
        const int off = degree_offset(f.D, l);
        const int deg = static_cast<int>(degeneracy(f.D, l));
        // Applied one power at a time so N applications compose bit-exactly.
        for (int j = 0; j < N; ++j) out.coeffs.segment(off, deg) *= lam;
    }
    return out;
}

/// sqrt( sum (l(l+D-1)+1)^order |f_{l,m}|^2 ), the sequence-space Sobolev norm.
inline double sobolev_norm(const SpectralField& f, int order) {
    double total = 0.0;
    for (int l = 0; l <= f.l_max; ++l) {
        const double w = std::pow(eigenvalue(f.D, l) + 1.0, order);
        const int off = degree_offset(f.D, l);
        const int deg = static_cast<int>(degeneracy(f.D, l));
        total += w * f.coeffs.segment(off, deg).squaredNorm();
    }
    return std::sqrt(total);
}

}  // namespace spherefield
