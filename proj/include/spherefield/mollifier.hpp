#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>

#include "harmonics.hpp"

namespace spherefield {

// Radial profile of a positive, smooth, compactly supported, rotationally
// invariant mollifier on R^D.
struct MollifierSpec {
    std::function<double(double)> profile;  // profile(r), zero for r >= support_radius
    double support_radius = 1.0;

    /// The standard bump exp(-1/(1 - r^2)).
    static MollifierSpec standard_bump(double support_radius = 1.0) {
        MollifierSpec s;
        s.support_radius = support_radius;
        s.profile = [support_radius](double r) {
            const double t = r / support_radius;
            if (t * t >= 1.0) return 0.0;
            return std::exp(-1.0 / (1.0 - t * t));
        };
        return s;
    }
};

// Degree multipliers of the zonal convolution kernel h_Lambda pulled back to
// the sphere; mollification acts as phi_{l,m} -> c_l phi_{l,m}, with c_0 = 1.
struct ZonalKernel {
    Eigen::VectorXd multipliers;  // c_l, l = 0..l_max
    bool narrow_limit = false;    // kernel below grid resolution, identity multipliers

    int l_max() const { return static_cast<int>(multipliers.size()) - 1; }
};

namespace detail {

// Geodesic half-width on the sphere of the pulled-back kernel support:
// |s(theta)| = 2R tan(psi/2) < support/Lambda.
inline double pullback_halfwidth(double support_radius, double lambda, double R) {
    return 2.0 * std::atan(support_radius / (lambda * 2.0 * R));
}

}  // namespace detail

/// Zonal projection of h_Lambda o s onto degrees 0..l_max, normalized so that
/// c_0 = 1 (the kernel integrates to one). Errors when the pulled-back
/// support is narrower than the grid node spacing.
inline ZonalKernel build_kernel(const MollifierSpec& spec, double lambda, double R, const QuadratureGrid& grid,
                                int l_max) {
    if (lambda <= 0.0) throw Error("build_kernel: Lambda must be > 0");
    const double psi_max = detail::pullback_halfwidth(spec.support_radius, lambda, R);
    if (psi_max < grid.node_spacing())
        throw ResolutionError("build_kernel: kernel narrower than the grid node spacing");

    // Quadrature of the zonal projection integrals on the kernel support.
    const int nq = std::max(64, 4 * l_max);
    Eigen::VectorXd z, w;
    detail::gauss_legendre(nq, z, w);

    ZonalKernel k;
    k.multipliers = Eigen::VectorXd::Zero(l_max + 1);
    if (grid.D == 1) {
        // c_l ~ int_0^psi_max h(2 R Lambda tan(psi/2)) cos(l psi) dpsi
        for (int q = 0; q < nq; ++q) {
            const double psi = 0.5 * (z(q) + 1.0) * psi_max;
            const double val = spec.profile(lambda * 2.0 * R * std::tan(0.5 * psi)) * w(q);
            for (int l = 0; l <= l_max; ++l) k.multipliers(l) += val * std::cos(l * psi);
        }
    } else {
        // c_l ~ int_{cos psi_max}^1 h(2 R Lambda tan(acos(u)/2)) P_l(u) du
        const double lo = std::cos(psi_max);
        for (int q = 0; q < nq; ++q) {
            const double u = 0.5 * ((1.0 - lo) * z(q) + (1.0 + lo));
            const double val = spec.profile(lambda * 2.0 * R * std::tan(0.5 * std::acos(std::clamp(u, -1.0, 1.0)))) * w(q);
            double p0 = 1.0, p1 = u;
            k.multipliers(0) += val;
            if (l_max >= 1) k.multipliers(1) += val * u;
            for (int l = 2; l <= l_max; ++l) {
                const double p2 = ((2.0 * l - 1.0) * u * p1 - (l - 1.0) * p0) / l;
                k.multipliers(l) += val * p2;
                p0 = p1;
                p1 = p2;
            }
        }
    }
    if (k.multipliers(0) <= 0.0) throw Error("build_kernel: kernel normalization is not positive");
    k.multipliers /= k.multipliers(0);
    return k;
}

/// Kernel for a band-limited field when Lambda may exceed the grid's
/// resolution bound: beyond it, mollification at this band limit is the
/// identity, so identity multipliers are returned with `narrow_limit` set.
inline ZonalKernel build_kernel_clamped(const MollifierSpec& spec, double lambda, double R,
                                        const QuadratureGrid& grid, int l_max) {
    const double psi_max = detail::pullback_halfwidth(spec.support_radius, lambda, R);
    if (psi_max < grid.node_spacing()) {
        ZonalKernel k;
        k.multipliers = Eigen::VectorXd::Ones(l_max + 1);
        k.narrow_limit = true;
        return k;
    }
    return build_kernel(spec, lambda, R, grid, l_max);
}

/// phi_Lambda = h_Lambda * phi: coefficient-wise multiplication by c_l.
inline SpectralField mollify(const SpectralField& f, const ZonalKernel& kernel) {
    if (kernel.l_max() != f.l_max) throw ShapeMismatchError("mollify: band limit mismatch");
    SpectralField out = f;
    for (int l = 0; l <= f.l_max; ++l)
        out.coeffs.segment(degree_offset(f.D, l), degeneracy(f.D, l)) *= kernel.multipliers(l);
    return out;
}

}  // namespace spherefield
