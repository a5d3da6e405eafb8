#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "common.hpp"

namespace spherefield {

// A point on the sphere S_R in R^D x R given by |x|^2 + (y - R)^2 = R^2.
// The "south pole" is (0, 0), the removed projection pole is (0, 2R).
struct SpherePoint {
    Eigen::VectorXd x;  // first D embedding coordinates
    double y = 0.0;     // last embedding coordinate, in [0, 2R]
    double R = 1.0;

    int dim() const { return static_cast<int>(x.size()); }
    double xd() const { return x(x.size() - 1); }

    bool on_sphere(double rtol = 1e-12) const {
        const double lhs = x.squaredNorm() + (y - R) * (y - R);
        return std::abs(lhs - R * R) <= rtol * R * R && y >= -rtol * R && y <= (2.0 + rtol) * R;
    }
};

/// s(x, y) = 2R x / (2R - y), defined away from the pole (0, 2R).
inline Eigen::VectorXd stereographic_project(const SpherePoint& p, double eps = 1e-12) {
    const double denom = 2.0 * p.R - p.y;
    if (denom < eps * p.R)
        throw PoleProximityError("stereographic_project: point too close to the removed pole (0, 2R)");
    return (2.0 * p.R / denom) * p.x;
}

/// Inverse of the stereographic projection; total on R^D.
inline SpherePoint stereographic_inverse(const Eigen::VectorXd& u, double R) {
    const double u2 = u.squaredNorm();
    const double denom = u2 + 4.0 * R * R;
    SpherePoint p;
    p.R = R;
    p.x = (4.0 * R * R / denom) * u;
    p.y = 2.0 * R * u2 / denom;
    return p;
}

enum class RegionKind { plus, minus, collar, full };

// Half-space split of the sphere in the x_D coordinate. The effective collar
// half-width is alpha * delta.
struct RegionSpec {
    RegionKind kind = RegionKind::full;
    double delta = 0.0;
    double alpha = 1.0;

    double halfwidth() const { return alpha * delta; }

    static RegionSpec full() { return {RegionKind::full, 0.0, 1.0}; }
    static RegionSpec plus(double delta, double alpha = 1.0) { return {RegionKind::plus, delta, alpha}; }
    static RegionSpec minus(double delta, double alpha = 1.0) { return {RegionKind::minus, delta, alpha}; }
    static RegionSpec collar(double delta, double alpha = 1.0) { return {RegionKind::collar, delta, alpha}; }
};

// Quadrature nodes and weights for integration over S_R. Harmonics are kept
// orthonormal on the unit sphere; the R^D area scale lives entirely in the
// weights, so sum(weights) = |S_R| and analyze() divides by R^D.
struct QuadratureGrid {
    int D = 1;
    double R = 1.0;
    int l_exact = 0;          // products of harmonics up to this degree integrate exactly
    Eigen::MatrixXd unit;     // (D+1) x n centered unit coordinates; row D is (y - R)/R
    Eigen::VectorXd weights;  // positive area weights, sum = |S_R^D|

    int n() const { return static_cast<int>(weights.size()); }

    SpherePoint point(int i) const {
        SpherePoint p;
        p.R = R;
        p.x = R * unit.col(i).head(D);
        p.y = R * (1.0 + unit(D, i));
        return p;
    }

    /// x_D coordinate of node i (the half-space splitting coordinate).
    double xd(int i) const { return R * unit(D - 1, i); }

    /// Largest angular distance between neighbouring nodes.
    double node_spacing() const { return spacing_; }

    double spacing_ = 0.0;
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, Eigen::VectorXd& z, Eigen::VectorXd& w) {
    z.resize(n);
    w.resize(n);
    const double pi = std::numbers::pi;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        z(i) = -x;
        z(n - 1 - i) = x;
        double wi = 2.0 / ((1.0 - x * x) * dp * dp);
        w(i) = wi;
        w(n - 1 - i) = wi;
    }
}

}  // namespace detail

/// Builds a grid exact for products of harmonics up to degree `resolution`.
/// D=1: equispaced angles (offset half a step so neither pole is a node).
/// D=2: Gauss-Legendre in the polar coordinate x equispaced azimuths.
inline QuadratureGrid build_quadrature(int D, double R, int resolution) {
    if (D != 1 && D != 2)
        throw DimensionError("build_quadrature: only D in {1, 2} is supported");
    if (resolution < 1) throw Error("build_quadrature: resolution must be >= 1");
    const double pi = std::numbers::pi;
    QuadratureGrid g;
    g.D = D;
    g.R = R;
    g.l_exact = resolution;
    if (D == 1) {
        const int n = 2 * resolution + 2;
        g.unit.resize(2, n);
        g.weights = Eigen::VectorXd::Constant(n, 2.0 * pi * R / n);
        for (int j = 0; j < n; ++j) {
            const double th = (j + 0.5) * 2.0 * pi / n;  // angle from the south pole
            g.unit(0, j) = std::sin(th);
            g.unit(1, j) = -std::cos(th);
        }
        g.spacing_ = 2.0 * pi / n;
    } else {
        const int ngl = resolution + 1;
        const int naz = 2 * resolution + 2;
        Eigen::VectorXd z, wz;
        detail::gauss_legendre(ngl, z, wz);
        const int n = ngl * naz;
        g.unit.resize(3, n);
        g.weights.resize(n);
        const double waz = 2.0 * pi / naz;
        int idx = 0;
        for (int i = 0; i < ngl; ++i) {
            const double s = std::sqrt(1.0 - z(i) * z(i));
            for (int j = 0; j < naz; ++j, ++idx) {
                const double phi = (j + 0.5) * waz;  // offset keeps the grid closed under phi -> -phi
                g.unit(0, idx) = s * std::cos(phi);
                g.unit(1, idx) = s * std::sin(phi);
                g.unit(2, idx) = z(i);
                g.weights(idx) = R * R * wz(i) * waz;
            }
        }
        g.spacing_ = std::max(pi / ngl, waz);
    }
    return g;
}

inline RegionKind classify_node(const SpherePoint& p, const RegionSpec& region) {
    const double h = region.halfwidth();
    if (p.xd() > h) return RegionKind::plus;
    if (p.xd() < -h) return RegionKind::minus;
    return RegionKind::collar;
}

inline bool node_in_region(double xd, const RegionSpec& region) {
    const double h = region.halfwidth();
    switch (region.kind) {
        case RegionKind::full: return true;
        case RegionKind::plus: return xd > h;
        case RegionKind::minus: return xd < -h;
        case RegionKind::collar: return xd >= -h && xd <= h;
    }
    return false;
}

/// Sum of quadrature weights of the nodes classified into `region`.
inline double region_measure(const RegionSpec& region, const QuadratureGrid& grid) {
    double total = 0.0;
    for (int i = 0; i < grid.n(); ++i)
        if (node_in_region(grid.xd(i), region)) total += grid.weights(i);
    return total;
}

/// Indices of the grid nodes lying in `region`, in grid order.
inline std::vector<int> region_nodes(const RegionSpec& region, const QuadratureGrid& grid) {
    std::vector<int> idx;
    idx.reserve(grid.n());
    for (int i = 0; i < grid.n(); ++i)
        if (node_in_region(grid.xd(i), region)) idx.push_back(i);
    return idx;
}

}  // namespace spherefield
