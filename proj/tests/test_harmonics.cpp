#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "spherefield/harmonics.hpp"

using namespace spherefield;

namespace {

SpectralField random_field(int D, double R, int l_max, unsigned seed) {
    SpectralField f(D, R, l_max);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs(i) = normal(rng);
    return f;
}

}  // namespace

TEST_CASE("degeneracy matches the dimension formula", "[harmonics]") {
    CHECK(degeneracy(2, 0) == 1);
    CHECK(degeneracy(2, 1) == 3);
    CHECK(degeneracy(3, 1) == 4);
    CHECK(degeneracy(1, 5) == 2);
    CHECK(degeneracy(2, 7) == 15);
    CHECK(degeneracy(3, 4) == 25);  // (l+1)^2 on the 3-sphere
    CHECK_THROWS_AS(degeneracy(40, 1000000), OverflowError);
}

TEST_CASE("degeneracy sums equal the coefficient count", "[harmonics]") {
    for (int D : {1, 2}) {
        for (int l_max : {0, 1, 5, 16}) {
            std::int64_t total = 0;
            for (int l = 0; l <= l_max; ++l) total += degeneracy(D, l);
            CHECK(total == coeff_count(D, l_max));
        }
    }
}

TEST_CASE("Laplace-Beltrami spectral values", "[harmonics]") {
    CHECK(eigenvalue(1, 0) == 0.0);
    CHECK(eigenvalue(2, 0) == 0.0);
    CHECK(eigenvalue(2, 1) == 2.0);
    for (int l = 0; l <= 20; ++l) CHECK(eigenvalue(1, l) == static_cast<double>(l) * l);
}

TEST_CASE("synthesis of reference fields", "[harmonics]") {
    auto grid = build_quadrature(2, 1.0, 8);
    Transform tr(grid, 8);

    SpectralField constant(2, 1.0, 8);
    constant.at(0, 0) = 2.5;
    Eigen::VectorXd vals = tr.synthesize(constant);
    const double y00 = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (int i = 0; i < vals.size(); ++i) CHECK(vals(i) == Catch::Approx(2.5 * y00).epsilon(1e-13));

    // Degree-1 zonal harmonic: Y_{1,0}(u) = sqrt(3/4pi) * u_z.
    SpectralField zonal(2, 1.0, 8);
    zonal.at(1, 0) = 1.0;
    vals = tr.synthesize(zonal);
    for (int i = 0; i < grid.n(); ++i)
        CHECK(vals(i) == Catch::Approx(std::sqrt(3.0 / (4.0 * std::numbers::pi)) * grid.unit(2, i)).margin(1e-12));

    SpectralField zero(2, 1.0, 8);
    CHECK(tr.synthesize(zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analyze is the inverse of synthesize on band-limited fields", "[harmonics]") {
    for (auto [D, l_max] : {std::pair{1, 128}, std::pair{2, 32}}) {
        auto grid = build_quadrature(D, 2.0, l_max);
        Transform tr(grid, l_max);
        SpectralField f = random_field(D, 2.0, l_max, 42 + D);
        SpectralField g = tr.analyze(tr.synthesize(f));
        CHECK((g.coeffs - f.coeffs).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("constant node values analyze to the constant mode", "[harmonics]") {
    auto grid = build_quadrature(1, 1.0, 8);
    Transform tr(grid, 8);
    SpectralField f = tr.analyze(Eigen::VectorXd::Constant(grid.n(), 3.0));
    CHECK(f.at(0, 0) == Catch::Approx(3.0 * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
    for (int i = 1; i < f.coeffs.size(); ++i) CHECK(std::abs(f.coeffs(i)) < 1e-12);
}

TEST_CASE("out-of-band harmonics alias without crashing", "[harmonics]") {
    // Values of a degree-(l_max+1) harmonic: the projection aliases into the
    // resolved band; no exactness is claimed, only that the result is finite.
    const int l_max = 8;
    auto grid = build_quadrature(1, 1.0, l_max);
    Transform tr(grid, l_max);
    Eigen::VectorXd vals(grid.n());
    for (int i = 0; i < grid.n(); ++i) {
        const double theta = std::atan2(grid.unit(0, i), -grid.unit(1, i));
        vals(i) = std::cos((l_max + 1) * theta);
    }
    SpectralField f = tr.analyze(vals);
    CHECK(f.coeffs.allFinite());
}

TEST_CASE("quadrature orthonormality across the band", "[harmonics]") {
    for (auto [D, l_max, R] : {std::tuple{1, 16, 2.0}, std::tuple{2, 12, 1.5}}) {
        auto grid = build_quadrature(D, R, l_max);
        Transform tr(grid, l_max);
        const double rd = std::pow(R, D);
        // Gram matrix of the basis under the grid inner product.
        Eigen::MatrixXd gram = tr.basis().transpose() * grid.weights.asDiagonal() * tr.basis() / rd;
        const int M = coeff_count(D, l_max);
        CHECK((gram - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("Laplacian powers act spectrally", "[harmonics]") {
    SpectralField f = random_field(2, 1.0, 6, 3);
    CHECK((apply_laplacian_power(f, 0).coeffs - f.coeffs).cwiseAbs().maxCoeff() == 0.0);

    SpectralField unit(2, 1.0, 6);
    unit.at(1, 0) = 1.0;
    CHECK(apply_laplacian_power(unit, 1).at(1, 0) == -2.0);

    SpectralField twice = apply_laplacian_power(apply_laplacian_power(f, 1), 1);
    SpectralField direct = apply_laplacian_power(f, 2);
    CHECK((twice.coeffs - direct.coeffs).cwiseAbs().maxCoeff() == 0.0);

    // Curvature scaling at radius R.
    SpectralField unitR(2, 3.0, 6);
    unitR.at(1, 0) = 1.0;
    CHECK(apply_laplacian_power(unitR, 1).at(1, 0) == Catch::Approx(-2.0 / 9.0));
}

TEST_CASE("Sobolev norms in the sequence convention", "[harmonics]") {
    SpectralField f(2, 1.0, 4);
    f.at(0, 0) = 1.0;
    for (int order : {-2, -1, 0, 1, 2}) CHECK(sobolev_norm(f, order) == 1.0);

    SpectralField g(2, 1.0, 4);
    g.at(1, 0) = 1.0;
    CHECK(sobolev_norm(g, 1) == Catch::Approx(std::sqrt(3.0)).epsilon(1e-14));

    SpectralField h = random_field(1, 1.0, 16, 9);
    CHECK(sobolev_norm(h, 0) == Catch::Approx(h.coeffs.norm()).epsilon(1e-13));
}

TEST_CASE("Parseval under quadrature", "[harmonics]") {
    for (auto [D, l_max, R] : {std::tuple{1, 32, 1.0}, std::tuple{2, 16, 2.5}}) {
        auto grid = build_quadrature(D, R, l_max);
        Transform tr(grid, l_max);
        SpectralField f = random_field(D, R, l_max, 11);
        Eigen::VectorXd vals = tr.synthesize(f);
        const double quad_norm = std::sqrt(vals.array().square().matrix().dot(grid.weights) / std::pow(R, D));
        CHECK(quad_norm == Catch::Approx(sobolev_norm(f, 0)).margin(1e-10));
    }
}

TEST_CASE("spectral Laplacian agrees with finite differences", "[harmonics]") {
    // Coarse cross-check on the circle: second angular derivative of a single
    // harmonic versus -l^2/R^2 times the harmonic.
    const double R = 2.0;
    const int l = 5;
    const double h = 1e-4;
    for (double theta : {0.3, 1.1, 2.9}) {
        const double fd =
            (std::cos(l * (theta + h)) - 2.0 * std::cos(l * theta) + std::cos(l * (theta - h))) / (h * h * R * R);
        const double spectral = -eigenvalue(1, l) / (R * R) * std::cos(l * theta);
        CHECK(fd == Catch::Approx(spectral).margin(1e-3));
    }
}

TEST_CASE("transform rejects mismatched shapes", "[harmonics]") {
    auto grid = build_quadrature(1, 1.0, 8);
    Transform tr(grid, 8);
    SpectralField wrong(1, 1.0, 16);
    CHECK_THROWS_AS(tr.synthesize(wrong), ShapeMismatchError);
    CHECK_THROWS_AS(tr.analyze(Eigen::VectorXd::Zero(3)), ShapeMismatchError);
    CHECK_THROWS_AS(Transform(grid, 12), ShapeMismatchError);
}
