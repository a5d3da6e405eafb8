#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "spherefield/gaussian.hpp"

using namespace spherefield;

namespace {

SpectralField random_field(int D, double R, int l_max, unsigned seed) {
    SpectralField f(D, R, l_max);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs(i) = normal(rng);
    return f;
}

// Band-limited smooth bump of angular radius rho around the unit point uc.
SpectralField bump_field(const Transform& tr, const Eigen::VectorXd& uc, double rho) {
    const auto& grid = tr.grid();
    Eigen::VectorXd vals(grid.n());
    for (int i = 0; i < grid.n(); ++i) {
        const double g = std::acos(std::clamp(uc.dot(grid.unit.col(i)), -1.0, 1.0));
        vals(i) = detail::bump_profile(g / rho);
    }
    return tr.analyze(vals);
}

Eigen::VectorXd unit_point1(double theta) {
    Eigen::VectorXd u(2);
    u << std::sin(theta), -std::cos(theta);
    return u;
}

}  // namespace

TEST_CASE("covariance diagonal form", "[gaussian]") {
    SpectralField f(2, 1.0, 4);
    f.at(0, 0) = 1.0;
    CHECK(covariance(f, f) == 1.0);

    for (int m = 0; m < 3; ++m) {
        SpectralField g(2, 1.0, 4);
        g.at(1, m) = 1.0;
        CHECK(covariance(g, g) == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
    }

    SpectralField a(2, 1.0, 4), b(2, 1.0, 4);
    a.at(1, 0) = 2.0;
    b.at(2, 3) = 5.0;
    CHECK(covariance(a, b) == 0.0);

    SpectralField other(2, 1.0, 6);
    CHECK_THROWS_AS(covariance(a, other), ShapeMismatchError);
}

TEST_CASE("sampler is seed-deterministic", "[gaussian]") {
    FreeFieldSampler s1(2, 1.0, 8, 2, 123), s2(2, 1.0, 8, 2, 123);
    for (int i = 0; i < 3; ++i) {
        SpectralField a = s1.sample(), b = s2.sample();
        CHECK(a.coeffs == b.coeffs);
    }
    FreeFieldSampler s3(2, 1.0, 8, 2, 124);
    CHECK(s1.sample().coeffs != s3.sample().coeffs);
}

TEST_CASE("per-mode statistics match the covariance", "[gaussian]") {
    const int N = 100000;
    FreeFieldSampler s(2, 1.0, 2, 2, 7);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero(), sumsq = Eigen::Vector3d::Zero();
    for (int i = 0; i < N; ++i) {
        SpectralField phi = s.sample();
        for (int m = 0; m < 3; ++m) {
            const double v = phi.at(1, m);
            sum(m) += v;
            sumsq(m) += v * v;
        }
    }
    for (int m = 0; m < 3; ++m) {
        const double mean = sum(m) / N;
        const double var = sumsq(m) / N - mean * mean;
        const double se_mean = std::sqrt(1.0 / 3.0 / N);
        const double se_var = (1.0 / 3.0) * std::sqrt(2.0 / N);
        CHECK(std::abs(mean) < 3.0 * se_mean);
        CHECK(std::abs(var - 1.0 / 3.0) < 3.0 * se_var);
    }
}

TEST_CASE("pairing is the coefficient duality", "[gaussian]") {
    SpectralField phi = random_field(1, 1.0, 8, 5);
    SpectralField e(1, 1.0, 8);
    e.at(3, 1) = 1.0;
    CHECK(pair_fields(phi, e) == phi.at(3, 1));

    SpectralField f = random_field(1, 1.0, 8, 6), g = random_field(1, 1.0, 8, 7);
    SpectralField comb(1, 1.0, 8);
    const double a = 2.5, b = -1.25;
    comb.coeffs = a * f.coeffs + b * g.coeffs;
    CHECK(pair_fields(phi, comb) == Catch::Approx(a * pair_fields(phi, f) + b * pair_fields(phi, g)).epsilon(1e-12));
}

TEST_CASE("pair covariance and characteristic functional", "[gaussian]") {
    const int N = 100000;
    const int l_max = 4;
    FreeFieldSampler s(1, 1.0, l_max, 2, 99);
    std::vector<SpectralField> fs;
    for (unsigned t = 0; t < 10; ++t) {
        SpectralField f = random_field(1, 1.0, l_max, 100 + t);
        f.coeffs *= 0.5;
        fs.push_back(f);
    }
    const SpectralField& f0 = fs[0];
    const SpectralField& g0 = fs[1];
    double sum_fg = 0.0;
    std::vector<double> sum_cos(fs.size(), 0.0), sum_cos_sq(fs.size(), 0.0);
    for (int i = 0; i < N; ++i) {
        SpectralField phi = s.sample();
        sum_fg += pair_fields(phi, f0) * pair_fields(phi, g0);
        for (std::size_t t = 0; t < fs.size(); ++t) {
            const double c = std::cos(pair_fields(phi, fs[t]));
            sum_cos[t] += c;
            sum_cos_sq[t] += c * c;
        }
    }
    const double covar = covariance(f0, g0);
    const double se_fg = std::sqrt((covariance(f0, f0) * covariance(g0, g0) + covar * covar) / N);
    CHECK(std::abs(sum_fg / N - covar) < 3.0 * se_fg);
    for (std::size_t t = 0; t < fs.size(); ++t) {
        const double mean = sum_cos[t] / N;
        const double var = sum_cos_sq[t] / N - mean * mean;
        const double target = std::exp(-0.5 * covariance(fs[t], fs[t]));
        CHECK(std::abs(mean - target) < 3.0 * std::sqrt(var / N));
    }
}

TEST_CASE("reflection is an exact involution preserving covariance", "[gaussian]") {
    for (int D : {1, 2}) {
        SpectralField f = random_field(D, 1.0, 10, 21), g = random_field(D, 1.0, 10, 22);
        CHECK(reflect_field(reflect_field(f)).coeffs == f.coeffs);
        CHECK(covariance(reflect_field(f), reflect_field(g)) == Catch::Approx(covariance(f, g)).epsilon(1e-14));
    }
}

TEST_CASE("reflection carries plus bumps to minus bumps", "[gaussian]") {
    auto grid = build_quadrature(1, 1.0, 64);
    Transform tr(grid, 64);
    const double theta_c = 0.8;
    SpectralField bump = bump_field(tr, unit_point1(theta_c), 0.3);
    SpectralField mirrored = reflect_field(bump);
    Eigen::VectorXd vb = tr.synthesize(bump), vm = tr.synthesize(mirrored);
    const double peak = vb.cwiseAbs().maxCoeff();
    for (int i = 0; i < grid.n(); ++i) {
        const double theta = std::atan2(grid.unit(0, i), -grid.unit(1, i));
        // Mirrored values coincide with the original at the reflected angle.
        const double direct = tr.evaluate(bump, unit_point1(-theta));
        CHECK(vm(i) == Catch::Approx(direct).margin(1e-10 * peak));
    }
    // Mass moved from x_D > 0 to x_D < 0.
    double plus_mass = 0.0, minus_mass = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
        if (grid.xd(i) > 0.3) plus_mass += std::abs(vm(i));
        if (grid.xd(i) < -0.3) minus_mass += std::abs(vm(i));
    }
    CHECK(minus_mass > 100.0 * plus_mass);
}

TEST_CASE("reflection invariance in law", "[gaussian]") {
    const int N = 50000;
    FreeFieldSampler s(1, 1.0, 6, 2, 31);
    SpectralField f = random_field(1, 1.0, 6, 32);
    SpectralField rf = reflect_field(f);
    double s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0;
    for (int i = 0; i < N; ++i) {
        SpectralField phi = s.sample();
        const double a = pair_fields(phi, f), b = pair_fields(phi, rf);
        s1 += a;
        s2 += b;
        q1 += a * a;
        q2 += b * b;
    }
    const double var = covariance(f, f);
    const double se_mean = std::sqrt(var / N), se_var = var * std::sqrt(2.0 / N);
    CHECK(std::abs(s1 / N - s2 / N) < 3.0 * std::numbers::sqrt2 * se_mean);
    CHECK(std::abs(q1 / N - q2 / N) < 3.0 * std::numbers::sqrt2 * se_var);
}

TEST_CASE("Green-form identity", "[gaussian]") {
    const int l_max = 16;
    auto grid = build_quadrature(1, 1.0, l_max);
    Transform tr(grid, l_max);
    SpectralField f = random_field(1, 1.0, l_max, 51), g = random_field(1, 1.0, l_max, 52);
    SpectralField resolvent_g = g;
    for (int l = 0; l <= l_max; ++l)
        resolvent_g.coeffs.segment(degree_offset(1, l), degeneracy(1, l)) /= (eigenvalue(1, l) + 1.0);
    const Eigen::VectorXd vf = tr.synthesize(f), vg = tr.synthesize(resolvent_g);
    const double quad = vf.cwiseProduct(vg).dot(grid.weights);
    CHECK(quad == Catch::Approx(covariance(f, g)).margin(1e-10));
}

TEST_CASE("half-space decomposition projector identities", "[gaussian]") {
    const int l_max = 64;
    auto grid = build_quadrature(1, 1.0, l_max);
    const double delta = 0.1;
    auto d = build_decomposition(delta, 1.0, grid, l_max, 0);
    const int M = coeff_count(1, l_max);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
    CHECK((d.Pplus + d.Pzero + d.Pminus - I).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.Pplus * d.Pminus).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.Pplus * d.Pzero).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.Pminus * d.Pzero).cwiseAbs().maxCoeff() < 1e-10);
    // Projectors are idempotent.
    CHECK((d.Pplus * d.Pplus - d.Pplus).cwiseAbs().maxCoeff() < 1e-10);

    // Covariance blocks are symmetric PSD: check via random quadratic forms.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        SpectralField v(1, 1.0, l_max);
        for (int i = 0; i < M; ++i) v.coeffs(i) = normal(rng);
        for (RegionKind kind : {RegionKind::plus, RegionKind::collar, RegionKind::minus})
            CHECK(d.block_covariance(kind, v, v) >= -1e-12);
    }
}

TEST_CASE("plus bumps project almost entirely onto the plus subspace", "[gaussian]") {
    const int l_max = 64;
    auto grid = build_quadrature(1, 1.0, l_max);
    Transform tr(grid, l_max);
    const double delta = 0.1;
    auto d = build_decomposition(delta, 1.0, grid, l_max, 0);
    // Bump centered at x_D = 2 delta, support inside the plus region.
    const double theta_c = std::asin(2.0 * delta);
    SpectralField f = bump_field(tr, unit_point1(theta_c), 0.09);
    // Measured in the covariance norm, which weights the well-resolved modes.
    const double ratio = sobolev_norm(d.project(RegionKind::minus, f), -1) / sobolev_norm(f, -1);
    CHECK(ratio < 1e-3);
}

TEST_CASE("cross-covariance of separated bumps decays with the band limit", "[gaussian]") {
    const double delta = 0.1;
    double prev = std::numeric_limits<double>::infinity();
    for (int l_max : {16, 32, 64, 128}) {
        auto grid = build_quadrature(1, 1.0, l_max);
        Transform tr(grid, l_max);
        auto d = build_decomposition(delta, 1.0, grid, l_max, 0);
        SpectralField f = bump_field(tr, unit_point1(-0.8), 0.2);          // well inside minus
        SpectralField g = bump_field(tr, unit_point1(0.7), 0.2);           // well inside plus
        const double cross = std::abs(covariance(d.project(RegionKind::collar, f), d.project(RegionKind::plus, g)));
        CHECK(cross < prev + 1e-12);
        prev = cross;
        if (l_max == 128) CHECK(cross < 1e-4);
    }
}

TEST_CASE("decomposed sampling reproduces the covariance", "[gaussian]") {
    const int l_max = 24;
    auto grid = build_quadrature(1, 1.0, l_max);
    Transform tr(grid, l_max);
    auto d = build_decomposition(0.15, 1.0, grid, l_max, 0);

    auto p1 = sample_decomposed(d, 77);
    auto p2 = sample_decomposed(d, 77);
    CHECK(p1[0].coeffs == p2[0].coeffs);
    CHECK(p1[2].coeffs == p2[2].coeffs);

    SpectralField f = bump_field(tr, unit_point1(0.9), 0.25);
    SpectralField g = bump_field(tr, unit_point1(-0.9), 0.25);
    const int N = 50000;
    double cross = 0.0, var_sum = 0.0;
    for (int i = 0; i < N; ++i) {
        auto parts = sample_decomposed(d, substream_seed(90210, static_cast<std::uint64_t>(i)));
        const double ap = pair_fields(parts[0], f), am = pair_fields(parts[2], g);
        cross += ap * am;
        SpectralField total = parts[0];
        total.coeffs += parts[1].coeffs + parts[2].coeffs;
        const double pf = pair_fields(total, f);
        var_sum += pf * pf;
    }
    const double vf = covariance(f, f);
    // The paired legs are driven by independent streams: their product has mean
    // zero and variance equal to the product of the block variances.
    const double vp = d.block_covariance(RegionKind::plus, f, f);
    const double vm = d.block_covariance(RegionKind::minus, g, g);
    CHECK(std::abs(cross / N) < 3.0 * std::sqrt(vp * vm / N));
    // Var(phi(f)) matches the block sum exactly in law, and B(f, f) within
    // 3 SE plus the decomposition's cross-term residual.
    const double block_var = d.block_covariance(RegionKind::plus, f, f) +
                             d.block_covariance(RegionKind::collar, f, f) +
                             d.block_covariance(RegionKind::minus, f, f);
    const double se = block_var * std::sqrt(2.0 / N);
    CHECK(std::abs(var_sum / N - block_var) < 3.0 * se);
    CHECK(std::abs(var_sum / N - vf) < 3.0 * se + std::abs(block_var - vf));
}

TEST_CASE("degenerate decomposition regions are rejected", "[gaussian]") {
    auto grid = build_quadrature(1, 1.0, 16);
    CHECK_THROWS_AS(build_decomposition(0.99, 1.0, grid, 16, 0), DegenerateRegionError);
    CHECK_THROWS_AS(build_decomposition(0.0, 1.0, grid, 16, 0), Error);
}
