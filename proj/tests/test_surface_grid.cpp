#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rymflow/errors.hpp"
#include "rymflow/surface_grid.hpp"

using namespace rym;

namespace {
constexpr double pi = std::numbers::pi;

double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

GeometryPtr torus(int n) { return build_background(SurfaceKind::Torus, {n, n}); }
GeometryPtr sphere(int nlat, int nlon) { return build_background(SurfaceKind::Sphere, {nlat, nlon}); }
}  // namespace

TEST_CASE("build_background sizes, curvature and weights") {
    auto t = torus(64);
    CHECK(t->node_count() == 4096);
    CHECK(t->r0() == 0.0);
    CHECK(t->integrate(t->constant(1.0)) == doctest::Approx(1.0).epsilon(1e-15));

    auto s = sphere(32, 64);
    CHECK(s->node_count() == 2048);
    CHECK(s->r0() == doctest::Approx(8.0 * pi).epsilon(1e-15));
    CHECK(std::abs(s->integrate(s->constant(1.0)) - 1.0) < 1e-15);

    CHECK_THROWS_AS(torus(4), InvalidArgument);
    CHECK_THROWS_AS(torus(31), InvalidArgument);
    CHECK_THROWS_AS(sphere(4, 8), InvalidArgument);
    CHECK_THROWS_AS(sphere(32, 32), InvalidArgument);
}

TEST_CASE("torus spectral operators against analytic fields") {
    auto g = torus(64);
    auto f = g->sample([](double x, double) { return std::sin(2 * pi * x); });
    auto lap = g->laplacian(f);
    auto expect = g->sample([](double x, double) { return -4 * pi * pi * std::sin(2 * pi * x); });
    CHECK(max_diff(lap, expect) < 1e-10);

    auto gn = g->grad_norm_sq(f);
    auto gexp = g->sample([](double x, double) { return 4 * pi * pi * std::pow(std::cos(2 * pi * x), 2); });
    CHECK(max_diff(gn, gexp) < 1e-9);
    CHECK(g->integrate(gn) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
    CHECK(std::abs(g->integrate(f)) < 1e-15);

    CHECK(g->laplacian(g->constant(3.0)).max_abs() < 1e-12);
    CHECK(g->grad_norm_sq(g->constant(3.0)).max_abs() < 1e-20);

    // y-direction and a mixed mode
    auto h = g->sample([](double x, double y) { return std::cos(2 * pi * (3 * x - 2 * y)); });
    auto hexp = g->sample([](double x, double y) { return -4 * pi * pi * 13 * std::cos(2 * pi * (3 * x - 2 * y)); });
    CHECK(max_diff(g->laplacian(h), hexp) < 1e-8);
}

TEST_CASE("sphere operators against spherical harmonic oracles") {
    auto g = sphere(32, 64);
    auto z = g->sample_embedded([](const Vec3& p) { return p[2]; });
    // unit sphere: Delta z = -2 z; area 1 rescales by 1/r^2 = 4 pi.
    CHECK(max_diff(g->laplacian(z), -8.0 * pi * z) < 1e-10);
    CHECK(g->integrate(hadamard(z, z)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    auto xy = g->sample_embedded([](const Vec3& p) { return p[0] * p[1]; });
    CHECK(max_diff(g->laplacian(xy), -24.0 * pi * xy) < 1e-9);

    auto gz = g->grad_norm_sq(z);
    auto gz_exp = g->sample_embedded([](const Vec3& p) { return 4 * pi * (1 - p[2] * p[2]); });
    CHECK(max_diff(gz, gz_exp) < 1e-10);

    auto gx = g->grad_norm_sq(g->sample_embedded([](const Vec3& p) { return p[0]; }));
    auto gx_exp = g->sample_embedded([](const Vec3& p) { return 4 * pi * (1 - p[0] * p[0]); });
    CHECK(max_diff(gx, gx_exp) < 1e-10);

    CHECK(g->laplacian(g->constant(2.0)).max_abs() < 1e-12);
}

TEST_CASE("sphere modes are orthonormal eigenfunctions") {
    auto g = sphere(16, 32);
    const int L = g->max_wavenumber();
    CHECK(L == 15);
    for (int l : {0, 1, 4, 15})
        for (int m : {0, 1, 3, l}) {
            if (m > l) continue;
            auto a = g->mode(l, m, 1.0, 0.0);
            CHECK(g->inner(a, a) == doctest::Approx(1.0).epsilon(1e-12));
            if (m > 0) {
                auto b = g->mode(l, m, 0.0, 1.0);
                CHECK(g->inner(b, b) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(g->inner(a, b)) < 1e-13);
            }
            auto other = g->mode(std::min(l + 1, L), m, 1.0, 0.0);
            if (l + 1 <= L) CHECK(std::abs(g->inner(a, other)) < 1e-13);
            CHECK(max_diff(g->laplacian(a), -4.0 * pi * l * (l + 1) * a) < 1e-8 * (1 + l * l));
        }
}

TEST_CASE("integration by parts for random band-limited fields") {
    Rng rng(7);
    for (auto g : {torus(64), sphere(32, 64)}) {
        auto f = g->random_band_limited(rng, 8);
        auto h = g->random_band_limited(rng, 8);
        CHECK(std::abs(g->integrate(f)) < 1e-15);
        CHECK(f.max_abs() == doctest::Approx(1.0));
        const double lhs = g->inner(f, g->laplacian(h));
        const double rhs = g->integrate(g->grad_dot(f, h));
        CHECK(std::abs(lhs + rhs) < 1e-10 * (1 + std::abs(lhs)));
        CHECK(std::abs(g->integrate(g->laplacian(f))) < 1e-10);
        CHECK(max_diff(g->laplacian(f), g->laplacian(map(f, [](double v) { return v + 5.0; }))) < 1e-9);
        CHECK(max_diff(g->grad_norm_sq(f), g->grad_norm_sq(map(f, [](double v) { return v + 5.0; }))) < 1e-9);
    }
}

TEST_CASE("laplacian error decays faster than second order") {
    double prev = 1.0;
    for (int n : {8, 16, 32}) {
        auto g = torus(n);
        auto f = g->sample([](double x, double) { return std::exp(std::sin(2 * pi * x)); });
        auto expect = g->sample([](double x, double) {
            const double s = std::sin(2 * pi * x), c = std::cos(2 * pi * x);
            return 4 * pi * pi * (c * c - s) * std::exp(s);
        });
        const double err = max_diff(g->laplacian(f), expect);
        if (n > 8) CHECK(err < prev / 16.0);
        prev = err;
    }
    prev = 1.0;
    for (int n : {8, 16}) {
        auto g = sphere(n, 2 * n);
        auto f = g->sample_embedded([](const Vec3& p) { return std::exp(p[2]); });
        auto expect = g->sample_embedded([](const Vec3& p) {
            const double z = p[2];
            return 4 * pi * (1 - z * z - 2 * z) * std::exp(z);
        });
        const double err = max_diff(g->laplacian(f), expect);
        if (n > 8) CHECK(err < prev / 16.0);
        prev = err;
    }
    CHECK(prev < 1e-9);
}

TEST_CASE("sphere evaluation and projection") {
    auto g = sphere(16, 32);
    auto z = g->sample_embedded([](const Vec3& p) { return p[2] + p[0] * p[1]; });
    std::vector<std::array<double, 2>> pts = {{0.3, 1.1}, {2.0, 5.5}, {1e-3, 0.0}};
    auto v = g->evaluate(z, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double th = pts[i][0], ph = pts[i][1];
        const double expect = std::cos(th) + std::sin(th) * std::sin(th) * std::cos(ph) * std::sin(ph);
        CHECK(v[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(max_diff(g->project(z), z) < 1e-13);
    auto t = torus(16);
    CHECK_THROWS_AS(t->evaluate(t->constant(0.0), pts), UnsupportedSurface);
}

TEST_CASE("fields from different geometries are rejected") {
    auto a = torus(16), b = torus(16);
    CHECK_THROWS_AS(a->laplacian(b->constant(1.0)), ContractViolation);
    auto f = a->constant(1.0);
    CHECK_THROWS_AS(f += b->constant(1.0), ContractViolation);
}
