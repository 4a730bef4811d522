#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rymflow/errors.hpp"
#include "rymflow/field_state.hpp"

using namespace rym;

namespace {
constexpr double pi = std::numbers::pi;

GeometryPtr torus(int n) { return build_background(SurfaceKind::Torus, {n, n}); }
GeometryPtr sphere() { return build_background(SurfaceKind::Sphere, {32, 64}); }

FlowState constant_state(const GeometryPtr& g, double u, double psi) {
    return make_state(g, g->constant(u), g->constant(psi));
}

FlowState random_state(const GeometryPtr& g, Rng& rng, double au, double ap, double mean_psi) {
    auto u = g->random_band_limited(rng, 6);
    u *= au;
    auto psi = g->random_band_limited(rng, 6);
    psi *= ap;
    psi += mean_psi;
    return make_state(g, u, psi);
}
}  // namespace

TEST_CASE("scalar curvature of simple conformal factors") {
    auto t = torus(64);
    CHECK(scalar_curvature(constant_state(t, 0.0, 0.0)).max_abs() == 0.0);

    auto s = sphere();
    auto r = scalar_curvature(constant_state(s, 0.0, 0.0));
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(8 * pi).epsilon(1e-14));

    const double eps = 0.1;
    auto u = t->sample([&](double x, double) { return eps * std::sin(2 * pi * x); });
    auto st = make_state(t, u, t->constant(0.0));
    auto rr = scalar_curvature(st);
    auto expect = t->sample([&](double x, double) {
        const double v = eps * std::sin(2 * pi * x);
        return std::exp(-v) * 4 * pi * pi * v;
    });
    double err = 0.0;
    for (std::size_t i = 0; i < rr.size(); ++i) err = std::max(err, std::abs(rr[i] - expect[i]));
    CHECK(err < 1e-10);

    auto bad = t->constant(0.0);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(make_state(t, bad, t->constant(0.0)), InvalidState);
}

TEST_CASE("norms of F in both metrics") {
    auto t = torus(16);
    CHECK(f_norm_sq(constant_state(t, 0.3, 0.0), NormKind::Evolving).max_abs() == 0.0);
    auto s = constant_state(t, 0.0, 1.5);
    CHECK(f_norm_sq(s, NormKind::Background)[0] == doctest::Approx(4.5));
    CHECK(f_norm_sq(s, NormKind::Evolving)[0] == doctest::Approx(4.5));
    auto s2 = constant_state(t, std::log(2.0), 1.0);
    CHECK(f_norm_sq(s2, NormKind::Evolving)[5] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("stress identity holds on random states") {
    Rng rng(11);
    for (auto g : {torus(64), sphere()}) {
        CHECK(stress_identity_residual(constant_state(g, 0.4, 0.0)) == 0.0);
        for (int k = 0; k < 5; ++k) CHECK(stress_identity_residual(random_state(g, rng, 1.0, 2.0, 0.5)) <= 1e-12);
    }
}

TEST_CASE("volume and flux") {
    auto t = torus(16);
    CHECK(volume(constant_state(t, 0.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(volume(constant_state(t, std::log(3.0), 0.0)) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(flux(constant_state(t, 0.0, 0.7)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(volume(constant_state(t, 800.0, 0.0)), InvalidState);

    Rng rng(3);
    auto s = random_state(t, rng, 0.5, 1.0, 0.2);
    auto shifted = s;
    shifted.u += 0.25;
    CHECK(volume(shifted) == doctest::Approx(std::exp(0.25) * volume(s)).epsilon(1e-14));
    CHECK(flux(shifted) == flux(s));
}

TEST_CASE("Gauss-Bonnet and flux Cauchy-Schwarz bound") {
    Rng rng(5);
    for (auto g : {torus(64), sphere()}) {
        for (int k = 0; k < 4; ++k) {
            auto s = random_state(g, rng, 0.8, 1.0, 0.3 * k);
            auto c = build_cache(s);
            CompensatedSum gb;
            for (std::size_t i = 0; i < c.R.size(); ++i) gb.add(c.R[i] * c.dvg_weights[i]);
            CHECK(std::abs(gb.value() - g->r0()) <= 1e-9);
            CompensatedSum f2;
            for (std::size_t i = 0; i < c.R.size(); ++i) f2.add(c.norm_f2_g[i] * c.dvg_weights[i]);
            const double fl = flux(s);
            CHECK(fl * fl <= f2.value() * c.vol * (1 + 1e-14));
            CHECK(c.vol == doctest::Approx(volume(s)).epsilon(1e-15));
        }
    }
}
