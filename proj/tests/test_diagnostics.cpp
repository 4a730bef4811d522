#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rymflow/diagnostics.hpp"
#include "rymflow/errors.hpp"

using namespace rym;

namespace {
constexpr double pi = std::numbers::pi;

GeometryPtr torus(int n) { return build_background(SurfaceKind::Torus, {n, n}); }
GeometryPtr sphere(int nlat = 32, int nlon = 64) { return build_background(SurfaceKind::Sphere, {nlat, nlon}); }

FlowState constant_state(const GeometryPtr& g, double u, double psi) {
    return make_state(g, g->constant(u), g->constant(psi));
}

FlowState smooth_state(const GeometryPtr& g, std::uint64_t seed, double au, double ap, double mean_psi, int k = 4) {
    Rng rng(seed);
    auto u = g->random_band_limited(rng, k);
    u *= au;
    auto psi = g->random_band_limited(rng, k);
    psi *= ap;
    psi += mean_psi;
    return make_state(g, u, psi);
}
}  // namespace

TEST_CASE("energy functional on constant states") {
    CHECK(energy_functional(constant_state(torus(32), 0.0, 0.0)) == 0.0);
    CHECK(energy_functional(constant_state(torus(32), 0.0, 1.3)) == doctest::Approx(2 * 1.3 * 1.3).epsilon(1e-14));
    CHECK(std::abs(energy_functional(constant_state(sphere(), 0.0, 0.0))) < 1e-14);
}

TEST_CASE("dissipation components") {
    auto g = torus(64);
    auto d0 = dissipation(constant_state(g, 0.0, 0.0), FlowVariant::Unnormalized);
    CHECK(d0.predicted == 0.0);
    CHECK(d0.metric_part == 0.0);
    CHECK(d0.bundle_part == 0.0);
    auto s = make_state(g, g->constant(0.0), g->sample([](double x, double) { return std::sin(2 * pi * x); }));
    CHECK(dissipation(s, FlowVariant::Unnormalized).bundle_part == doctest::Approx(4 * pi * pi).epsilon(1e-12));
}

TEST_CASE("energy derivative matches the predicted dissipation at second order") {
    for (auto variant : {FlowVariant::Unnormalized, FlowVariant::VolumeNormalized}) {
        for (auto g : {torus(32), sphere(16, 32)}) {
            auto s0 = normalize_volume(smooth_state(g, 21, 0.3, 0.6, 1.0, 3));
            StepOptions no_proj;
            no_proj.project_volume = false;
            // Central difference over [s0, s2] against the prediction at s1.
            auto residual = [&](double h) {
                auto s1 = step(s0, h, variant, Scheme::RK4Explicit, no_proj);
                auto s2 = step(s1, h, variant, Scheme::RK4Explicit, no_proj);
                const double meas = (energy_functional(s2) - energy_functional(s0)) / (2 * h);
                return std::abs(meas - dissipation(s1, variant).predicted);
            };
            const double h = 0.25 * rk4_max_dt(s0, 1.0);
            const double e1 = residual(h), e2 = residual(h / 2);
            CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
        }
    }
}

TEST_CASE("Calabi energy") {
    CHECK(calabi_energy(constant_state(sphere(), 0.0, 0.0)) < 1e-20);
    CHECK(calabi_energy(constant_state(torus(32), 0.7, 0.0)) == 0.0);

    auto g = torus(64);
    const double eps = 0.1;
    auto s = make_state(g, g->sample([&](double x, double) { return eps * std::sin(2 * pi * x); }), g->constant(0.0));
    // Independent dense midpoint quadrature of the 1D analytic composition.
    const int n = 200000;
    auto kfun = [&](double x) {
        const double u = eps * std::sin(2 * pi * x);
        return 0.5 * std::exp(-u) * 4 * pi * pi * u;
    };
    double kint = 0.0, vol = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        const double eu = std::exp(eps * std::sin(2 * pi * x));
        kint += kfun(x) * eu / n;
        vol += eu / n;
    }
    const double kbar = kint / vol;
    double ca = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        const double dk = kfun(x) - kbar;
        ca += dk * dk * std::exp(eps * std::sin(2 * pi * x)) / n;
    }
    CHECK(calabi_energy(s) == doctest::Approx(ca).epsilon(1e-6));
    CHECK(ca > 0.0);
}

TEST_CASE("lowest Schroedinger eigenvalue") {
    auto t = torus(64);
    auto r0 = lowest_eigenvalue(constant_state(t, 0.0, 0.0));
    CHECK(std::abs(r0.lambda) < 1e-8);
    const double c = 1.3;
    auto r1 = lowest_eigenvalue(constant_state(t, 0.0, c));
    CHECK(r1.lambda == doctest::Approx(-0.5 * c * c).epsilon(1e-10));
    auto r2 = lowest_eigenvalue(constant_state(sphere(), 0.0, 0.0));
    CHECK(r2.lambda == doctest::Approx(8 * pi).epsilon(1e-10));

    for (auto g : {t, sphere()}) {
        auto s = smooth_state(g, 31, 0.5, 1.0, 0.7);
        auto e = lowest_eigenvalue(s);
        CHECK(e.residual <= 1e-9);
        const auto eu = map(s.u, [](double v) { return std::exp(v); });
        CHECK(g->inner(eu, hadamard(e.eigenfield, e.eigenfield)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g->inner(eu, e.eigenfield) > 0.0);
        CHECK(e.eigenfield.min() > 0.0);  // ground state does not change sign
        // Rayleigh quotient of random trial fields stays above lambda.
        Rng rng(2);
        for (int k = 0; k < 3; ++k) {
            auto f = g->random_band_limited(rng, 3);
            f += 2.0;
            const double num = g->inner(f, -4.0 * g->laplacian(f)) +
                               g->inner(hadamard(f, f), hadamard(eu, scalar_curvature(s) - 0.25 * f_norm_sq(s, NormKind::Evolving)));
            const double den = g->inner(eu, hadamard(f, f));
            CHECK(num / den >= e.lambda - 1e-10);
        }
    }
    EigenOptions tight;
    tight.max_iterations = 1;
    tight.tol = 1e-15;
    CHECK_THROWS_AS(lowest_eigenvalue(smooth_state(t, 3, 0.5, 1.0, 0.7), tight), ConvergenceError);
}

TEST_CASE("parallel defect") {
    auto g = torus(64);
    auto u = g->sample([](double x, double y) { return 0.3 * std::sin(2 * pi * x) * std::cos(2 * pi * y); });
    auto par = make_state(g, u, 0.8 * map(u, [](double v) { return std::exp(v); }));
    auto d = parallel_defect(par);
    CHECK(d.integral < 1e-20);
    CHECK(d.sup < 1e-14);
    auto z = parallel_defect(constant_state(g, 0.2, 0.0));
    CHECK(z.integral == 0.0);
    CHECK(z.sup == 0.0);
    auto s = make_state(g, g->constant(0.0), g->sample([](double x, double) { return std::sin(2 * pi * x); }));
    auto ds = parallel_defect(s);
    CHECK(ds.integral == doctest::Approx(4 * pi * pi).epsilon(1e-12));
    CHECK(ds.sup == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Moser-Trudinger and Sobolev monitors") {
    auto g = torus(64);
    CHECK(moser_trudinger(constant_state(g, 0.0, 1.0), 3.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(moser_trudinger(constant_state(g, 100.0, 1.0), 8.0), OverflowGuard);

    auto flat = constant_state(g, 0.0, 0.0);
    auto f = g->sample([](double x, double) { return std::sin(2 * pi * x); });
    CHECK(sobolev_quotient(flat, f) == doctest::Approx(1.0 / (4.0 * std::sqrt(2.0))).epsilon(1e-3));

    auto s = smooth_state(g, 8, 0.4, 1.0, 0.0);
    auto fam8 = sobolev_family(*g, 8, 99, 8);
    auto fam32 = sobolev_family(*g, 32, 99, 8);
    for (int i = 0; i < 8; ++i) CHECK(fam8[i].data() == fam32[i].data());
    CHECK(sobolev_proxy(s, fam32) >= sobolev_proxy(s, fam8));
    CHECK(sobolev_proxy(s, 32, 99) == sobolev_proxy(s, fam32));
}

TEST_CASE("minimum volume tracker thresholds") {
    MinVolumeTracker tr(std::sqrt(8 * pi), 8 * pi);
    CHECK(tr.flux8pi_threshold() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tr.flux2r0_threshold() == doctest::Approx(0.5).epsilon(1e-15));
    tr.observe(0.0, 1.2);
    CHECK(tr.flag() == 0);
    tr.observe(0.1, 0.9);
    CHECK(tr.flag() == 1);
    CHECK(tr.flux8pi_violations() == 0);
    tr.observe(0.2, 0.8);
    CHECK(tr.flux8pi_violations() == 1);
    CHECK(tr.flux2r0_violations() == 0);
    tr.observe(0.3, 0.4);
    CHECK(tr.flag() == 3);
    CHECK(tr.entered_flux2r0_region());
    CHECK(tr.min_volume() == 0.4);
    CHECK(tr.t_at_min() == 0.3);

    MinVolumeTracker flat(1.0, 0.0);
    CHECK(std::isinf(flat.flux8pi_threshold()));
}
