#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rymflow/errors.hpp"
#include "rymflow/flow_core.hpp"

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

double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

FlowState integrate(FlowState s, double dt, int steps, FlowVariant v, Scheme sch) {
    for (int i = 0; i < steps; ++i) s = step(s, dt, v, sch);
    return s;
}
}  // namespace

TEST_CASE("right-hand side at fixed points and uniform expansion") {
    auto t = torus(32);
    auto r = rhs(constant_state(t, 0.0, 0.0), FlowVariant::Unnormalized);
    CHECK(r.du_dt.max_abs() == 0.0);
    CHECK(r.dpsi_dt.max_abs() == 0.0);

    auto s = sphere();
    auto rs = rhs(constant_state(s, 0.0, std::sqrt(8 * pi)), FlowVariant::Unnormalized);
    CHECK(rs.du_dt.max_abs() <= 1e-9);
    CHECK(rs.dpsi_dt.max_abs() <= 1e-9);

    const double c = 0.7;
    auto re = rhs(constant_state(t, 0.0, c), FlowVariant::Unnormalized);
    for (std::size_t i = 0; i < re.du_dt.size(); ++i) CHECK(re.du_dt[i] == doctest::Approx(c * c).epsilon(1e-14));
    CHECK(re.dpsi_dt.max_abs() < 1e-12);
}

TEST_CASE("normalized right-hand side preserves volume and flux") {
    for (auto g : {torus(64), sphere()}) {
        auto st = normalize_volume(smooth_state(g, 9, 0.5, 1.0, 0.8));
        CHECK(volume(st) == doctest::Approx(1.0).epsilon(1e-14));
        auto r = rhs(st, FlowVariant::VolumeNormalized);
        const auto eu = map(st.u, [](double v) { return std::exp(v); });
        CHECK(std::abs(g->inner(eu, r.du_dt)) < 1e-11);
        CHECK(std::abs(g->integrate(r.dpsi_dt)) < 1e-11);
        CHECK(std::abs(g->integrate(rhs(st, FlowVariant::Unnormalized).dpsi_dt)) < 1e-11);
    }
    auto t = torus(16);
    CHECK_THROWS_AS(rhs(constant_state(t, std::log(2.0), 0.0), FlowVariant::VolumeNormalized), VolumeDriftGuard);
    try {
        rhs(constant_state(t, std::log(2.0), 0.0), FlowVariant::VolumeNormalized);
    } catch (const VolumeDriftGuard& e) {
        CHECK(e.volume() == doctest::Approx(2.0));
    }
}

TEST_CASE("flat state is stationary under both schemes") {
    auto t = torus(16);
    auto s0 = constant_state(t, 0.0, 0.0);
    for (auto sch : {Scheme::RK4Explicit, Scheme::SemiImplicitSpectral}) {
        auto s1 = step(s0, 1e-4, FlowVariant::Unnormalized, sch);
        CHECK(s1.t == doctest::Approx(1e-4));
        CHECK(s1.u.max_abs() == 0.0);
        CHECK(s1.psi.max_abs() == 0.0);
    }
}

// Linearization about u0(t) = ln(1 + 2 c^2 t) / 2, psi = c, for the sin(2 pi x) mode:
//   b' = -k^2 e^{-u0} b - 2 c^2 e^{-2u0} b + 2 c e^{-2u0} a
//   a' = -k^2 e^{-u0} a + c k^2 e^{-u0} b
TEST_CASE("psi perturbation follows the linearized heat flow") {
    const double c = 0.5, eps = 1e-6, T = 0.02, k2 = 4 * pi * pi;
    double a = eps, b = 0.0;
    {
        const int n = 20000;
        const double h = T / n;
        auto f = [&](double t, double aa, double bb, double& da, double& db) {
            const double em = 1.0 / std::sqrt(1.0 + 2 * c * c * t);
            db = -k2 * em * bb - 2 * c * c * em * em * bb + 2 * c * em * em * aa;
            da = -k2 * em * aa + c * k2 * em * bb;
        };
        for (int i = 0; i < n; ++i) {
            const double t = i * h;
            double a1, b1, a2, b2, a3, b3, a4, b4;
            f(t, a, b, a1, b1);
            f(t + h / 2, a + h / 2 * a1, b + h / 2 * b1, a2, b2);
            f(t + h / 2, a + h / 2 * a2, b + h / 2 * b2, a3, b3);
            f(t + h, a + h * a3, b + h * b3, a4, b4);
            a += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
            b += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
        }
    }
    auto g = torus(16);
    auto sinx = g->sample([](double x, double) { return std::sin(2 * pi * x); });
    auto psi0 = g->sample([&](double x, double) { return c + eps * std::sin(2 * pi * x); });
    auto s = make_state(g, g->constant(0.0), psi0);
    auto out = integrate(s, 1e-4, 200, FlowVariant::Unnormalized, Scheme::RK4Explicit);
    const double a_num = 2.0 * g->inner(out.psi, sinx);
    const double b_num = 2.0 * g->inner(out.u, sinx);
    CHECK(std::abs(a_num - a) < 1e-4 * eps);
    CHECK(std::abs(b_num - b) < 1e-4 * eps);
    CHECK(std::abs(a - eps * std::exp(-k2 * T)) > 1e-3 * eps);  // coupling is visible
}

TEST_CASE("RK4 converges at fourth order, integrating-factor Euler at first order") {
    auto g = torus(16);
    auto s0 = smooth_state(g, 4, 0.3, 0.5, 0.6, 2);
    const double T = 0.02;
    auto ref = integrate(s0, T / 1600, 1600, FlowVariant::Unnormalized, Scheme::RK4Explicit);
    double prev = 0.0;
    for (int n : {100, 200, 400}) {
        auto out = integrate(s0, T / n, n, FlowVariant::Unnormalized, Scheme::RK4Explicit);
        const double err = std::max(max_diff(out.u, ref.u), max_diff(out.psi, ref.psi));
        if (prev > 0.0) CHECK(prev / err > 12.0);
        prev = err;
    }
    prev = 0.0;
    for (int n : {200, 400, 800}) {
        auto out = integrate(s0, T / n, n, FlowVariant::Unnormalized, Scheme::SemiImplicitSpectral);
        const double err = std::max(max_diff(out.u, ref.u), max_diff(out.psi, ref.psi));
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.1));
        prev = err;
    }
}

TEST_CASE("step guards") {
    auto g = torus(32);
    auto s0 = smooth_state(g, 2, 0.3, 0.5, 0.6);
    const double limit = rk4_max_dt(s0, 1.0);
    CHECK_THROWS_AS(step(s0, 2 * limit, FlowVariant::Unnormalized, Scheme::RK4Explicit), StepRejected);
    try {
        step(s0, 2 * limit, FlowVariant::Unnormalized, Scheme::RK4Explicit);
    } catch (const StepRejected& e) {
        CHECK(e.suggested_dt() == doctest::Approx(limit));
    }
    CHECK_NOTHROW(step(s0, 2 * limit, FlowVariant::Unnormalized, Scheme::SemiImplicitSpectral));
    StepOptions tight;
    tight.blowup_u = 0.1;
    CHECK_THROWS_AS(step(s0, 1e-5, FlowVariant::Unnormalized, Scheme::SemiImplicitSpectral, tight), BlowUp);
    CHECK_THROWS_AS(step(s0, 0.0, FlowVariant::Unnormalized, Scheme::SemiImplicitSpectral), InvalidArgument);

    StepperConfig cfg;
    cfg.dt_min = 1.0;
    cfg.dt_max = 0.1;
    CHECK_THROWS_AS(validate(cfg), InvalidArgument);
}

TEST_CASE("long runs conserve flux and volume") {
    auto g = torus(32);
    auto s = normalize_volume(smooth_state(g, 6, 0.5, 0.8, 1.0));
    const double f0 = flux(s);
    StepInfo info;
    double total_correction = 0.0;
    for (int i = 0; i < 2000; ++i) {
        s = step(s, 1e-4, FlowVariant::VolumeNormalized, Scheme::SemiImplicitSpectral, {}, &info);
        total_correction += std::abs(std::log(info.volume_before_projection));
    }
    MESSAGE("accumulated volume projection: " << total_correction);
    CHECK(std::abs(flux(s) - f0) <= 1e-10 * s.t);
    CHECK(std::abs(volume(s) - 1.0) <= 1e-14);
    CHECK(total_correction < 1e-3);
}

TEST_CASE("normalized flow is not a constant shift of the unnormalized flow") {
    auto g = torus(32);
    // Large flux slows the unnormalized diffusion (e^{-u} shrinks as the area grows).
    auto s0 = normalize_volume(smooth_state(g, 17, 0.5, 0.8, 5.0, 1));
    auto a = integrate(s0, 1e-3, 1000, FlowVariant::VolumeNormalized, Scheme::SemiImplicitSpectral);
    auto b = integrate(s0, 1e-3, 1000, FlowVariant::Unnormalized, Scheme::SemiImplicitSpectral);
    auto da = a.u, db = b.u;
    da += -g->integrate(da);
    db += -g->integrate(db);
    CHECK(max_diff(da, db) > 1e-6);
}
