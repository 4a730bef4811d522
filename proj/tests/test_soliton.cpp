#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "rymflow/diagnostics.hpp"
#include "rymflow/errors.hpp"
#include "rymflow/soliton.hpp"

using namespace rym;

namespace {
constexpr double pi = std::numbers::pi;

using Fn = std::function<double(double)>;

/// phi sampled through the mirrored node index so phi(r) and phi(pi - r) are
/// bitwise equal for symmetric profiles.
SolitonProfile profile(int n, Fn phi, Fn psi, Fn f, double c, bool mirror = false) {
    SolitonProfile p;
    p.A = pi;
    p.c = c;
    const double h = pi / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double r = h * i;
        p.r.push_back(r);
        p.phi.push_back(mirror ? phi(h * std::min(i, n - 1 - i)) : phi(r));
        p.psi.push_back(psi(r));
        p.f.push_back(f(r));
    }
    return p;
}

const Fn zero = [](double) { return 0.0; };

SolitonProfile round_sphere(int n = 2048) {
    return profile(n, [](double r) { return std::sin(r); }, zero, zero, 1.0, true);
}

bool names(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}
}  // namespace

TEST_CASE("radial derivatives are fourth order") {
    double prev1 = 0.0, prev2 = 0.0;
    for (int n : {65, 129, 257}) {
        std::vector<double> v(n);
        const double h = 1.0 / (n - 1);
        for (int i = 0; i < n; ++i) v[i] = std::exp(h * i);
        const auto d1 = radial_d1(v, h);
        const auto d2 = radial_d2(v, h);
        double e1 = 0.0, e2 = 0.0;
        for (int i = 0; i < n; ++i) {
            e1 = std::max(e1, std::abs(d1[i] - v[i]));
            e2 = std::max(e2, std::abs(d2[i] - v[i]));
        }
        if (prev1 > 0.0) {
            CHECK(prev1 / e1 > 14.0);
            CHECK(prev2 / e2 > 14.0);
        }
        prev1 = e1;
        prev2 = e2;
    }
}

TEST_CASE("Simpson with a 3/8 closure integrates cubics exactly") {
    for (int n : {7, 8, 9, 10}) {
        std::vector<double> v(n);
        const double h = 2.0 / (n - 1);
        for (int i = 0; i < n; ++i) v[i] = std::pow(h * i, 3) - h * i;
        CHECK(radial_integral(v, h) == doctest::Approx(4.0 - 2.0).epsilon(1e-14));
    }
}

TEST_CASE("round sphere satisfies every residual") {
    const auto p = round_sphere();
    const auto res = soliton_residuals(p);
    CHECK(res.m1.max_abs <= 1e-8);
    CHECK(res.m2.max_abs <= 1e-8);
    CHECK(res.y1.max_abs == 0.0);
    CHECK(res.y2.max_abs == 0.0);
    CHECK(res.m1.values.size() == 2046);

    const auto a = solve_a(p);
    CHECK(std::abs(a.a) <= 1e-10);
    CHECK(a.symbolic_numerator == 0.0);
    // Integral of sin r cos^2 r over [0, pi].
    CHECK(a.denominator == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

    const auto v = classify(p, 1e-8);
    CHECK(v.soliton);
    CHECK(v.violated.empty());
    CHECK(v.conclusion_failures.empty());
    CHECK(v.curvature_mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v.psi_prime == 0.0);
    CHECK(v.psi_zero_reading == 0.0);
}

TEST_CASE("Yang-Mills residuals vanish identically without curvature or potential") {
    auto p = profile(301, [](double r) { return r * (pi - r) / pi; }, zero, zero, 2.0);
    const auto res = soliton_residuals(p);
    CHECK(res.y1.max_abs == 0.0);
    CHECK(res.y2.max_abs == 0.0);
}

TEST_CASE("non-solitons are rejected with the violated residual named") {
    SUBCASE("perturbed warp") {
        auto p = profile(2048, [](double r) { return std::sin(r) + 0.01 * std::sin(2 * r); }, zero, zero, 1.0);
        const auto res = soliton_residuals(p);
        CHECK(res.m1.max_abs > 1e-3);
        const auto v = classify(p, 1e-8);
        CHECK_FALSE(v.soliton);
        CHECK(names(v.violated, "M1"));
    }
    SUBCASE("parabolic warp") {
        auto p = profile(2048, [](double r) { return r * (pi - r) / pi; }, zero, zero, 1.0);
        const auto v = classify(p, 1e-8);
        CHECK_FALSE(v.soliton);
        CHECK(names(v.violated, "M1"));
        // -phi''/phi = 2 / (r (pi - r)) >= 8 / pi^2, so M1 >= 8/pi^2 - 1 in magnitude somewhere.
        CHECK(v.residuals.m1.max_abs > 1.0);
    }
    SUBCASE("curvature proportional to the warp") {
        auto p = profile(
            2048, [](double r) { return std::sin(r); }, [](double r) { return 0.5 * std::sin(r); }, zero, 1.0, true);
        const auto v = classify(p, 1e-8);
        CHECK_FALSE(v.soliton);
        CHECK(names(v.violated, "Y1"));
        // Y1 = 0.5 phi' reaches 0.5 next to the ends.
        CHECK(v.residuals.y1.max_abs == doctest::Approx(0.5).epsilon(1e-4));
        CHECK(v.psi_zero_reading == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(v.psi_parallel_reading <= 1e-9);
    }
}

TEST_CASE("closure violation gives a nonzero numerator") {
    // phi'(pi) = -0.9, so the slope bracket is (0.81 - 1) / 2.
    auto p = profile(2049, [](double r) { return std::sin(r) * (1.0 - 0.1 * r / pi); }, zero, zero, 1.0);
    const auto a = solve_a(p);
    CHECK(a.numerator == doctest::Approx(0.095).epsilon(1e-8));
    CHECK(a.symbolic_numerator == 0.0);
    CHECK(std::abs(a.a) > 1e-3);
    CHECK(closure_defect(p) == doctest::Approx(0.1).epsilon(1e-8));
    const auto v = classify(p, 1e-8);
    CHECK(names(v.violated, "closure"));
}

TEST_CASE("solve_a is stable under grid refinement") {
    const Fn phi = [](double r) { return std::sin(r) * (1.0 - 0.1 * r / pi); };
    const double a1 = solve_a(profile(513, phi, zero, zero, 1.0)).a;
    const double a2 = solve_a(profile(1025, phi, zero, zero, 1.0)).a;
    const double a3 = solve_a(profile(2049, phi, zero, zero, 1.0)).a;
    CHECK(std::abs(a1 - a2) <= 1e-8);
    CHECK(std::abs(a2 - a3) <= std::abs(a1 - a2) / 8.0);
}

TEST_CASE("residuals ignore a constant shift of the potential") {
    const Fn phi = [](double r) { return std::sin(r) + 0.05 * std::sin(2 * r); };
    const Fn f = [](double r) { return 0.3 * std::cos(r); };
    const Fn f_shift = [](double r) { return 0.3 * std::cos(r) + 1.0; };
    const auto a = soliton_residuals(profile(257, phi, zero, f, 1.0));
    const auto b = soliton_residuals(profile(257, phi, zero, f_shift, 1.0));
    for (std::size_t i = 0; i < a.m1.values.size(); ++i) {
        CHECK(a.m1.values[i] == doctest::Approx(b.m1.values[i]).epsilon(1e-9));
        CHECK(a.m2.values[i] == doctest::Approx(b.m2.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("reduced equation in both readings") {
    auto p = profile(
        1025, [](double r) { return std::sin(r); }, [](double r) { return 0.5 * std::sin(r); }, zero, 1.0, true);
    // Consistent: 1 - 1 - 0.25. Printed: 1 - 1 - 0.5 sin r, largest at mid-extent.
    const auto cons = reduced_residual(p, ReducedForm::Consistent);
    const auto print = reduced_residual(p, ReducedForm::Printed);
    CHECK(cons.max_abs == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(print.max_abs == doctest::Approx(0.5).epsilon(1e-6));
    const auto round = round_sphere(1025);
    CHECK(reduced_residual(round, ReducedForm::Consistent).max_abs <= 1e-8);
    CHECK(reduced_residual(round, ReducedForm::Printed).max_abs <= 1e-8);
}

TEST_CASE("profile errors") {
    auto p = round_sphere(64);
    p.phi[10] = -0.1;
    CHECK_THROWS_AS(soliton_residuals(p), InvalidProfile);
    auto q = round_sphere(64);
    q.psi.pop_back();
    CHECK_THROWS_AS(classify(q, 1e-8), InvalidProfile);
    auto tiny = profile(64, [](double r) { return 1e-6 * std::sin(r); }, zero, zero, 1.0);
    CHECK_THROWS_AS(solve_a(tiny), DegenerateProfile);
}

TEST_CASE("embedded round profile is the round sphere") {
    auto g = build_background(SurfaceKind::Sphere, {32, 64});
    const auto s = embed_on_sphere(round_sphere(), g);
    const double mean = g->integrate(s.u);
    CHECK(mean == doctest::Approx(std::log(4 * pi)).epsilon(1e-7));
    auto centered = s.u;
    centered += -mean;
    CHECK(centered.max_abs() <= 1e-6);
    CHECK(calabi_energy(s) <= 1e-8);

    // psi = k phi is parallel: e^{-u} psi0 = psi / phi = k.
    auto par = profile(
        2048, [](double r) { return std::sin(r); }, [](double r) { return 0.7 * std::sin(r); }, zero, 1.0, true);
    const auto sp = embed_on_sphere(par, g);
    CHECK(parallel_defect(sp).sup <= 1e-6);

    auto t = build_background(SurfaceKind::Torus, {16, 16});
    CHECK_THROWS_AS(embed_on_sphere(round_sphere(64), t), UnsupportedSurface);
}
