#include "rymflow/mobius_gauge.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "rymflow/errors.hpp"

namespace rym {

namespace {

// Forward-mode scalar for one directional derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;
};
Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }

template <class S>
std::array<S, 3> apply_map(const Vec3& b, const std::array<S, 3>& x) {
    const double bb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    std::array<S, 3> y;
    S n2{};
    for (int i = 0; i < 3; ++i) {
        y[i] = x[i] - S{b[i]};
        n2 = n2 + y[i] * y[i];
    }
    std::array<S, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = (1.0 - bb) * (y[i] / n2) - S{b[i]};
    return out;
}

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void require_sphere(const FlowState& s, const char* what) {
    if (s.bg().kind() != SurfaceKind::Sphere)
        throw UnsupportedSurface(std::string(what) + " is defined on the sphere only");
}

/// center_of_mass(pullback(s, b)) by the change of variables y = T_b(x):
/// the integral of T_{-b}(y) e^{u(y)} dV0(y). No resampling involved.
Vec3 transported_com(const FlowState& s, const std::vector<double>& eu, const Vec3& b) {
    const auto& bg = s.bg();
    const auto w = bg.quad_weights();
    const auto pos = bg.positions();
    const Vec3 mb{-b[0], -b[1], -b[2]};
    CompensatedSum acc[3];
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Vec3 x = apply_map<double>(mb, pos[i]);
        for (int k = 0; k < 3; ++k) acc[k].add(x[k] * eu[i] * w[i]);
    }
    return {acc[0].value(), acc[1].value(), acc[2].value()};
}

Eigen::Matrix3d com_jacobian(const FlowState& s, const std::vector<double>& eu, const Vec3& b) {
    constexpr double h = 1e-6;
    Eigen::Matrix3d j;
    for (int c = 0; c < 3; ++c) {
        Vec3 bp = b, bm = b;
        bp[c] += h;
        bm[c] -= h;
        const Vec3 gp = transported_com(s, eu, bp), gm = transported_com(s, eu, bm);
        for (int r = 0; r < 3; ++r) j(r, c) = (gp[r] - gm[r]) / (2 * h);
    }
    return j;
}

Vec3 newton_step(const Eigen::Matrix3d& j, const Vec3& g) {
    const Eigen::Vector3d d = j.fullPivLu().solve(Eigen::Vector3d(g[0], g[1], g[2]));
    return {-d(0), -d(1), -d(2)};
}

constexpr double kBallLimit = 1.0 - 1e-6;

}  // namespace

MoebiusParam::MoebiusParam(const Vec3& b) : b_(b) {
    if (!(norm3(b) < kBallLimit)) {
        std::ostringstream msg;
        msg << "Moebius parameter must satisfy |b| < 1 - 1e-6, got |b| = " << norm3(b);
        throw InvalidArgument(msg.str());
    }
}

double MoebiusParam::norm() const { return norm3(b_); }

Vec3 moebius_map(const MoebiusParam& p, const Vec3& x) { return apply_map<double>(p.b(), x); }

ScalarField moebius_conformal_factor(const BackgroundGeometry& bg, const MoebiusParam& p) {
    if (bg.kind() != SurfaceKind::Sphere) throw UnsupportedSurface("Moebius maps act on the sphere only");
    const auto th = bg.coord0();
    const auto ph = bg.coord1();
    std::vector<double> w(bg.node_count());
    for (std::size_t i = 0; i < w.size(); ++i) {
        Vec3 dt, dp;
        for (int dir = 0; dir < 2; ++dir) {
            const Dual t{th[i], dir == 0 ? 1.0 : 0.0};
            const Dual f{ph[i], dir == 1 ? 1.0 : 0.0};
            const std::array<Dual, 3> x{sin(t) * cos(f), sin(t) * sin(f), cos(t)};
            const auto y = apply_map<Dual>(p.b(), x);
            for (int k = 0; k < 3; ++k) (dir == 0 ? dt : dp)[k] = y[k].d;
        }
        const Vec3 cr{dt[1] * dp[2] - dt[2] * dp[1], dt[2] * dp[0] - dt[0] * dp[2], dt[0] * dp[1] - dt[1] * dp[0]};
        w[i] = std::log(norm3(cr) / std::sin(th[i]));
    }
    return bg.make_field(std::move(w));
}

Vec3 center_of_mass(const FlowState& s) {
    require_sphere(s, "center of mass");
    const auto& bg = s.bg();
    const auto w = bg.quad_weights();
    const auto pos = bg.positions();
    CompensatedSum acc[3];
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double m = std::exp(s.u[i]) * w[i];
        for (int k = 0; k < 3; ++k) acc[k].add(pos[i][k] * m);
    }
    return {acc[0].value(), acc[1].value(), acc[2].value()};
}

FlowState pullback(const FlowState& s, const MoebiusParam& p) {
    require_sphere(s, "pullback");
    if (p.is_identity()) return s;
    const auto& bg = s.bg();
    const auto pos = bg.positions();
    std::vector<std::array<double, 2>> pts(bg.node_count());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 y = moebius_map(p, pos[i]);
        pts[i] = {std::atan2(std::hypot(y[0], y[1]), y[2]), std::atan2(y[1], y[0])};
    }
    const ScalarField w = moebius_conformal_factor(bg, p);
    std::vector<double> u = bg.evaluate(s.u, pts);
    std::vector<double> psi = bg.evaluate(s.psi, pts);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] += w[i];
        psi[i] *= std::exp(w[i]);
    }
    FlowState out = s;
    out.u = bg.project(bg.make_field(std::move(u)));
    out.psi = bg.project(bg.make_field(std::move(psi)));
    return out;
}

RecenterResult recenter(const FlowState& s, double tol) {
    require_sphere(s, "recentering");
    if (!(tol > 0.0)) throw InvalidArgument("recenter tolerance must be positive");
    const double vol = volume(s);
    if (!(vol > 0.0)) throw InvalidState("recentering needs positive volume");
    const double target = tol * vol;
    const Vec3 c0 = center_of_mass(s);
    if (norm3(c0) <= target) return {s, MoebiusParam{}, 0, norm3(c0) / vol};

    std::vector<double> eu(s.u.size());
    for (std::size_t i = 0; i < eu.size(); ++i) eu[i] = std::exp(s.u[i]);

    // Newton on the resampling-free transported center of mass.
    Vec3 b{0.0, 0.0, 0.0};
    double gnorm = norm3(c0);
    int iterations = 0;
    int stalled = 0;
    while (gnorm > 1e-3 * target && stalled < 20 && iterations < 100) {
        ++iterations;
        const Vec3 g = transported_com(s, eu, b);
        const Vec3 d = newton_step(com_jacobian(s, eu, b), g);
        double alpha = 1.0;
        bool reduced = false;
        for (int k = 0; k < 30; ++k, alpha *= 0.5) {
            const Vec3 trial{b[0] + alpha * d[0], b[1] + alpha * d[1], b[2] + alpha * d[2]};
            if (norm3(trial) >= kBallLimit) continue;
            const double tn = norm3(transported_com(s, eu, trial));
            if (tn < gnorm) {
                b = trial;
                gnorm = tn;
                reduced = true;
                break;
            }
        }
        stalled = reduced ? 0 : stalled + 1;
        if (!reduced) break;
    }

    // Correct on the resampled state, whose center differs by the resampling error.
    stalled = 0;
    FlowState best = pullback(s, MoebiusParam(b));
    double best_norm = norm3(center_of_mass(best));
    while (best_norm > target) {
        if (stalled >= 20) {
            std::ostringstream msg;
            msg << "recentering stagnated with |center of mass| = " << best_norm;
            throw ConvergenceError(msg.str(), best_norm);
        }
        ++iterations;
        const Vec3 d = newton_step(com_jacobian(s, eu, b), center_of_mass(best));
        bool reduced = false;
        double alpha = 1.0;
        for (int k = 0; k < 8; ++k, alpha *= 0.5) {
            const Vec3 trial{b[0] + alpha * d[0], b[1] + alpha * d[1], b[2] + alpha * d[2]};
            if (norm3(trial) >= kBallLimit) continue;
            FlowState cand = pullback(s, MoebiusParam(trial));
            const double cn = norm3(center_of_mass(cand));
            if (cn < best_norm) {
                b = trial;
                best = std::move(cand);
                best_norm = cn;
                reduced = true;
                break;
            }
        }
        stalled = reduced ? 0 : stalled + 1;
    }
    const double residual = best_norm / volume(best);
    return {std::move(best), MoebiusParam(b), iterations, residual};
}

}  // namespace rym
