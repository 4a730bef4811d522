#include "rymflow/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rymflow/errors.hpp"

namespace rym {

namespace {

double grid_step(const SolitonProfile& p) { return p.A / static_cast<double>(p.r.size() - 1); }

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

ResidualField make_residual(std::string name, std::vector<double> values) {
    ResidualField out;
    out.name = std::move(name);
    out.max_abs = max_abs(values);
    out.values = std::move(values);
    return out;
}

/// Cubic Lagrange interpolation through the four nodes around x in a sorted table.
double lagrange4(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const std::size_t n = xs.size();
    std::size_t hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    std::size_t lo = hi >= 2 ? hi - 2 : 0;
    lo = std::min(lo, n - 4);
    double sum = 0.0;
    for (std::size_t i = lo; i < lo + 4; ++i) {
        double w = 1.0;
        for (std::size_t j = lo; j < lo + 4; ++j)
            if (j != i) w *= (x - xs[j]) / (xs[i] - xs[j]);
        sum += w * ys[i];
    }
    return sum;
}

}  // namespace

void validate(const SolitonProfile& p) {
    const std::size_t n = p.r.size();
    if (n < 6) throw InvalidProfile("soliton profile needs at least 6 radial nodes");
    if (p.phi.size() != n || p.psi.size() != n || p.f.size() != n)
        throw InvalidProfile("soliton profile columns r, phi, psi, f differ in length");
    if (!(p.A > 0.0) || !std::isfinite(p.A)) throw InvalidProfile("soliton profile extent A must be positive");
    if (!std::isfinite(p.c) || !std::isfinite(p.a)) throw InvalidProfile("soliton constants c and a must be finite");
    const double h = grid_step(p);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(p.r[i] - h * static_cast<double>(i)) > 1e-9 * p.A) {
            std::ostringstream msg;
            msg << "soliton grid is not uniform on [0, A] at node " << i;
            throw InvalidProfile(msg.str());
        }
        if (!std::isfinite(p.phi[i]) || !std::isfinite(p.psi[i]) || !std::isfinite(p.f[i]))
            throw InvalidProfile("soliton profile contains non-finite values");
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(p.phi[i] > 0.0)) {
            std::ostringstream msg;
            msg << "phi must be positive in the interior, phi(" << p.r[i] << ") = " << p.phi[i];
            throw InvalidProfile(msg.str());
        }
    }
}

std::vector<double> radial_d1(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    if (n < 5) throw InvalidArgument("radial derivative needs at least 5 nodes");
    std::vector<double> d(n);
    const double s = 1.0 / (12.0 * h);
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) * s;
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) * s;
    for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) * s;
    const std::size_t m = n - 1;
    d[m] = (25 * v[m] - 48 * v[m - 1] + 36 * v[m - 2] - 16 * v[m - 3] + 3 * v[m - 4]) * s;
    d[m - 1] = (3 * v[m] + 10 * v[m - 1] - 18 * v[m - 2] + 6 * v[m - 3] - v[m - 4]) * s;
    return d;
}

std::vector<double> radial_d2(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    if (n < 6) throw InvalidArgument("radial second derivative needs at least 6 nodes");
    std::vector<double> d(n);
    const double s = 1.0 / (12.0 * h * h);
    d[0] = (45 * v[0] - 154 * v[1] + 214 * v[2] - 156 * v[3] + 61 * v[4] - 10 * v[5]) * s;
    d[1] = (10 * v[0] - 15 * v[1] - 4 * v[2] + 14 * v[3] - 6 * v[4] + v[5]) * s;
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (-v[i - 2] + 16 * v[i - 1] - 30 * v[i] + 16 * v[i + 1] - v[i + 2]) * s;
    const std::size_t m = n - 1;
    d[m] = (45 * v[m] - 154 * v[m - 1] + 214 * v[m - 2] - 156 * v[m - 3] + 61 * v[m - 4] - 10 * v[m - 5]) * s;
    d[m - 1] = (10 * v[m] - 15 * v[m - 1] - 4 * v[m - 2] + 14 * v[m - 3] - 6 * v[m - 4] + v[m - 5]) * s;
    return d;
}

double radial_integral(const std::vector<double>& v, double h) {
    const std::size_t intervals = v.size() - 1;
    if (v.size() < 3 || intervals == 1) throw InvalidArgument("radial integral needs at least 2 intervals");
    // Simpson over an even number of intervals, then 3/8 over the last three if needed.
    const std::size_t even = intervals % 2 == 0 ? intervals : intervals - 3;
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 <= even; i += 2) sum += h / 3.0 * (v[i] + 4 * v[i + 1] + v[i + 2]);
    if (even != intervals) {
        const std::size_t i = even;
        sum += 3.0 * h / 8.0 * (v[i] + 3 * v[i + 1] + 3 * v[i + 2] + v[i + 3]);
    }
    return sum;
}

SolitonResiduals soliton_residuals(const SolitonProfile& p) {
    validate(p);
    const double h = grid_step(p);
    const auto dphi = radial_d1(p.phi, h);
    const auto ddphi = radial_d2(p.phi, h);
    const auto df = radial_d1(p.f, h);
    const auto ddf = radial_d2(p.f, h);
    const auto dpsi = radial_d1(p.psi, h);
    const std::size_t n = p.r.size();
    std::vector<double> m1, m2, y1, y2;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double phi = p.phi[i];
        const double curvature = -ddphi[i] / phi;
        const double q = p.psi[i] / phi;
        m1.push_back(curvature - (p.c + q * q + ddf[i]));
        m2.push_back(curvature - (p.c + q * q + dphi[i] * df[i] / phi));
        y1.push_back(dphi[i] * q);
        y2.push_back(dpsi[i] - p.psi[i] * df[i]);
    }
    return {make_residual("M1", std::move(m1)), make_residual("M2", std::move(m2)),
            make_residual("Y1", std::move(y1)), make_residual("Y2", std::move(y2))};
}

ResidualField reduced_residual(const SolitonProfile& p, ReducedForm form) {
    validate(p);
    const double h = grid_step(p);
    const auto dphi = radial_d1(p.phi, h);
    const auto ddphi = radial_d2(p.phi, h);
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < p.r.size(); ++i) {
        const double phi = p.phi[i];
        const double q = p.psi[i] / phi;
        const double source = form == ReducedForm::Consistent ? q * q : p.psi[i];
        out.push_back(-ddphi[i] / phi - (p.c + source + p.a * dphi[i]));
    }
    return make_residual(form == ReducedForm::Consistent ? "reduced(psi^2/phi^2)" : "reduced(psi)",
                         std::move(out));
}

double closure_defect(const SolitonProfile& p) {
    validate(p);
    const auto dphi = radial_d1(p.phi, grid_step(p));
    const std::size_t m = p.r.size() - 1;
    return std::max({std::abs(p.phi[0]), std::abs(p.phi[m]), std::abs(dphi[0] - 1.0), std::abs(dphi[m] + 1.0)});
}

ASolution solve_a(const SolitonProfile& p) {
    validate(p);
    const double h = grid_step(p);
    const auto dphi = radial_d1(p.phi, h);
    const std::size_t m = p.r.size() - 1;
    std::vector<double> integrand(p.r.size());
    for (std::size_t i = 0; i <= m; ++i) integrand[i] = p.phi[i] * dphi[i] * dphi[i];
    ASolution out;
    out.denominator = radial_integral(integrand, h);
    if (!(std::abs(out.denominator) >= 1e-14)) {
        std::ostringstream msg;
        msg << "integral of phi (phi')^2 is " << out.denominator << ", below 1e-14";
        throw DegenerateProfile(msg.str());
    }
    const double slope_bracket = 0.5 * (dphi[m] * dphi[m] - dphi[0] * dphi[0]);
    const double value_bracket = 0.5 * (p.phi[m] * p.phi[m] - p.phi[0] * p.phi[0]);
    out.numerator = -p.c * slope_bracket - value_bracket;
    // phi'(A)^2 = phi'(0)^2 = 1 and phi(0) = phi(A) = 0.
    const double closed_slope = 0.5 * ((-1.0) * (-1.0) - 1.0 * 1.0);
    const double closed_value = 0.5 * (0.0 * 0.0 - 0.0 * 0.0);
    out.symbolic_numerator = -p.c * closed_slope - closed_value;
    out.a = out.numerator / out.denominator;
    return out;
}

SolitonVerdict classify(const SolitonProfile& p, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("classification tolerance must be positive");
    SolitonVerdict v;
    v.residuals = soliton_residuals(p);
    v.closure = closure_defect(p);
    for (const ResidualField* r : {&v.residuals.m1, &v.residuals.m2, &v.residuals.y1, &v.residuals.y2})
        if (!(r->max_abs <= tol)) v.violated.push_back(r->name);
    if (!(v.closure <= tol)) v.violated.push_back("closure");

    const double h = grid_step(p);
    const auto dphi = radial_d1(p.phi, h);
    const auto ddphi = radial_d2(p.phi, h);
    const auto df = radial_d1(p.f, h);
    const auto dpsi = radial_d1(p.psi, h);
    try {
        v.a = solve_a(p);
    } catch (const DegenerateProfile&) {
        v.a.a = std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t n = p.r.size();
    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin, ksum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v.f_prime_minus_a_phi = std::max(v.f_prime_minus_a_phi, std::abs(df[i] - v.a.a * p.phi[i]));
        v.psi_prime = std::max(v.psi_prime, std::abs(dpsi[i]));
        v.psi_zero_reading = std::max(v.psi_zero_reading, std::abs(p.psi[i]));
        if (i == 0 || i + 1 == n) continue;
        const double k = -ddphi[i] / p.phi[i];
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
        ksum += k;
        const double phi = p.phi[i];
        v.psi_parallel_reading =
            std::max(v.psi_parallel_reading, std::abs((dpsi[i] * phi - p.psi[i] * dphi[i]) / (phi * phi)));
    }
    v.curvature_mean = ksum / static_cast<double>(n - 2);
    v.curvature_variation = kmax - kmin;

    if (v.violated.empty()) {
        if (!(v.f_prime_minus_a_phi <= tol)) v.conclusion_failures.push_back("f'-a*phi");
        if (!(v.psi_prime <= tol)) v.conclusion_failures.push_back("psi'");
        if (!(v.curvature_variation <= tol)) v.conclusion_failures.push_back("curvature");
    }
    v.soliton = v.violated.empty() && v.conclusion_failures.empty();
    return v;
}

FlowState embed_on_sphere(const SolitonProfile& p, GeometryPtr sphere) {
    if (!sphere || sphere->kind() != SurfaceKind::Sphere)
        throw UnsupportedSurface("a surface of revolution embeds on the sphere only");
    validate(p);
    if (!(closure_defect(p) <= 1e-6)) throw InvalidProfile("embedding needs phi to close smoothly at both ends");
    const double h = grid_step(p);
    const std::size_t n = p.r.size();

    // s(r) = log(r / (A - r)) + integral of g, g = 1/phi - 1/r - 1/(A - r) smooth
    // on the interior; cumulative trapezoid from node 1, recentered at A/2.
    std::vector<double> rs, ss, cum;
    double acc = 0.0, g_prev = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double r = p.r[i];
        const double g = 1.0 / p.phi[i] - 1.0 / r - 1.0 / (p.A - r);
        if (i > 1) acc += 0.5 * h * (g + g_prev);
        g_prev = g;
        rs.push_back(r);
        cum.push_back(acc);
    }
    const double offset = lagrange4(rs, cum, 0.5 * p.A);
    for (std::size_t k = 0; k < rs.size(); ++k) ss.push_back(std::log(rs[k] / (p.A - rs[k])) + cum[k] - offset);

    const double rho2 = 1.0 / (4.0 * std::numbers::pi);
    const auto theta = sphere->coord0();
    std::vector<double> u(sphere->node_count()), psi0(sphere->node_count());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double sigma = std::log(std::tan(0.5 * theta[i]));
        double r;
        // Outside the tabulated range s ~ log r + const (left) or -log(A - r) + const (right).
        if (sigma < ss.front())
            r = rs.front() * std::exp(sigma - ss.front());
        else if (sigma > ss.back())
            r = p.A - (p.A - rs.back()) * std::exp(ss.back() - sigma);
        else
            r = lagrange4(ss, rs, sigma);
        const double phi = lagrange4(p.r, p.phi, r);
        const double psi = lagrange4(p.r, p.psi, r);
        const double st = std::sin(theta[i]);
        u[i] = std::log(phi * phi / (rho2 * st * st));
        psi0[i] = psi * phi / (rho2 * st * st);
    }
    return make_state(sphere, sphere->make_field(std::move(u)), sphere->make_field(std::move(psi0)));
}

}  // namespace rym
