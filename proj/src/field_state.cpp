#include "rymflow/field_state.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rymflow/errors.hpp"

namespace rym {

namespace {
constexpr double kExpLimit = 700.0;

void require_exp_safe(const ScalarField& u) {
    const double m = u.max();
    if (m > kExpLimit) throw InvalidState("e^u overflows: max(u) = " + std::to_string(m));
}
}  // namespace

FlowState make_state(GeometryPtr geometry, ScalarField u, ScalarField psi, double t) {
    if (!geometry) throw ContractViolation("state needs a geometry");
    FlowState s{std::move(geometry), std::move(u), std::move(psi), t};
    validate(s);
    return s;
}

void validate(const FlowState& s) {
    s.bg().check(s.u);
    s.bg().check(s.psi);
    if (!s.u.all_finite()) throw InvalidState("u contains non-finite values");
    if (!s.psi.all_finite()) throw InvalidState("psi contains non-finite values");
}

ScalarField scalar_curvature(const FlowState& s) {
    if (!s.u.all_finite()) throw InvalidState("u contains non-finite values");
    const auto& bg = s.bg();
    ScalarField r = bg.laplacian(s.u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(-s.u[i]) * (bg.r0() - r[i]);
    return r;
}

ScalarField f_norm_sq(const FlowState& s, NormKind which) {
    ScalarField out = s.psi;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 2.0 * s.psi[i] * s.psi[i];
        if (which == NormKind::Evolving) out[i] *= std::exp(-2.0 * s.u[i]);
    }
    return out;
}

double stress_identity_residual(const FlowState& s) {
    validate(s);
    const auto& bg = s.bg();
    const auto theta = bg.coord0();
    const double r2 = 1.0 / (4.0 * std::numbers::pi);
    const auto norm_g = f_norm_sq(s, NormKind::Evolving);
    double worst = 0.0;
    for (std::size_t n = 0; n < bg.node_count(); ++n) {
        double g0[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
        if (bg.kind() == SurfaceKind::Sphere) {
            const double st = std::sin(theta[n]);
            g0[0][0] = r2;
            g0[1][1] = r2 * st * st;
        }
        const double eu = std::exp(s.u[n]);
        double g[2][2], ginv[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) g[i][j] = eu * g0[i][j];
        const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        ginv[0][0] = g[1][1] / det;
        ginv[1][1] = g[0][0] / det;
        ginv[0][1] = -g[0][1] / det;
        ginv[1][0] = -g[1][0] / det;
        const double f12 = s.psi[n] * std::sqrt(g0[0][0] * g0[1][1] - g0[0][1] * g0[1][0]);
        const double f[2][2] = {{0.0, f12}, {-f12, 0.0}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double m = 0.0;
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) m += ginv[k][l] * f[i][k] * f[j][l];
                worst = std::max(worst, std::abs(m - 0.5 * norm_g[n] * g[i][j]));
            }
    }
    return worst;
}

double volume(const FlowState& s) {
    require_exp_safe(s.u);
    return s.bg().integrate(map(s.u, [](double v) { return std::exp(v); }));
}

double flux(const FlowState& s) { return s.bg().integrate(s.psi); }

GeometryCache build_cache(const FlowState& s) {
    require_exp_safe(s.u);
    GeometryCache c;
    c.R = scalar_curvature(s);
    c.norm_f2_bg = f_norm_sq(s, NormKind::Background);
    c.norm_f2_g = f_norm_sq(s, NormKind::Evolving);
    const auto w = s.bg().quad_weights();
    c.dvg_weights.resize(w.size());
    CompensatedSum vol;
    for (std::size_t i = 0; i < w.size(); ++i) {
        c.dvg_weights[i] = std::exp(s.u[i]) * w[i];
        vol.add(c.dvg_weights[i]);
    }
    c.vol = vol.value();
    return c;
}

}  // namespace rym
