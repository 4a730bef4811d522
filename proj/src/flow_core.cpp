#include "rymflow/flow_core.hpp"

#include <cmath>
#include <sstream>

#include "rymflow/errors.hpp"

namespace rym {

void validate(const StepperConfig& cfg) {
    if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
        throw InvalidArgument("cfl_safety must lie in (0, 1]");
    if (!(cfg.dt_min > 0.0) || !(cfg.dt_max > 0.0)) throw InvalidArgument("dt bounds must be positive");
    if (cfg.dt_min > cfg.dt_max) throw InvalidArgument("dt_min must not exceed dt_max");
}

Rhs rhs(const FlowState& s, FlowVariant variant) {
    validate(s);
    const auto& bg = s.bg();
    const std::size_t n = bg.node_count();
    const double r0 = bg.r0();
    ScalarField emu = map(s.u, [](double v) { return std::exp(-v); });
    ScalarField lap_u = bg.laplacian(s.u);
    ScalarField du = lap_u;

    if (variant == FlowVariant::Unnormalized) {
        for (std::size_t i = 0; i < n; ++i)
            du[i] = emu[i] * (lap_u[i] - r0 + emu[i] * s.psi[i] * s.psi[i]);
    } else {
        const double vol = volume(s);
        if (vol < 0.99 || vol > 1.01) {
            std::ostringstream msg;
            msg << "normalized flow needs volume near 1, got " << vol;
            throw VolumeDriftGuard(msg.str(), vol);
        }
        const double mean_term = bg.integrate(hadamard(emu, hadamard(s.psi, s.psi))) / vol;
        for (std::size_t i = 0; i < n; ++i)
            du[i] = emu[i] * lap_u[i] + r0 * (1.0 - emu[i]) + emu[i] * emu[i] * s.psi[i] * s.psi[i] - mean_term;
    }
    if (bg.kind() == SurfaceKind::Sphere) du = bg.project(du);
    ScalarField dpsi = bg.laplacian(hadamard(emu, s.psi));
    return {std::move(du), std::move(dpsi)};
}

double rk4_max_dt(const FlowState& s, double cfl_safety) {
    const double mu = std::exp(-s.u.min());
    return cfl_safety * 2.0 / (mu * s.bg().laplacian_spectral_radius());
}

namespace {

FlowState advance(const FlowState& s, const Rhs& k, double h) {
    FlowState out = s;
    out.u.axpy(h, k.du_dt);
    out.psi.axpy(h, k.dpsi_dt);
    return out;
}

FlowState rk4(const FlowState& s, double dt, FlowVariant variant) {
    const Rhs k1 = rhs(s, variant);
    const Rhs k2 = rhs(advance(s, k1, 0.5 * dt), variant);
    const Rhs k3 = rhs(advance(s, k2, 0.5 * dt), variant);
    const Rhs k4 = rhs(advance(s, k3, dt), variant);
    FlowState out = s;
    const double w = dt / 6.0;
    out.u.axpy(w, k1.du_dt).axpy(2 * w, k2.du_dt).axpy(2 * w, k3.du_dt).axpy(w, k4.du_dt);
    out.psi.axpy(w, k1.dpsi_dt).axpy(2 * w, k2.dpsi_dt).axpy(2 * w, k3.dpsi_dt).axpy(w, k4.dpsi_dt);
    return out;
}

FlowState integrating_factor_euler(const FlowState& s, double dt, FlowVariant variant) {
    const auto& bg = s.bg();
    const double mu = std::exp(-s.u.min());
    const Rhs r = rhs(s, variant);
    FlowState out = s;
    out.u.axpy(dt, r.du_dt).axpy(-dt * mu, bg.laplacian(s.u));
    out.psi.axpy(dt, r.dpsi_dt).axpy(-dt * mu, bg.laplacian(s.psi));
    const auto heat = [tau = mu * dt](double lambda) { return std::exp(tau * lambda); };
    out.u = bg.apply_symbol(out.u, heat);
    out.psi = bg.apply_symbol(out.psi, heat);
    return out;
}

}  // namespace

FlowState step(const FlowState& s, double dt, FlowVariant variant, Scheme scheme,
               const StepOptions& opts, StepInfo* info) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    FlowState out;
    if (scheme == Scheme::RK4Explicit) {
        const double limit = rk4_max_dt(s, opts.cfl_safety);
        if (dt > limit) {
            std::ostringstream msg;
            msg << "dt = " << dt << " exceeds the RK4 stability bound " << limit;
            throw StepRejected(msg.str(), limit);
        }
        out = rk4(s, dt, variant);
    } else {
        out = integrating_factor_euler(s, dt, variant);
    }
    out.t = s.t + dt;
    const double umax = out.u.max_abs();
    if (!out.u.all_finite() || !out.psi.all_finite() || umax > opts.blowup_u) {
        std::ostringstream msg;
        msg << "blow-up at t = " << out.t << ": max|u| = " << umax;
        throw BlowUp(msg.str(), out.t, umax);
    }
    const double vol = volume(out);
    if (info) info->volume_before_projection = vol;
    if (variant == FlowVariant::VolumeNormalized && opts.project_volume) out.u += -std::log(vol);
    return out;
}

FlowState normalize_volume(const FlowState& s) {
    FlowState out = s;
    out.u += -std::log(volume(s));
    return out;
}

}  // namespace rym
