#include "rymflow/diagnostics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rymflow/errors.hpp"

namespace rym {

namespace {
ScalarField exp_field(const ScalarField& f, double s = 1.0) {
    return map(f, [s](double v) { return std::exp(s * v); });
}

/// e^{-u} psi, the g-dual of F.
ScalarField dual_g(const FlowState& s) { return hadamard(exp_field(s.u, -1.0), s.psi); }
}  // namespace

double energy_functional(const FlowState& s) {
    const auto& bg = s.bg();
    ScalarField integrand = bg.grad_norm_sq(s.u);
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] += 2.0 * std::exp(-s.u[i]) * s.psi[i] * s.psi[i];
    return bg.integrate(integrand) + 2.0 * bg.r0() * bg.integrate(s.u);
}

Dissipation dissipation(const FlowState& s, FlowVariant variant) {
    const auto& bg = s.bg();
    const Rhs r = rhs(s, variant);
    Dissipation d;
    d.metric_part = bg.integrate(hadamard(exp_field(s.u), hadamard(r.du_dt, r.du_dt)));
    d.bundle_part = 2.0 * bg.integrate(bg.grad_norm_sq(dual_g(s)));
    d.predicted = -2.0 * d.metric_part - 2.0 * d.bundle_part;
    return d;
}

double calabi_energy(const FlowState& s) {
    const auto c = build_cache(s);
    CompensatedSum k_int;
    for (std::size_t i = 0; i < c.R.size(); ++i) k_int.add(0.5 * c.R[i] * c.dvg_weights[i]);
    const double kbar = k_int.value() / c.vol;
    CompensatedSum ca;
    for (std::size_t i = 0; i < c.R.size(); ++i) {
        const double dk = 0.5 * c.R[i] - kbar;
        ca.add(dk * dk * c.dvg_weights[i]);
    }
    return ca.value();
}

double calabi_laplacian_form(const FlowState& s) {
    const auto& bg = s.bg();
    const auto lap = bg.laplacian(s.u);
    return bg.integrate(hadamard(exp_field(s.u, -1.0), hadamard(lap, lap)));
}

double volume_rate(const FlowState& s) {
    const auto& bg = s.bg();
    // integral of 1/2 |F|^2_g dV_g = integral of psi^2 e^{-u} dV0; the
    // curvature integral is R0 by Gauss-Bonnet.
    return -bg.r0() + bg.integrate(hadamard(exp_field(s.u, -1.0), hadamard(s.psi, s.psi)));
}

ConservationResiduals conservation_residuals(const FlowState& prev, const FlowState& next, double dt,
                                             FlowVariant variant) {
    ConservationResiduals out;
    const auto c = build_cache(next);
    CompensatedSum gb;
    for (std::size_t i = 0; i < c.R.size(); ++i) gb.add(c.R[i] * c.dvg_weights[i]);
    out.gauss_bonnet = gb.value() - next.bg().r0();
    if (variant == FlowVariant::Unnormalized) {
        FlowState mid = prev;
        mid.u = 0.5 * (prev.u + next.u);
        mid.psi = 0.5 * (prev.psi + next.psi);
        out.volume_ode = (c.vol - volume(prev)) / dt - volume_rate(mid);
    } else {
        out.volume_ode = c.vol - 1.0;
    }
    out.flux_drift = flux(next) - flux(prev);
    return out;
}

// ---------------------------------------------------------------------------
// Schroedinger eigenvalue

EigenResult lowest_eigenvalue(const FlowState& s, const EigenOptions& opts) {
    validate(s);
    const auto& bg = s.bg();
    const ScalarField eu = exp_field(s.u);
    const ScalarField emu = exp_field(s.u, -1.0);
    // e^u (R - |F|^2_g / 4) = R0 - Delta0 u - psi^2 e^{-u} / 2
    ScalarField q = bg.laplacian(s.u);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = bg.r0() - q[i] - 0.5 * s.psi[i] * s.psi[i] * emu[i];

    const auto apply_a = [&](const ScalarField& x) {
        ScalarField y = bg.laplacian(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = -4.0 * y[i] + q[i] * x[i];
        return y;
    };
    const auto b_inner = [&](const ScalarField& x, const ScalarField& y) { return bg.inner(hadamard(eu, x), y); };
    const double shift = 1.0 + q.max_abs();
    const auto precondition = [&](const ScalarField& r) {
        return bg.apply_symbol(r, [shift](double lambda) { return 1.0 / (-4.0 * lambda + shift); });
    };
    // Galerkin residual: on the sphere the products q x and e^u x leave the band
    // limit, and grid functions above it only carry spurious modes.

    ScalarField x = bg.constant(1.0);
    x *= 1.0 / std::sqrt(b_inner(x, x));
    ScalarField ax = apply_a(x);
    double lambda = bg.inner(x, ax);
    ScalarField p;
    bool have_p = false;
    double res = 0.0;
    int it = 0;
    for (;; ++it) {
        ScalarField r = ax;
        r.axpy(-lambda, hadamard(eu, x));
        r = bg.project(r);
        res = std::sqrt(bg.inner(hadamard(emu, r), r));
        if (res <= opts.tol) break;
        if (it >= opts.max_iterations) {
            std::ostringstream msg;
            msg << "eigenvalue iteration did not converge in " << opts.max_iterations
                << " iterations, residual " << res;
            throw ConvergenceError(msg.str(), res);
        }
        std::vector<ScalarField> basis{x};
        std::vector<ScalarField> candidates{precondition(r)};
        if (have_p) candidates.push_back(p);
        for (auto& v : candidates) {
            const double before = std::sqrt(b_inner(v, v));
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : basis) v.axpy(-b_inner(b, v), b);
            const double after = std::sqrt(b_inner(v, v));
            if (after <= 1e-12 * before || after == 0.0) continue;
            v *= 1.0 / after;
            basis.push_back(std::move(v));
        }
        const int m = static_cast<int>(basis.size());
        std::vector<ScalarField> abasis;
        abasis.reserve(m);
        abasis.push_back(ax);
        for (int i = 1; i < m; ++i) abasis.push_back(apply_a(basis[i]));
        Eigen::MatrixXd h(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) h(i, j) = h(j, i) = 0.5 * (bg.inner(basis[i], abasis[j]) + bg.inner(basis[j], abasis[i]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const Eigen::VectorXd c = es.eigenvectors().col(0);
        ScalarField xn = bg.constant(0.0), axn = bg.constant(0.0), pn = bg.constant(0.0);
        for (int i = 0; i < m; ++i) {
            xn.axpy(c(i), basis[i]);
            axn.axpy(c(i), abasis[i]);
            if (i > 0) pn.axpy(c(i), basis[i]);
        }
        const double nrm = std::sqrt(b_inner(xn, xn));
        xn *= 1.0 / nrm;
        axn *= 1.0 / nrm;
        x = std::move(xn);
        ax = std::move(axn);
        p = std::move(pn);
        have_p = m > 1;
        lambda = bg.inner(x, ax);
    }
    if (bg.inner(eu, x) < 0.0) x *= -1.0;
    return {lambda, x, res, it};
}

// ---------------------------------------------------------------------------

ParallelDefect parallel_defect(const FlowState& s) {
    const auto& bg = s.bg();
    const ScalarField h = dual_g(s);
    ParallelDefect d;
    d.integral = 2.0 * bg.integrate(bg.grad_norm_sq(h));
    const double m = flux(s) / volume(s);
    for (std::size_t i = 0; i < h.size(); ++i) d.sup = std::max(d.sup, std::abs(h[i] - m));
    return d;
}

double moser_trudinger(const FlowState& s, double k) {
    if (!(k > 0.0)) throw InvalidArgument("Moser-Trudinger exponent must be positive");
    const double umax = s.u.max_abs();
    if (k * umax > 700.0) {
        std::ostringstream msg;
        msg << "e^{k|u|} overflows: k * max|u| = " << k * umax;
        throw OverflowGuard(msg.str());
    }
    return s.bg().integrate(map(s.u, [k](double v) { return std::exp(k * std::abs(v)); }));
}

double sobolev_quotient(const FlowState& s, const ScalarField& f) {
    const auto& bg = s.bg();
    const ScalarField eu = exp_field(s.u);
    const double vol = bg.integrate(eu);
    const double fbar = bg.inner(eu, f) / vol;
    ScalarField centered = f;
    centered += -fbar;
    const double l2 = std::sqrt(bg.inner(eu, hadamard(centered, centered)));
    ScalarField grad = bg.grad_norm_sq(f);
    // |grad f|_g dV_g = e^{u/2} |grad f|_0 dV0
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = std::exp(0.5 * s.u[i]) * std::sqrt(grad[i]);
    return l2 / bg.integrate(grad);
}

std::vector<ScalarField> sobolev_family(const BackgroundGeometry& bg, int trials, std::uint64_t seed,
                                        int max_wavenumber) {
    if (trials < 1) throw InvalidArgument("sobolev trials must be >= 1");
    Rng rng(seed);
    std::vector<ScalarField> family;
    family.reserve(trials);
    for (int i = 0; i < trials; ++i) family.push_back(bg.random_band_limited(rng, max_wavenumber));
    return family;
}

double sobolev_proxy(const FlowState& s, const std::vector<ScalarField>& family) {
    double best = 0.0;
    for (const auto& f : family) best = std::max(best, sobolev_quotient(s, f));
    return best;
}

double sobolev_proxy(const FlowState& s, int trials, std::uint64_t seed, int max_wavenumber) {
    return sobolev_proxy(s, sobolev_family(s.bg(), trials, seed, max_wavenumber));
}

// ---------------------------------------------------------------------------

MinVolumeTracker::MinVolumeTracker(double flux, double r0)
    : flux8pi_threshold_(r0 > 0.0 ? flux * flux / (8.0 * std::numbers::pi) : std::numeric_limits<double>::infinity()),
      flux2r0_threshold_(r0 > 0.0 ? flux * flux / (2.0 * r0) : std::numeric_limits<double>::infinity()) {}

void MinVolumeTracker::observe(double t, double vol) {
    // Decreases below this relative size are rounding, not volume loss.
    constexpr double kSlack = 1e-12;
    if (count_ > 0) {
        const bool decreased = vol < last_volume_ * (1.0 - kSlack);
        if (decreased && last_volume_ <= flux8pi_threshold_) ++flux8pi_violations_;
        if (decreased && last_volume_ <= flux2r0_threshold_) ++flux2r0_violations_;
    }
    if (vol < min_volume_) {
        min_volume_ = vol;
        t_at_min_ = t;
    }
    const bool in_flux8pi = vol <= flux8pi_threshold_;
    const bool in_flux2r0 = vol <= flux2r0_threshold_;
    entered_flux8pi_ = entered_flux8pi_ || in_flux8pi;
    entered_flux2r0_ = entered_flux2r0_ || in_flux2r0;
    flag_ = (in_flux8pi ? 1 : 0) + (in_flux2r0 ? 2 : 0);
    last_volume_ = vol;
    ++count_;
}

MinVolumeTracker::Snapshot MinVolumeTracker::save() const {
    return {min_volume_,    t_at_min_,        last_volume_,          entered_flux8pi_, entered_flux2r0_,
            flux8pi_violations_, flux2r0_violations_, flag_, count_};
}

void MinVolumeTracker::restore(const Snapshot& s) {
    min_volume_ = s.min_volume;
    t_at_min_ = s.t_at_min;
    last_volume_ = s.last_volume;
    entered_flux8pi_ = s.entered_flux8pi;
    entered_flux2r0_ = s.entered_flux2r0;
    flux8pi_violations_ = s.flux8pi_violations;
    flux2r0_violations_ = s.flux2r0_violations;
    flag_ = s.flag;
    count_ = s.count;
}

// ---------------------------------------------------------------------------

DiagnosticsRecord evaluate_diagnostics(const FlowState* prev, const FlowState& next, FlowVariant variant,
                                       const std::vector<ScalarField>& sobolev_tests,
                                       const DiagnosticsOptions& opts) {
    DiagnosticsRecord rec;
    rec.t = next.t;
    rec.energy_F = energy_functional(next);
    rec.dissipation_pred = dissipation(next, variant).predicted;
    rec.volume = volume(next);
    rec.flux = flux(next);
    rec.calabi = calabi_energy(next);
    if (prev) {
        const double dt = next.t - prev->t;
        rec.dissipation_meas = (rec.energy_F - energy_functional(*prev)) / dt;
        const auto cr = conservation_residuals(*prev, next, dt, variant);
        rec.gauss_bonnet_residual = cr.gauss_bonnet;
        rec.volume_ode_residual = cr.volume_ode;
    } else {
        rec.dissipation_meas = rec.dissipation_pred;
        const auto cr = conservation_residuals(next, next, 1.0, variant);
        rec.gauss_bonnet_residual = cr.gauss_bonnet;
        rec.volume_ode_residual = 0.0;
    }
    rec.lambda_schrodinger = opts.eigenvalue ? lowest_eigenvalue(next, opts.eigen).lambda
                                             : std::numeric_limits<double>::quiet_NaN();
    const auto pd = parallel_defect(next);
    rec.parallel_defect_int = pd.integral;
    rec.parallel_defect_sup = pd.sup;
    rec.moser_trudinger_k = moser_trudinger(next, opts.moser_k);
    rec.sobolev_proxy = sobolev_tests.empty() ? 0.0 : sobolev_proxy(next, sobolev_tests);
    return rec;
}

}  // namespace rym
