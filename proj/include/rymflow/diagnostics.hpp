#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "rymflow/flow_core.hpp"

namespace rym {

/// Integral of |du|^2 + e^{-u} |F|^2 over dV0, plus 2 R0 times the integral of u.
double energy_functional(const FlowState& s);

struct Dissipation {
    double predicted = 0.0;
    /// Integral of e^u (du/dt)^2 dV0.
    double metric_part = 0.0;
    /// Integral of |nabla F|^2_g dV_g = 2 * integral of |d(e^{-u} psi)|^2 dV0.
    double bundle_part = 0.0;
};

/// predicted = -2 metric_part - 2 bundle_part, the time derivative of the energy.
Dissipation dissipation(const FlowState& s, FlowVariant variant);

/// Integral of (K - Kbar)^2 dV_g with K = R/2 and Kbar its g-average.
double calabi_energy(const FlowState& s);

/// Integral of e^{-u} (Delta0 u)^2 dV0; compared against the Calabi energy as
/// an informational quantity only.
double calabi_laplacian_form(const FlowState& s);

struct ConservationResiduals {
    double gauss_bonnet = 0.0;
    /// Unnormalized: finite-difference dVol/dt minus the volume rate at the
    /// midpoint state. Normalized: volume(next) - 1.
    double volume_ode = 0.0;
    double flux_drift = 0.0;
};

ConservationResiduals conservation_residuals(const FlowState& prev, const FlowState& next, double dt,
                                             FlowVariant variant);

/// d/dt Vol = -R0 + integral of 1/2 |F|^2_g dV_g for the unnormalized flow.
double volume_rate(const FlowState& s);

struct EigenOptions {
    double tol = 1e-9;
    int max_iterations = 500;
};

struct EigenResult {
    double lambda = 0.0;
    ScalarField eigenfield;
    double residual = 0.0;
    int iterations = 0;
};

/// Lowest eigenvalue of -4 Delta_g + R - |F|^2_g / 4 on functions, with
/// Delta_g = e^{-u} Delta0 and the dV_g inner product. Preconditioned
/// single-vector LOBPCG from the constant start vector. The eigenfield has
/// unit dV_g norm and positive mean. Throws ConvergenceError.
EigenResult lowest_eigenvalue(const FlowState& s, const EigenOptions& opts = {});

struct ParallelDefect {
    double integral = 0.0;
    double sup = 0.0;
};

ParallelDefect parallel_defect(const FlowState& s);

/// Integral of e^{k|u|} dV0. Throws OverflowGuard when k max|u| > 700.
double moser_trudinger(const FlowState& s, double k);

/// ||f - fbar||_{L2(g)} / integral of |grad f|_g dV_g.
double sobolev_quotient(const FlowState& s, const ScalarField& f);

/// Deterministic family of band-limited test fields. A longer family from the
/// same seed extends a shorter one.
std::vector<ScalarField> sobolev_family(const BackgroundGeometry& bg, int trials, std::uint64_t seed,
                                        int max_wavenumber);

/// Max of sobolev_quotient over the family: a lower bound on the Sobolev constant.
double sobolev_proxy(const FlowState& s, const std::vector<ScalarField>& family);
double sobolev_proxy(const FlowState& s, int trials, std::uint64_t seed, int max_wavenumber = 8);

/// Tracks the minimum volume and the two threshold regions where the volume
/// cannot decrease: flux^2 / (8 pi) and flux^2 / (2 R0).
class MinVolumeTracker {
public:
    MinVolumeTracker(double flux, double r0);

    void observe(double t, double volume);

    double flux8pi_threshold() const { return flux8pi_threshold_; }
    double flux2r0_threshold() const { return flux2r0_threshold_; }
    double min_volume() const { return min_volume_; }
    double t_at_min() const { return t_at_min_; }
    bool entered_flux8pi_region() const { return entered_flux8pi_; }
    bool entered_flux2r0_region() const { return entered_flux2r0_; }
    /// Steps whose volume decreased while the previous volume was inside the region.
    int flux8pi_violations() const { return flux8pi_violations_; }
    int flux2r0_violations() const { return flux2r0_violations_; }
    /// 0 outside both regions, 1 inside the flux8pi region only, 2 inside the
    /// flux2r0 region only, 3 inside both; for the latest observation.
    int flag() const { return flag_; }
    std::size_t observations() const { return count_; }

    struct Snapshot {
        double min_volume, t_at_min, last_volume;
        bool entered_flux8pi, entered_flux2r0;
        int flux8pi_violations, flux2r0_violations, flag;
        std::size_t count;
    };
    Snapshot save() const;
    void restore(const Snapshot& s);

private:
    double flux8pi_threshold_;
    double flux2r0_threshold_;
    double min_volume_ = std::numeric_limits<double>::infinity();
    double t_at_min_ = 0.0;
    double last_volume_ = std::numeric_limits<double>::quiet_NaN();
    bool entered_flux8pi_ = false;
    bool entered_flux2r0_ = false;
    int flux8pi_violations_ = 0;
    int flux2r0_violations_ = 0;
    int flag_ = 0;
    std::size_t count_ = 0;
};

struct DiagnosticsRecord {
    double t = 0.0;
    double energy_F = 0.0;
    double dissipation_pred = 0.0;
    double dissipation_meas = 0.0;
    double volume = 0.0;
    double flux = 0.0;
    double calabi = 0.0;
    double gauss_bonnet_residual = 0.0;
    double volume_ode_residual = 0.0;
    double lambda_schrodinger = 0.0;
    double parallel_defect_int = 0.0;
    double parallel_defect_sup = 0.0;
    double moser_trudinger_k = 0.0;
    double sobolev_proxy = 0.0;
    int min_volume_flag = 0;
};

struct DiagnosticsOptions {
    double moser_k = 1.0;
    bool eigenvalue = true;
    EigenOptions eigen;
};

/// One record for `next`. Without `prev`, dissipation_meas equals the
/// prediction and the volume residual is 0.
DiagnosticsRecord evaluate_diagnostics(const FlowState* prev, const FlowState& next, FlowVariant variant,
                                       const std::vector<ScalarField>& sobolev_tests,
                                       const DiagnosticsOptions& opts);

}  // namespace rym
