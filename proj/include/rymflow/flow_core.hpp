#pragma once

#include "rymflow/field_state.hpp"

namespace rym {

enum class FlowVariant { Unnormalized, VolumeNormalized };

enum class Scheme { RK4Explicit, SemiImplicitSpectral };

struct StepperConfig {
    Scheme scheme = Scheme::SemiImplicitSpectral;
    double cfl_safety = 0.9;
    double dt_max = 1e-4;
    double dt_min = 1e-9;
};

void validate(const StepperConfig& cfg);

struct Rhs {
    ScalarField du_dt;
    ScalarField dpsi_dt;
};

/// Right-hand side of the coupled system. Both variants share
/// dpsi/dt = Delta0(e^{-u} psi). The normalized variant requires volume in
/// [0.99, 1.01] and throws VolumeDriftGuard otherwise.
Rhs rhs(const FlowState& s, FlowVariant variant);

/// Largest dt accepted by the RK4 guard: cfl_safety * 2 / (max(e^{-u}) * rho),
/// rho the spectral radius of Delta0.
double rk4_max_dt(const FlowState& s, double cfl_safety);

struct StepInfo {
    /// Volume before the normalized-flow projection (equal to the final volume otherwise).
    double volume_before_projection = 0.0;
};

struct StepOptions {
    double cfl_safety = 1.0;
    /// Normalized variant: shift u by -ln(volume) after the step.
    bool project_volume = true;
    double blowup_u = 50.0;
};

/// Advances by dt. RK4Explicit is classical fourth-order Runge-Kutta and throws
/// StepRejected when dt exceeds rk4_max_dt. SemiImplicitSpectral is first-order
/// integrating-factor Euler with the linear part mu Delta0 (mu = max e^{-u})
/// integrated exactly. Throws BlowUp if |u| exceeds the guard or values are
/// non-finite. On the sphere the result is band-limited.
FlowState step(const FlowState& s, double dt, FlowVariant variant, Scheme scheme,
               const StepOptions& opts = {}, StepInfo* info = nullptr);

/// Shift making the volume exactly 1 (up to rounding).
FlowState normalize_volume(const FlowState& s);

}  // namespace rym
