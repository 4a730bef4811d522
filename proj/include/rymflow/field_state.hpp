#pragma once

#include <vector>

#include "rymflow/surface_grid.hpp"

namespace rym {

/// Conformal factor u (g = e^u g0) and psi = *0 F on a fixed background.
struct FlowState {
    GeometryPtr geometry;
    ScalarField u;
    ScalarField psi;
    double t = 0.0;

    const BackgroundGeometry& bg() const { return *geometry; }
};

/// Binds u and psi to the geometry and rejects non-finite values.
FlowState make_state(GeometryPtr geometry, ScalarField u, ScalarField psi, double t = 0.0);

/// Throws InvalidState on non-finite u or psi, ContractViolation on a geometry mismatch.
void validate(const FlowState& s);

/// e^{-u} (R0 - Delta0 u).
ScalarField scalar_curvature(const FlowState& s);

enum class NormKind { Background, Evolving };

/// |F|^2 as the full contraction F_ij F^ij: 2 psi^2 (background) or 2 psi^2 e^{-2u}.
ScalarField f_norm_sq(const FlowState& s, NormKind which);

/// Max over nodes and entries of |g^kl F_ik F_jl - 1/2 |F|^2_g g_ij|, assembled
/// in coordinates (torus (x, y); sphere (theta, phi) on the area-1 sphere).
double stress_identity_residual(const FlowState& s);

/// Integral of e^u dV0. Throws InvalidState when max(u) would overflow e^u.
double volume(const FlowState& s);
/// Integral of psi dV0.
double flux(const FlowState& s);

/// Pointwise quantities of the evolving metric, computed once per state.
struct GeometryCache {
    ScalarField R;
    ScalarField norm_f2_bg;
    ScalarField norm_f2_g;
    /// e^u times the background quadrature weights.
    std::vector<double> dvg_weights;
    double vol = 0.0;
};

GeometryCache build_cache(const FlowState& s);

}  // namespace rym
