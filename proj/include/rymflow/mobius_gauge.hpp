#pragma once

#include "rymflow/field_state.hpp"

namespace rym {

/// Point b of the open unit ball; b = 0 is the identity.
class MoebiusParam {
public:
    MoebiusParam() = default;
    /// Throws InvalidArgument when |b| >= 1 - 1e-6.
    explicit MoebiusParam(const Vec3& b);

    const Vec3& b() const { return b_; }
    double norm() const;
    bool is_identity() const { return b_[0] == 0.0 && b_[1] == 0.0 && b_[2] == 0.0; }
    MoebiusParam inverse() const { return MoebiusParam({-b_[0], -b_[1], -b_[2]}); }

private:
    Vec3 b_{0.0, 0.0, 0.0};
};

/// T_b(x) = (1 - |b|^2)(x - b)/|x - b|^2 - b, a conformal automorphism of the
/// unit sphere with T_{-b} = T_b^{-1}.
Vec3 moebius_map(const MoebiusParam& p, const Vec3& x);

/// w_b at every node, T_b^* g0 = e^{w_b} g0, from forward-mode derivatives of
/// T_b in (theta, phi).
ScalarField moebius_conformal_factor(const BackgroundGeometry& bg, const MoebiusParam& p);

/// Integral of x dV_g over the embedded unit sphere. Throws UnsupportedSurface on the torus.
Vec3 center_of_mass(const FlowState& s);

/// u' = u o T_b + w_b, psi' = (psi o T_b) e^{w_b}; compositions are evaluated
/// by spherical-harmonic synthesis at the mapped points and the results are
/// projected to the grid band.
FlowState pullback(const FlowState& s, const MoebiusParam& p);

struct RecenterResult {
    FlowState state;
    MoebiusParam param;
    int iterations = 0;
    /// |center_of_mass| / volume of the returned state.
    double residual = 0.0;
};

/// Damped Newton with a finite-difference Jacobian for b with
/// |center_of_mass(pullback(s, b))| <= tol * volume. Returns (s, 0) when s
/// already satisfies the bound. Throws ConvergenceError after 20 iterations
/// without reduction.
RecenterResult recenter(const FlowState& s, double tol);

}  // namespace rym
