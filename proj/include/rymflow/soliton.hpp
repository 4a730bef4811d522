#pragma once

#include <string>
#include <vector>

#include "rymflow/field_state.hpp"

namespace rym {

/// Rotationally symmetric data g = dr^2 + phi(r)^2 dtheta^2, F = psi(r) dr ^ dtheta
/// on a uniform radial grid over [0, A].
struct SolitonProfile {
    double A = 0.0;
    std::vector<double> r;
    std::vector<double> phi;
    std::vector<double> psi;
    std::vector<double> f;
    double c = 0.0;
    /// Integration constant in f' = a phi as supplied; solve_a recomputes it.
    double a = 0.0;
};

/// Throws InvalidProfile when sizes disagree, fewer than 6 nodes, the grid is
/// not uniform on [0, A], values are non-finite, or phi <= 0 at an interior node.
void validate(const SolitonProfile& p);

/// Fourth-order derivatives on a uniform grid, one-sided at the two nodes
/// nearest each end.
std::vector<double> radial_d1(const std::vector<double>& v, double h);
std::vector<double> radial_d2(const std::vector<double>& v, double h);

/// Composite Simpson; an odd interval count closes with the 3/8 rule.
double radial_integral(const std::vector<double>& v, double h);

struct ResidualField {
    std::string name;
    /// Values on the interior nodes 1 .. n-2.
    std::vector<double> values;
    double max_abs = 0.0;
};

struct SolitonResiduals {
    /// M1 = -phi''/phi - (c + psi^2/phi^2 + f''),
    /// M2 = -phi''/phi - (c + psi^2/phi^2 + phi' f'/phi),
    /// Y1 = phi' psi / phi, Y2 = psi' - psi f'.
    ResidualField m1, m2, y1, y2;
};

SolitonResiduals soliton_residuals(const SolitonProfile& p);

enum class ReducedForm {
    /// -phi''/phi - (c + psi^2/phi^2 + a phi'), consistent with M1 and M2.
    Consistent,
    /// -phi''/phi - (c + psi + a phi'), with the bare psi term.
    Printed,
};

/// Reduced metric equation after substituting f' = a phi, with a from the profile.
ResidualField reduced_residual(const SolitonProfile& p, ReducedForm form);

struct ASolution {
    double a = 0.0;
    /// -c [(phi')^2/2] - [phi^2/2] between 0 and A from the sampled endpoints.
    double numerator = 0.0;
    /// The same expression with the closure values substituted; exactly 0.
    double symbolic_numerator = 0.0;
    /// Integral of phi (phi')^2.
    double denominator = 0.0;
};

/// Solves -c [(phi')^2/2] = [phi^2/2] + a * integral(phi (phi')^2) for a.
/// Throws DegenerateProfile when the integral is below 1e-14.
ASolution solve_a(const SolitonProfile& p);

/// max(|phi(0)|, |phi(A)|, |phi'(0) - 1|, |phi'(A) + 1|).
double closure_defect(const SolitonProfile& p);

struct SolitonVerdict {
    bool soliton = false;
    /// Names of residuals (M1, M2, Y1, Y2, closure) above tol.
    std::vector<std::string> violated;
    /// Names of failed conclusion checks when every residual passed.
    std::vector<std::string> conclusion_failures;
    SolitonResiduals residuals;
    ASolution a;
    double closure = 0.0;
    /// max |f' - a phi|.
    double f_prime_minus_a_phi = 0.0;
    /// max |psi'|.
    double psi_prime = 0.0;
    /// Mean and max - min of the Gauss curvature -phi''/phi on the interior.
    double curvature_mean = 0.0;
    double curvature_variation = 0.0;
    /// max |psi|: F = 0 reading of the Yang-Mills pair.
    double psi_zero_reading = 0.0;
    /// max |(psi/phi)'| on the interior: F parallel reading, psi = const * phi.
    double psi_parallel_reading = 0.0;
};

/// All residual max norms and the closure defect at most tol, then the
/// conclusion checks f' = a phi, psi' = 0 and constant curvature within tol.
SolitonVerdict classify(const SolitonProfile& p, double tol);

/// Surface of revolution carried to the sphere grid by the conformal
/// coordinate s = integral dr/phi matched to log tan(theta/2); the profile is
/// centered at s = 0 at mid-extent. u = log(phi^2 / (rho^2 sin^2 theta)) and
/// psi0 = psi phi / (rho^2 sin^2 theta) with rho^2 = 1/(4 pi) the background
/// radius squared. Throws UnsupportedSurface on the torus.
FlowState embed_on_sphere(const SolitonProfile& p, GeometryPtr sphere);

}  // namespace rym
