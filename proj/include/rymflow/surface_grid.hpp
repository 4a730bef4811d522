#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rymflow/random.hpp"

namespace rym {

enum class SurfaceKind { Torus, Sphere };

std::string to_string(SurfaceKind kind);

/// Grid dimensions. Torus: n x n (both entries equal). Sphere: n_lat x n_lon.
struct Resolution {
    int n0 = 0;
    int n1 = 0;
};

using Vec3 = std::array<double, 3>;

/// Node values of one real field, tagged with the geometry it lives on.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(std::uint64_t geometry_tag, std::vector<double> values)
        : values_(std::move(values)), tag_(geometry_tag) {}

    std::size_t size() const { return values_.size(); }
    std::uint64_t geometry_tag() const { return tag_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    double max_abs() const;
    double max() const;
    double min() const;
    bool all_finite() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);
    ScalarField& operator+=(double c);

    /// this += s * other
    ScalarField& axpy(double s, const ScalarField& other);

private:
    std::vector<double> values_;
    std::uint64_t tag_ = 0;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);
/// Pointwise function application.
ScalarField map(const ScalarField& a, const std::function<double(double)>& fn);

namespace detail {
class SpectralBackend;
}

/// Fixed unit-volume background (flat torus [0,1)^2 or round sphere of area 1)
/// with its quadrature and spectral differential operators.
///
/// Torus operators are Fourier-spectral on a uniform periodic grid. Sphere
/// operators are spherical-harmonic transforms on a Gauss-Legendre colatitude
/// by uniform longitude grid, truncated at degree n_lat - 1; sphere fields
/// produced by the operators are band-limited to that degree.
class BackgroundGeometry {
public:
    BackgroundGeometry(SurfaceKind kind, Resolution res);
    ~BackgroundGeometry();
    BackgroundGeometry(const BackgroundGeometry&) = delete;
    BackgroundGeometry& operator=(const BackgroundGeometry&) = delete;

    SurfaceKind kind() const { return kind_; }
    Resolution resolution() const { return res_; }
    std::size_t node_count() const { return weights_.size(); }
    std::uint64_t tag() const { return tag_; }
    /// Scalar curvature of the background: 0 on the torus, 8*pi on the unit-area sphere.
    double r0() const { return r0_; }

    std::span<const double> quad_weights() const { return weights_; }
    /// Torus: x and y in [0,1). Sphere: colatitude theta and longitude phi.
    std::span<const double> coord0() const { return coord0_; }
    std::span<const double> coord1() const { return coord1_; }
    /// Sphere only: embedded unit-vector position of each node.
    std::span<const Vec3> positions() const { return positions_; }
    /// Node index of (row, col): torus row = y index, col = x index;
    /// sphere row = colatitude ring, col = longitude.
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * res_.n1 + col;
    }

    ScalarField constant(double value) const;
    ScalarField make_field(std::vector<double> values) const;
    /// Field sampled from fn(coord0, coord1).
    ScalarField sample(const std::function<double(double, double)>& fn) const;
    /// Sphere only: field sampled from fn(x, y, z) on the unit sphere.
    ScalarField sample_embedded(const std::function<double(const Vec3&)>& fn) const;

    void check(const ScalarField& f) const;

    ScalarField laplacian(const ScalarField& f) const;
    ScalarField grad_norm_sq(const ScalarField& f) const;
    /// <df, dh> in the background metric.
    ScalarField grad_dot(const ScalarField& f, const ScalarField& h) const;
    double integrate(const ScalarField& f) const;
    /// Weighted inner product sum(w f h).
    double inner(const ScalarField& f, const ScalarField& h) const;

    /// Applies symbol(lambda) to each Laplacian eigenmode, lambda <= 0 being the
    /// eigenvalue of that mode. exp(tau * Delta) is symbol = exp(tau * lambda).
    ScalarField apply_symbol(const ScalarField& f,
                             const std::function<double(double)>& symbol) const;
    /// Projection onto the representable band (identity on the torus).
    ScalarField project(const ScalarField& f) const;
    /// Largest |lambda| over representable modes.
    double laplacian_spectral_radius() const;
    /// Highest representable wavenumber (torus n/2, sphere degree n_lat - 1).
    int max_wavenumber() const;

    /// Single basis mode. Torus: c*cos(2pi(a x + b y)) + s*sin(...).
    /// Sphere: Pbar_a^b(cos theta) (c cos(b phi) + s sin(b phi)), 0 <= b <= a.
    ScalarField mode(int a, int b, double c, double s) const;
    /// Random combination of nonconstant modes with wavenumber <= max_wavenumber,
    /// zero mean, scaled to unit max-norm.
    ScalarField random_band_limited(Rng& rng, int max_wavenumber) const;

    /// Sphere only: spectral evaluation of f at arbitrary (theta, phi) points.
    std::vector<double> evaluate(const ScalarField& f,
                                 std::span<const std::array<double, 2>> points) const;

private:
    SurfaceKind kind_;
    Resolution res_;
    std::uint64_t tag_;
    double r0_;
    std::vector<double> weights_;
    std::vector<double> coord0_;
    std::vector<double> coord1_;
    std::vector<Vec3> positions_;
    std::unique_ptr<detail::SpectralBackend> backend_;
};

using GeometryPtr = std::shared_ptr<const BackgroundGeometry>;

/// Validates the resolution and builds the background. Torus needs n >= 8 and
/// even; sphere needs n_lat >= 8 and n_lon >= 2 n_lat - 1.
GeometryPtr build_background(SurfaceKind kind, Resolution res);

ScalarField laplacian0(const ScalarField& f, const BackgroundGeometry& bg);
ScalarField grad_norm_sq0(const ScalarField& f, const BackgroundGeometry& bg);
double integrate0(const ScalarField& f, const BackgroundGeometry& bg);

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace rym
