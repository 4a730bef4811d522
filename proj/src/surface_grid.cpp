#include "rymflow/surface_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

#include "rymflow/errors.hpp"

namespace rym {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

std::string to_string(SurfaceKind kind) { return kind == SurfaceKind::Torus ? "torus" : "sphere"; }

// ---------------------------------------------------------------------------
// ScalarField

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

static void require_same(const ScalarField& a, const ScalarField& b) {
    if (a.geometry_tag() != b.geometry_tag() || a.size() != b.size())
        throw ContractViolation("fields bound to different geometries");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    require_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    require_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& other) {
    require_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    require_same(a, b);
    ScalarField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

ScalarField map(const ScalarField& a, const std::function<double(double)>& fn) {
    ScalarField out = a;
    for (double& v : out.data()) v = fn(v);
    return out;
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

// ---------------------------------------------------------------------------
// Spectral backends

namespace detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

class SpectralBackend {
public:
    virtual ~SpectralBackend() = default;
    virtual void apply_symbol(std::span<const double> in, std::span<double> out,
                              const std::function<double(double)>& symbol) const = 0;
    /// Components of df in an orthonormal frame of g0.
    virtual void gradient(std::span<const double> in, std::span<double> d0,
                          std::span<double> d1) const = 0;
    virtual void project(std::span<const double> in, std::span<double> out) const = 0;
    virtual double spectral_radius() const = 0;
    virtual std::vector<double> mode(int a, int b, double c, double s) const = 0;
    virtual std::vector<double> random(Rng& rng, int max_wavenumber) const = 0;
    virtual std::vector<double> evaluate(std::span<const double>,
                                         std::span<const std::array<double, 2>>) const {
        throw UnsupportedSurface("point evaluation is only available on the sphere");
    }
};

// Uniform periodic grid on [0,1)^2, Fourier-spectral derivatives.
class TorusBackend final : public SpectralBackend {
public:
    explicit TorusBackend(int n) : n_(n), nh_(n / 2 + 1) {
        std::vector<double> rbuf(static_cast<std::size_t>(n) * n);
        std::vector<cplx> cbuf(static_cast<std::size_t>(n) * nh_);
        {
            std::lock_guard lock(planner_mutex());
            const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
            fwd_ = fftw_plan_dft_r2c_2d(n, n, rbuf.data(), as_fftw(cbuf.data()), flags);
            inv_ = fftw_plan_dft_c2r_2d(n, n, as_fftw(cbuf.data()), rbuf.data(), flags);
        }
        wave_y_.resize(n);
        for (int i = 0; i < n; ++i) {
            const int k = i <= n / 2 ? i : i - n;
            wave_y_[i] = 2.0 * kPi * k;
        }
        wave_x_.resize(nh_);
        for (int i = 0; i < nh_; ++i) wave_x_[i] = 2.0 * kPi * i;
        eig_.resize(cbuf.size());
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < nh_; ++ix)
                eig_[iy * nh_ + ix] = -(wave_y_[iy] * wave_y_[iy] + wave_x_[ix] * wave_x_[ix]);
    }

    ~TorusBackend() override {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }

    void apply_symbol(std::span<const double> in, std::span<double> out,
                      const std::function<double(double)>& symbol) const override {
        auto c = forward(in);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= symbol(eig_[i]);
        inverse(c, out);
    }

    void gradient(std::span<const double> in, std::span<double> d0,
                  std::span<double> d1) const override {
        const auto c = forward(in);
        std::vector<cplx> cx(c.size()), cy(c.size());
        for (int iy = 0; iy < n_; ++iy) {
            const double ky = (iy == n_ / 2) ? 0.0 : wave_y_[iy];
            for (int ix = 0; ix < nh_; ++ix) {
                const double kx = (ix == n_ / 2) ? 0.0 : wave_x_[ix];
                const std::size_t k = static_cast<std::size_t>(iy) * nh_ + ix;
                cx[k] = cplx(0.0, kx) * c[k];
                cy[k] = cplx(0.0, ky) * c[k];
            }
        }
        inverse(cx, d0);
        inverse(cy, d1);
    }

    void project(std::span<const double> in, std::span<double> out) const override {
        std::copy(in.begin(), in.end(), out.begin());
    }

    double spectral_radius() const override { return 2.0 * kPi * kPi * n_ * n_; }

    std::vector<double> mode(int kx, int ky, double c, double s) const override {
        std::vector<double> v(static_cast<std::size_t>(n_) * n_);
        for (int iy = 0; iy < n_; ++iy)
            for (int ix = 0; ix < n_; ++ix) {
                const double arg = 2.0 * kPi * (static_cast<double>(kx) * ix + static_cast<double>(ky) * iy) / n_;
                v[static_cast<std::size_t>(iy) * n_ + ix] = c * std::cos(arg) + s * std::sin(arg);
            }
        return v;
    }

    std::vector<double> random(Rng& rng, int kmax) const override {
        std::vector<double> v(static_cast<std::size_t>(n_) * n_, 0.0);
        for (int kx = 0; kx <= kmax; ++kx)
            for (int ky = -kmax; ky <= kmax; ++ky) {
                if (kx == 0 && ky <= 0) continue;
                const double a = rng.uniform(-1.0, 1.0);
                const double b = rng.uniform(-1.0, 1.0);
                const auto m = mode(kx, ky, a, b);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] += m[i];
            }
        return v;
    }

private:
    std::vector<cplx> forward(std::span<const double> in) const {
        std::vector<cplx> c(static_cast<std::size_t>(n_) * nh_);
        fftw_execute_dft_r2c(fwd_, const_cast<double*>(in.data()), as_fftw(c.data()));
        return c;
    }

    // c is consumed.
    void inverse(std::vector<cplx>& c, std::span<double> out) const {
        fftw_execute_dft_c2r(inv_, as_fftw(c.data()), out.data());
        const double scale = 1.0 / (static_cast<double>(n_) * n_);
        for (double& v : out) v *= scale;
    }

    int n_;
    int nh_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
    std::vector<double> wave_x_;
    std::vector<double> wave_y_;
    std::vector<double> eig_;
};

// Fully normalized associated Legendre functions (geodesy convention, no
// Condon-Shortley phase): (1/4pi) int (Pbar_lm cos(m phi))^2 = 1. Stored
// m-major in a triangular layout.
class LegendreTable {
public:
    explicit LegendreTable(int lmax) : lmax_(lmax) {
        const int n = lmax + 1;
        a_.assign(static_cast<std::size_t>(n) * n, 0.0);
        b_.assign(static_cast<std::size_t>(n) * n, 0.0);
        d_.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int m = 0; m <= lmax; ++m)
            for (int l = m + 1; l <= lmax; ++l) {
                const double l2 = static_cast<double>(l) * l, m2 = static_cast<double>(m) * m;
                a_[l * n + m] = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
                b_[l * n + m] = l >= m + 2 ? std::sqrt((2.0 * l + 1.0) * (l - 1.0 - m) * (l - 1.0 + m) /
                                                       ((2.0 * l - 3.0) * (l2 - m2)))
                                           : 0.0;
                d_[l * n + m] = std::sqrt((2.0 * l + 1.0) * (l2 - m2) / (2.0 * l - 1.0));
            }
    }

    int lmax() const { return lmax_; }
    std::size_t count() const { return static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 2) / 2; }
    std::size_t index(int l, int m) const {
        return static_cast<std::size_t>(m) * (lmax_ + 1) - static_cast<std::size_t>(m) * (m - 1) / 2 + (l - m);
    }

    /// Fills values (and optionally d/dtheta) at colatitude with cos x, sin s > 0.
    void evaluate(double x, double s, double* p, double* dp) const {
        const int n = lmax_ + 1;
        double pmm = 1.0;
        for (int m = 0; m <= lmax_; ++m) {
            if (m == 1)
                pmm = std::sqrt(3.0) * s;
            else if (m >= 2)
                pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
            const std::size_t base = index(m, m);
            p[base] = pmm;
            if (m < lmax_) p[base + 1] = std::sqrt(2.0 * m + 3.0) * x * pmm;
            for (int l = m + 2; l <= lmax_; ++l)
                p[base + (l - m)] = a_[l * n + m] * x * p[base + (l - m - 1)] - b_[l * n + m] * p[base + (l - m - 2)];
            if (dp) {
                // sin(theta) dP_lm/dtheta = l x P_lm - d_lm P_{l-1,m}
                for (int l = m; l <= lmax_; ++l) {
                    double v = l * x * p[base + (l - m)];
                    if (l > m) v -= d_[l * n + m] * p[base + (l - m - 1)];
                    dp[base + (l - m)] = v / s;
                }
            }
        }
    }

private:
    int lmax_;
    std::vector<double> a_, b_, d_;
};

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

// Gauss-Legendre colatitudes x uniform longitudes on the sphere of area 1
// (radius^2 = 1/(4 pi)), spherical-harmonic transforms truncated at lmax = n_lat - 1.
class SphereBackend final : public SpectralBackend {
public:
    SphereBackend(int nlat, int nlon, std::vector<double> cos_t, std::vector<double> sin_t)
        : nlat_(nlat), nlon_(nlon), nh_(nlon / 2 + 1), table_(nlat - 1),
          cos_t_(std::move(cos_t)), sin_t_(std::move(sin_t)) {
        auto [x, w] = gauss_legendre(nlat);
        gw_ = w;
        const std::size_t nc = table_.count();
        p_.resize(nc * nlat);
        dp_.resize(nc * nlat);
        for (int j = 0; j < nlat; ++j)
            table_.evaluate(cos_t_[j], sin_t_[j], &p_[j * nc], &dp_[j * nc]);
        std::vector<double> rbuf(static_cast<std::size_t>(nlat) * nlon);
        std::vector<cplx> cbuf(static_cast<std::size_t>(nlat) * nh_);
        {
            std::lock_guard lock(planner_mutex());
            const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
            int len[1] = {nlon};
            fwd_ = fftw_plan_many_dft_r2c(1, len, nlat, rbuf.data(), nullptr, 1, nlon,
                                          as_fftw(cbuf.data()), nullptr, 1, nh_, flags);
            inv_ = fftw_plan_many_dft_c2r(1, len, nlat, as_fftw(cbuf.data()), nullptr, 1, nh_,
                                          rbuf.data(), nullptr, 1, nlon, flags);
        }
        const int lmax = table_.lmax();
        eig_.resize(nc);
        for (int m = 0; m <= lmax; ++m)
            for (int l = m; l <= lmax; ++l) eig_[table_.index(l, m)] = -4.0 * kPi * l * (l + 1.0);
    }

    ~SphereBackend() override {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }

    const std::vector<double>& gauss_weights() const { return gw_; }

    void apply_symbol(std::span<const double> in, std::span<double> out,
                      const std::function<double(double)>& symbol) const override {
        auto a = analysis(in);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= symbol(eig_[i]);
        synthesis(a, p_, out);
    }

    void gradient(std::span<const double> in, std::span<double> d0,
                  std::span<double> d1) const override {
        const auto a = analysis(in);
        const double scale = std::sqrt(4.0 * kPi);
        synthesis(a, dp_, d0);
        auto ad = a;
        const int lmax = table_.lmax();
        for (int m = 0; m <= lmax; ++m)
            for (int l = m; l <= lmax; ++l) ad[table_.index(l, m)] *= cplx(0.0, m);
        synthesis(ad, p_, d1);
        for (int j = 0; j < nlat_; ++j)
            for (int k = 0; k < nlon_; ++k) {
                const std::size_t i = static_cast<std::size_t>(j) * nlon_ + k;
                d0[i] *= scale;
                d1[i] *= scale / sin_t_[j];
            }
    }

    void project(std::span<const double> in, std::span<double> out) const override {
        const auto a = analysis(in);
        synthesis(a, p_, out);
    }

    double spectral_radius() const override {
        const int l = table_.lmax();
        return 4.0 * kPi * l * (l + 1.0);
    }

    std::vector<double> mode(int l, int m, double c, double s) const override {
        if (l < 0 || m < 0 || m > l || l > table_.lmax())
            throw InvalidArgument("sphere mode requires 0 <= m <= l <= " + std::to_string(table_.lmax()));
        std::vector<cplx> a(table_.count(), 0.0);
        a[table_.index(l, m)] = m == 0 ? cplx(c, 0.0) : cplx(0.5 * c, -0.5 * s);
        std::vector<double> out(static_cast<std::size_t>(nlat_) * nlon_);
        synthesis(a, p_, out);
        return out;
    }

    std::vector<double> random(Rng& rng, int kmax) const override {
        const int lmax = std::min(kmax, table_.lmax());
        std::vector<cplx> a(table_.count(), 0.0);
        for (int l = 1; l <= lmax; ++l)
            for (int m = 0; m <= l; ++m) {
                const double re = rng.uniform(-1.0, 1.0);
                const double im = rng.uniform(-1.0, 1.0);
                a[table_.index(l, m)] = m == 0 ? cplx(re, 0.0) : cplx(0.5 * re, 0.5 * im);
            }
        std::vector<double> out(static_cast<std::size_t>(nlat_) * nlon_);
        synthesis(a, p_, out);
        return out;
    }

    std::vector<double> evaluate(std::span<const double> in,
                                 std::span<const std::array<double, 2>> points) const override {
        const auto a = analysis(in);
        const int lmax = table_.lmax();
        std::vector<double> p(table_.count());
        std::vector<double> out(points.size());
        for (std::size_t q = 0; q < points.size(); ++q) {
            const double theta = points[q][0], phi = points[q][1];
            table_.evaluate(std::cos(theta), std::sin(theta), p.data(), nullptr);
            double acc = 0.0;
            for (int m = 0; m <= lmax; ++m) {
                cplx fm = 0.0;
                const std::size_t base = table_.index(m, m);
                for (int l = m; l <= lmax; ++l) fm += a[base + (l - m)] * p[base + (l - m)];
                const cplx e(std::cos(m * phi), std::sin(m * phi));
                acc += (m == 0 ? 1.0 : 2.0) * (fm * e).real();
            }
            out[q] = acc;
        }
        return out;
    }

private:
    // The mean is removed before transforming and restored as a_00 exactly, so
    // constants do not leak roundoff into high degrees (amplified by l(l+1)).
    std::vector<cplx> analysis(std::span<const double> in) const {
        CompensatedSum mean_sum;
        for (int j = 0; j < nlat_; ++j) {
            CompensatedSum ring_sum;
            for (int k = 0; k < nlon_; ++k) ring_sum.add(in[static_cast<std::size_t>(j) * nlon_ + k]);
            mean_sum.add(ring_sum.value() * gw_[j] / (2.0 * nlon_));
        }
        const double mean = mean_sum.value();
        std::vector<double> centered(in.begin(), in.end());
        for (double& v : centered) v -= mean;
        std::vector<cplx> ring(static_cast<std::size_t>(nlat_) * nh_);
        fftw_execute_dft_r2c(fwd_, centered.data(), as_fftw(ring.data()));
        const std::size_t nc = table_.count();
        const int lmax = table_.lmax();
        std::vector<cplx> a(nc, 0.0);
        for (int j = 0; j < nlat_; ++j) {
            const double* pj = &p_[j * nc];
            for (int m = 0; m <= lmax; ++m) {
                const cplx fm = ring[static_cast<std::size_t>(j) * nh_ + m] * (gw_[j] / nlon_);
                const std::size_t base = table_.index(m, m);
                for (int l = m; l <= lmax; ++l) a[base + (l - m)] += fm * pj[base + (l - m)];
            }
        }
        for (int m = 0; m <= lmax; ++m) {
            const double norm = 1.0 / (2.0 * (m == 0 ? 1.0 : 2.0));
            const std::size_t base = table_.index(m, m);
            for (int l = m; l <= lmax; ++l) a[base + (l - m)] *= norm;
        }
        for (int l = 0; l <= lmax; ++l) a[table_.index(l, 0)].imag(0.0);
        a[0] += mean;
        return a;
    }

    void synthesis(const std::vector<cplx>& a, const std::vector<double>& basis,
                   std::span<double> out) const {
        const std::size_t nc = table_.count();
        const int lmax = table_.lmax();
        std::vector<cplx> ring(static_cast<std::size_t>(nlat_) * nh_, 0.0);
        for (int j = 0; j < nlat_; ++j) {
            const double* pj = &basis[j * nc];
            for (int m = 0; m <= lmax; ++m) {
                cplx fm = 0.0;
                const std::size_t base = table_.index(m, m);
                for (int l = m; l <= lmax; ++l) fm += a[base + (l - m)] * pj[base + (l - m)];
                ring[static_cast<std::size_t>(j) * nh_ + m] = fm;
            }
            ring[static_cast<std::size_t>(j) * nh_].imag(0.0);
        }
        fftw_execute_dft_c2r(inv_, as_fftw(ring.data()), out.data());
    }

    int nlat_;
    int nlon_;
    int nh_;
    LegendreTable table_;
    std::vector<double> cos_t_;
    std::vector<double> sin_t_;
    std::vector<double> gw_;
    std::vector<double> p_;
    std::vector<double> dp_;
    std::vector<double> eig_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// BackgroundGeometry

namespace {
std::uint64_t next_tag() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}
}  // namespace

BackgroundGeometry::BackgroundGeometry(SurfaceKind kind, Resolution res)
    : kind_(kind), res_(res), tag_(next_tag()), r0_(kind == SurfaceKind::Torus ? 0.0 : 8.0 * kPi) {
    const int n0 = res.n0, n1 = res.n1;
    const std::size_t count = static_cast<std::size_t>(n0) * n1;
    weights_.resize(count);
    coord0_.resize(count);
    coord1_.resize(count);
    if (kind == SurfaceKind::Torus) {
        const double w = 1.0 / static_cast<double>(count);
        for (int iy = 0; iy < n0; ++iy)
            for (int ix = 0; ix < n1; ++ix) {
                const std::size_t i = index(iy, ix);
                coord0_[i] = static_cast<double>(ix) / n1;
                coord1_[i] = static_cast<double>(iy) / n0;
                weights_[i] = w;
            }
        backend_ = std::make_unique<detail::TorusBackend>(n0);
        return;
    }
    auto [x, gw] = detail::gauss_legendre(n0);
    std::vector<double> cos_t(n0), sin_t(n0);
    positions_.resize(count);
    CompensatedSum total;
    for (int j = 0; j < n0; ++j) {
        const double theta = std::acos(x[j]);
        cos_t[j] = x[j];
        sin_t[j] = std::sqrt((1.0 - x[j]) * (1.0 + x[j]));
        for (int k = 0; k < n1; ++k) {
            const std::size_t i = index(j, k);
            const double phi = 2.0 * kPi * k / n1;
            coord0_[i] = theta;
            coord1_[i] = phi;
            positions_[i] = {sin_t[j] * std::cos(phi), sin_t[j] * std::sin(phi), cos_t[j]};
            weights_[i] = gw[j] / (2.0 * n1);
            total.add(weights_[i]);
        }
    }
    const double norm = total.value();
    for (double& w : weights_) w /= norm;
    backend_ = std::make_unique<detail::SphereBackend>(n0, n1, std::move(cos_t), std::move(sin_t));
}

BackgroundGeometry::~BackgroundGeometry() = default;

ScalarField BackgroundGeometry::constant(double value) const {
    return ScalarField(tag_, std::vector<double>(node_count(), value));
}

ScalarField BackgroundGeometry::make_field(std::vector<double> values) const {
    if (values.size() != node_count())
        throw ContractViolation("field length " + std::to_string(values.size()) +
                                " does not match node count " + std::to_string(node_count()));
    return ScalarField(tag_, std::move(values));
}

ScalarField BackgroundGeometry::sample(const std::function<double(double, double)>& fn) const {
    std::vector<double> v(node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(coord0_[i], coord1_[i]);
    return ScalarField(tag_, std::move(v));
}

ScalarField BackgroundGeometry::sample_embedded(const std::function<double(const Vec3&)>& fn) const {
    if (kind_ != SurfaceKind::Sphere) throw UnsupportedSurface("embedded sampling needs the sphere");
    std::vector<double> v(node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(positions_[i]);
    return ScalarField(tag_, std::move(v));
}

void BackgroundGeometry::check(const ScalarField& f) const {
    if (f.geometry_tag() != tag_ || f.size() != node_count())
        throw ContractViolation("field is not bound to this " + to_string(kind_) + " geometry");
}

ScalarField BackgroundGeometry::laplacian(const ScalarField& f) const {
    return apply_symbol(f, [](double lambda) { return lambda; });
}

ScalarField BackgroundGeometry::grad_norm_sq(const ScalarField& f) const {
    check(f);
    std::vector<double> d0(node_count()), d1(node_count());
    backend_->gradient(f.values(), d0, d1);
    for (std::size_t i = 0; i < d0.size(); ++i) d0[i] = d0[i] * d0[i] + d1[i] * d1[i];
    return ScalarField(tag_, std::move(d0));
}

ScalarField BackgroundGeometry::grad_dot(const ScalarField& f, const ScalarField& h) const {
    check(f);
    check(h);
    std::vector<double> f0(node_count()), f1(node_count()), h0(node_count()), h1(node_count());
    backend_->gradient(f.values(), f0, f1);
    backend_->gradient(h.values(), h0, h1);
    for (std::size_t i = 0; i < f0.size(); ++i) f0[i] = f0[i] * h0[i] + f1[i] * h1[i];
    return ScalarField(tag_, std::move(f0));
}

double BackgroundGeometry::integrate(const ScalarField& f) const {
    check(f);
    CompensatedSum s;
    for (std::size_t i = 0; i < weights_.size(); ++i) s.add(f[i] * weights_[i]);
    return s.value();
}

double BackgroundGeometry::inner(const ScalarField& f, const ScalarField& h) const {
    check(f);
    check(h);
    CompensatedSum s;
    for (std::size_t i = 0; i < weights_.size(); ++i) s.add(f[i] * h[i] * weights_[i]);
    return s.value();
}

ScalarField BackgroundGeometry::apply_symbol(const ScalarField& f,
                                             const std::function<double(double)>& symbol) const {
    check(f);
    std::vector<double> out(node_count());
    backend_->apply_symbol(f.values(), out, symbol);
    return ScalarField(tag_, std::move(out));
}

ScalarField BackgroundGeometry::project(const ScalarField& f) const {
    check(f);
    std::vector<double> out(node_count());
    backend_->project(f.values(), out);
    return ScalarField(tag_, std::move(out));
}

double BackgroundGeometry::laplacian_spectral_radius() const { return backend_->spectral_radius(); }

int BackgroundGeometry::max_wavenumber() const {
    return kind_ == SurfaceKind::Torus ? res_.n0 / 2 : res_.n0 - 1;
}

ScalarField BackgroundGeometry::mode(int a, int b, double c, double s) const {
    return ScalarField(tag_, backend_->mode(a, b, c, s));
}

ScalarField BackgroundGeometry::random_band_limited(Rng& rng, int max_wavenumber) const {
    if (max_wavenumber < 1) throw InvalidArgument("max wavenumber must be >= 1");
    ScalarField f(tag_, backend_->random(rng, max_wavenumber));
    f += -integrate(f);
    const double m = f.max_abs();
    if (m > 0.0) f *= 1.0 / m;
    return f;
}

std::vector<double> BackgroundGeometry::evaluate(const ScalarField& f,
                                                 std::span<const std::array<double, 2>> points) const {
    check(f);
    return backend_->evaluate(f.values(), points);
}

GeometryPtr build_background(SurfaceKind kind, Resolution res) {
    if (kind == SurfaceKind::Torus) {
        if (res.n1 == 0) res.n1 = res.n0;
        if (res.n0 < 8 || res.n1 < 8)
            throw InvalidArgument("torus resolution must be >= 8, got " + std::to_string(res.n0));
        if (res.n0 != res.n1) throw InvalidArgument("torus grid must be square (n x n)");
        if (res.n0 % 2 != 0) throw InvalidArgument("torus resolution must be even, got " + std::to_string(res.n0));
    } else {
        if (res.n0 < 8 || res.n1 < 8)
            throw InvalidArgument("sphere resolution must be >= 8 in each dimension, got " +
                                  std::to_string(res.n0) + "x" + std::to_string(res.n1));
        if (res.n1 < 2 * res.n0 - 1)
            throw InvalidArgument("sphere n_lon must be >= 2 n_lat - 1, got " + std::to_string(res.n0) +
                                  "x" + std::to_string(res.n1));
    }
    return std::make_shared<const BackgroundGeometry>(kind, res);
}

ScalarField laplacian0(const ScalarField& f, const BackgroundGeometry& bg) { return bg.laplacian(f); }
ScalarField grad_norm_sq0(const ScalarField& f, const BackgroundGeometry& bg) { return bg.grad_norm_sq(f); }
double integrate0(const ScalarField& f, const BackgroundGeometry& bg) { return bg.integrate(f); }

}  // namespace rym
