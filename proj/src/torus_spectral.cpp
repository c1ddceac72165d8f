#include "psns/torus_spectral.hpp"

#include "psns/fft_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace psns {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(const Vec3& a) {
    const double len = std::sqrt(dot(a, a));
    return {a[0] / len, a[1] / len, a[2] / len};
}

int wrap(int k, int N) { return k >= 0 ? k : k + N; }

/// Place one component of a Hermitian-symmetric spectrum into the FFTW half-spectrum.
void scatter(const SpectralSpace& space, int N, std::span<const Complex> values,
             std::vector<Complex>& spec) {
    spec.assign(fft::half_spectrum_size(N), Complex{});
    for (std::size_t ik = 0; ik < space.num_wavevectors(); ++ik) {
        const Lattice& k = space.wavevector(ik);
        const Complex w = values[ik];
        if (k[2] >= 0) spec[fft::half_spectrum_index(N, wrap(k[0], N), wrap(k[1], N), k[2])] = w;
        if (k[2] <= 0)
            spec[fft::half_spectrum_index(N, wrap(-k[0], N), wrap(-k[1], N), -k[2])] = std::conj(w);
    }
}

Complex gather(const std::vector<Complex>& spec, int N, const Lattice& k) {
    if (k[2] >= 0) return spec[fft::half_spectrum_index(N, wrap(k[0], N), wrap(k[1], N), k[2])];
    return std::conj(spec[fft::half_spectrum_index(N, wrap(-k[0], N), wrap(-k[1], N), -k[2])]);
}

void require_resolved(const SpectralSpace& space, int N) {
    if (N < 2 * space.cutoff() + 1)
        throw std::invalid_argument("grid of size " + std::to_string(N) +
                                    " cannot resolve modes |k| <= " + std::to_string(space.cutoff()));
}

std::vector<CVec3> all_fourier(const SpectralField& u) {
    std::vector<CVec3> out(u.space().num_wavevectors());
    for (std::size_t ik = 0; ik < out.size(); ++ik) out[ik] = u.fourier(ik);
    return out;
}

}  // namespace

bool half_space_contains(const Lattice& k) {
    if (k[0] > 0) return true;
    if (k[0] == 0 && k[1] > 0) return true;
    return k[0] == 0 && k[1] == 0 && k[2] > 0;
}

WaveIndex::WaveIndex(const Lattice& k) : k_(k) {
    if (!half_space_contains(k))
        throw std::invalid_argument("wavevector (" + std::to_string(k[0]) + "," + std::to_string(k[1]) +
                                    "," + std::to_string(k[2]) + ") is not in the half-space Z3+");
}

Mode::Mode(WaveIndex wave, int polarization) : k(wave), j(polarization) {
    if (j < 1 || j > 4) throw std::invalid_argument("polarization index must be in 1..4");
}

double eigenvalue(const WaveIndex& k, double L) {
    const double s = kTwoPi / L;
    return s * s * k.norm_sq();
}

std::pair<Vec3, Vec3> basis_pair(const Lattice& k) {
    if (k == Lattice{0, 0, 0}) throw std::invalid_argument("basis_pair: zero wavevector");
    const Vec3 kv{double(k[0]), double(k[1]), double(k[2])};
    static constexpr std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    Vec3 c{};
    for (const Vec3& e : axes) {
        c = cross(kv, e);
        if (c != Vec3{0, 0, 0}) break;  // integer components: the test is exact
    }
    const Vec3 v1 = normalized(c);
    const Vec3 v2 = normalized(cross(kv, v1));
    return {v1, v2};
}

Vec3 evaluate_mode(const WaveIndex& k, int j, const Vec3& x, double L) {
    if (j < 1 || j > 4) throw std::invalid_argument("polarization index must be in 1..4");
    const auto [v1, v2] = basis_pair(k.k());
    const Lattice& kk = k.k();
    const double phase = kTwoPi / L * (kk[0] * x[0] + kk[1] * x[1] + kk[2] * x[2]);
    const double f = kSqrt2 * (j <= 2 ? std::cos(phase) : std::sin(phase));
    const Vec3& v = (j == 1 || j == 3) ? v1 : v2;
    return {f * v[0], f * v[1], f * v[2]};
}

int fft_friendly_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

TorusGeometry TorusGeometry::with_cutoff(int n, double L) {
    TorusGeometry g;
    g.L = L;
    g.n = n;
    g.grid_size = 2 * n + 2;
    g.padded_size = fft_friendly_size(3 * (2 * n + 1));
    g.validate();
    return g;
}

int TorusGeometry::quadratic_size() const {
    return fft_friendly_size((3 * (2 * n + 1) + 1) / 2);
}

void TorusGeometry::validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("torus side L must be positive");
    if (n < 1) throw std::invalid_argument("Galerkin cutoff n must be >= 1");
    if (grid_size < 2 * n + 1)
        throw std::invalid_argument("grid_size must be >= 2n+1 = " + std::to_string(2 * n + 1));
    if (padded_size < 3 * (2 * n + 1))
        throw std::invalid_argument("padded_size must be >= 3(2n+1) = " + std::to_string(3 * (2 * n + 1)));
}

SpectralSpace::SpectralSpace(const TorusGeometry& geometry) : geometry_(geometry) {
    geometry_.validate();
    const int n = geometry_.n;
    for (int a = 0; a <= n; ++a)
        for (int b = -n; b <= n; ++b)
            for (int c = -n; c <= n; ++c) {
                const Lattice k{a, b, c};
                if (!half_space_contains(k) || norm_sq(k) > n * n) continue;
                waves_.push_back(k);
                auto [p, q] = basis_pair(k);
                v1_.push_back(p);
                v2_.push_back(q);
                lambda_.push_back(psns::eigenvalue(WaveIndex(k), geometry_.L));
            }
}

std::shared_ptr<const SpectralSpace> SpectralSpace::create(const TorusGeometry& geometry) {
    return std::shared_ptr<const SpectralSpace>(new SpectralSpace(geometry));
}

double SpectralSpace::first_eigenvalue() const {
    const double s = kTwoPi / geometry_.L;
    return s * s;
}

double SpectralSpace::max_eigenvalue() const { return *std::max_element(lambda_.begin(), lambda_.end()); }

std::optional<std::size_t> SpectralSpace::find(const Lattice& k) const {
    auto it = std::lower_bound(waves_.begin(), waves_.end(), k);
    if (it == waves_.end() || *it != k) return std::nullopt;
    return static_cast<std::size_t>(it - waves_.begin());
}

SpectralField::SpectralField(SpacePtr space) : space_(std::move(space)), coeffs_(space_->dof(), 0.0) {}

SpectralField::SpectralField(SpacePtr space, std::vector<double> coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != space_->dof())
        throw std::invalid_argument("coefficient vector length " + std::to_string(coeffs_.size()) +
                                    " does not match " + std::to_string(space_->dof()) + " modes");
}

// û_k = (C − iS)/√2 with C = a₁v₁ + a₂v₂ (cosine part) and S = a₃v₁ + a₄v₂ (sine part).
CVec3 SpectralField::fourier(std::size_t ik) const {
    const Vec3& v1 = space_->v1(ik);
    const Vec3& v2 = space_->v2(ik);
    const double* a = &coeffs_[4 * ik];
    CVec3 out;
    for (int c = 0; c < 3; ++c) {
        const double cosine = a[0] * v1[c] + a[1] * v2[c];
        const double sine = a[2] * v1[c] + a[3] * v2[c];
        out[c] = Complex(cosine, -sine) / kSqrt2;
    }
    return out;
}

void SpectralField::set_fourier(std::size_t ik, const CVec3& uhat) {
    const Vec3& v1 = space_->v1(ik);
    const Vec3& v2 = space_->v2(ik);
    const Vec3 re{uhat[0].real(), uhat[1].real(), uhat[2].real()};
    const Vec3 im{uhat[0].imag(), uhat[1].imag(), uhat[2].imag()};
    double* a = &coeffs_[4 * ik];
    a[0] = kSqrt2 * dot(re, v1);
    a[1] = kSqrt2 * dot(re, v2);
    a[2] = -kSqrt2 * dot(im, v1);
    a[3] = -kSqrt2 * dot(im, v2);
}

bool SpectralField::is_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double x) { return std::isfinite(x); });
}

void SpectralField::require_same_space(const SpectralField& other) const {
    if (space_ != other.space_ && !space_->geometry().same_space(other.space_->geometry()))
        throw std::invalid_argument("spectral fields live on different geometries");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_space(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same_space(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (double& x : coeffs_) x *= s;
    return *this;
}

SpectralField& SpectralField::axpy(double s, const SpectralField& other) {
    require_same_space(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * other.coeffs_[i];
    return *this;
}

PhysicalField::PhysicalField(double side, int points) : L(side), N(points) {
    const std::size_t total = static_cast<std::size_t>(N) * N * N;
    for (auto& c : comp) c.assign(total, 0.0);
}

Vec3 PhysicalField::point(int i0, int i1, int i2) const {
    const double h = L / N;
    return {i0 * h, i1 * h, i2 * h};
}

void leray_project(std::span<CVec3> uhat, std::span<const Lattice> wavevectors) {
    if (uhat.size() != wavevectors.size())
        throw std::invalid_argument("leray_project: coefficient and wavevector counts differ");
    for (std::size_t i = 0; i < uhat.size(); ++i) {
        const Lattice& k = wavevectors[i];
        const int k2 = norm_sq(k);
        if (k2 == 0) {
            uhat[i] = CVec3{};
            continue;
        }
        const Complex kdotu = double(k[0]) * uhat[i][0] + double(k[1]) * uhat[i][1] + double(k[2]) * uhat[i][2];
        for (int c = 0; c < 3; ++c) uhat[i][c] -= double(k[c]) * kdotu / double(k2);
    }
}

std::vector<Vec3> synthesize(const SpectralField& u, std::span<const Vec3> points) {
    const SpectralSpace& sp = u.space();
    const double s = kTwoPi / sp.L();
    std::vector<Vec3> out(points.size(), Vec3{0, 0, 0});
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec3& x = points[p];
        Vec3 acc{0, 0, 0};
        for (std::size_t ik = 0; ik < sp.num_wavevectors(); ++ik) {
            const Lattice& k = sp.wavevector(ik);
            const double phase = s * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            const double cs = std::cos(phase), sn = std::sin(phase);
            const Vec3& v1 = sp.v1(ik);
            const Vec3& v2 = sp.v2(ik);
            const double a1 = u.at(ik, 1), a2 = u.at(ik, 2), a3 = u.at(ik, 3), a4 = u.at(ik, 4);
            for (int c = 0; c < 3; ++c)
                acc[c] += (a1 * v1[c] + a2 * v2[c]) * cs + (a3 * v1[c] + a4 * v2[c]) * sn;
        }
        for (int c = 0; c < 3; ++c) out[p][c] = kSqrt2 * acc[c];
    }
    return out;
}

PhysicalField transform_to_grid(const SpectralField& u, int N) {
    const SpectralSpace& sp = u.space();
    require_resolved(sp, N);
    const std::vector<CVec3> uhat = all_fourier(u);
    PhysicalField g(sp.L(), N);
    std::vector<Complex> values(uhat.size());
    std::vector<Complex> spec;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t ik = 0; ik < uhat.size(); ++ik) values[ik] = uhat[ik][c];
        scatter(sp, N, values, spec);
        fft::inverse(N, spec, g.comp[c]);
    }
    return g;
}

std::array<PhysicalField, 3> gradient_to_grid(const SpectralField& u, int N) {
    const SpectralSpace& sp = u.space();
    require_resolved(sp, N);
    const std::vector<CVec3> uhat = all_fourier(u);
    const double s = kTwoPi / sp.L();
    std::array<PhysicalField, 3> grad;
    std::vector<Complex> values(uhat.size());
    std::vector<Complex> spec;
    for (int i = 0; i < 3; ++i) {
        grad[i] = PhysicalField(sp.L(), N);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t ik = 0; ik < uhat.size(); ++ik)
                values[ik] = Complex(0.0, s * sp.wavevector(ik)[i]) * uhat[ik][c];
            scatter(sp, N, values, spec);
            fft::inverse(N, spec, grad[i].comp[c]);
        }
    }
    return grad;
}

std::vector<CVec3> fourier_coefficients(const PhysicalField& g, const SpectralSpace& space) {
    require_resolved(space, g.N);
    const int N = g.N;
    const double norm = 1.0 / (double(N) * N * N);
    std::vector<CVec3> out(space.num_wavevectors());
    std::vector<Complex> spec;
    for (int c = 0; c < 3; ++c) {
        fft::forward(N, g.comp[c], spec);
        for (std::size_t ik = 0; ik < out.size(); ++ik) out[ik][c] = gather(spec, N, space.wavevector(ik)) * norm;
    }
    return out;
}

SpectralField transform_to_spectral_weighted(const PhysicalField& g, const SpacePtr& space,
                                             std::span<const double> weight) {
    std::vector<CVec3> uhat = fourier_coefficients(g, *space);
    leray_project(uhat, space->wavevectors());
    SpectralField out(space);
    for (std::size_t ik = 0; ik < uhat.size(); ++ik) {
        if (!weight.empty())
            for (auto& z : uhat[ik]) z *= weight[ik];
        out.set_fourier(ik, uhat[ik]);
    }
    return out;
}

SpectralField transform_to_spectral(const PhysicalField& g, const SpacePtr& space) {
    return transform_to_spectral_weighted(g, space, {});
}

double inner_h(const SpectralField& a, const SpectralField& b) {
    if (a.space_ptr() != b.space_ptr() && !a.geometry().same_space(b.geometry()))
        throw std::invalid_argument("inner product of fields on different geometries");
    double s = 0.0;
    auto x = a.coeffs();
    auto y = b.coeffs();
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm_h(const SpectralField& u) { return std::sqrt(inner_h(u, u)); }

namespace {
double weighted_sq(const SpectralField& u, double power) {
    const SpectralSpace& sp = u.space();
    double s = 0.0;
    for (std::size_t ik = 0; ik < sp.num_wavevectors(); ++ik) {
        double shell = 0.0;
        for (int j = 1; j <= 4; ++j) shell += u.at(ik, j) * u.at(ik, j);
        s += std::pow(sp.eigenvalue(ik), power) * shell;
    }
    return s;
}
}  // namespace

double norm_v(const SpectralField& u) { return std::sqrt(weighted_sq(u, 1.0)); }
double norm_vprime(const SpectralField& u) { return std::sqrt(weighted_sq(u, -1.0)); }

double mean_abs_pow(const PhysicalField& g, double q) {
    const std::size_t total = g.size();
    double s = 0.0;
    for (std::size_t p = 0; p < total; ++p) {
        const double m2 = g.comp[0][p] * g.comp[0][p] + g.comp[1][p] * g.comp[1][p] + g.comp[2][p] * g.comp[2][p];
        s += q == 2.0 ? m2 : std::pow(m2, 0.5 * q);
    }
    return s / double(total);
}

double mean_abs_pow(const SpectralField& u, double q) {
    return mean_abs_pow(transform_to_grid(u, u.geometry().padded_size), q);
}

double norm_lq(const SpectralField& u, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("L^q norm requires q >= 1");
    return std::pow(mean_abs_pow(u, q), 1.0 / q);
}

double norm_x_pow6(const SpectralField& u) {
    const int N = u.geometry().padded_size;
    const PhysicalField g = transform_to_grid(u, N);
    const auto grad = gradient_to_grid(u, N);
    double s = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 v = g.at(p);
        const double m2 = dot(v, v);
        double grad2 = 0.0, proj2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Vec3 di = grad[i].at(p);
            grad2 += dot(di, di);
            const double ud = dot(v, di);
            proj2 += ud * ud;
        }
        s += m2 * m2 * grad2 + 4.0 * m2 * proj2;
    }
    return s / double(g.size());
}

double norm_x(const SpectralField& u) { return std::pow(norm_x_pow6(u), 1.0 / 6.0); }

double norm(const SpectralField& u, NormKind which, double q) {
    switch (which) {
    case NormKind::H: return norm_h(u);
    case NormKind::V: return norm_v(u);
    case NormKind::Vprime: return norm_vprime(u);
    case NormKind::Lq: return norm_lq(u, q);
    case NormKind::X: return norm_x(u);
    }
    throw std::invalid_argument("unknown norm");
}

SpectralField apply_a_power(const SpectralField& u, double power) {
    SpectralField out = u;
    const SpectralSpace& sp = u.space();
    for (std::size_t ik = 0; ik < sp.num_wavevectors(); ++ik) {
        const double f = std::pow(sp.eigenvalue(ik), power);
        for (int j = 1; j <= 4; ++j) out.at(ik, j) *= f;
    }
    return out;
}

}  // namespace psns
