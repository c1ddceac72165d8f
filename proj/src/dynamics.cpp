#include "psns/dynamics.hpp"

#include "psns/fft_grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace psns {

std::string to_string(SigmaKind kind) { return kind == SigmaKind::prouse ? "prouse" : "pure_power"; }

SigmaKind sigma_kind_from_string(const std::string& name) {
    if (name == "prouse") return SigmaKind::prouse;
    if (name == "pure_power") return SigmaKind::pure_power;
    throw std::invalid_argument("unknown sigma profile kind '" + name + "'");
}

SigmaProfile SigmaProfile::prouse(double nu, double b, double K, double a1, double a2) {
    SigmaProfile p;
    p.kind_ = SigmaKind::prouse;
    p.nu_ = nu;
    p.b_ = b;
    p.K_ = K;
    p.a1_ = a1;
    p.a2_ = a2;
    p.validate();
    return p;
}

SigmaProfile SigmaProfile::linear(double nu) {
    SigmaProfile p;
    p.kind_ = SigmaKind::prouse;
    p.nu_ = nu;
    p.growth_ = false;
    p.validate();
    return p;
}

SigmaProfile SigmaProfile::pure_power(double nu) {
    SigmaProfile p;
    p.kind_ = SigmaKind::pure_power;
    p.nu_ = nu;
    p.b_ = 5.0;
    p.K_ = 0.0;
    p.a1_ = p.a2_ = nu;
    p.validate();
    return p;
}

SigmaProfile SigmaProfile::custom(double nu, double b, double K, double a1, double a2,
                                  std::function<double(double)> sigma) {
    SigmaProfile p;
    p.kind_ = SigmaKind::prouse;
    p.nu_ = nu;
    p.b_ = b;
    p.K_ = K;
    p.a1_ = a1;
    p.a2_ = a2;
    p.custom_ = std::move(sigma);
    p.validate();
    return p;
}

double SigmaProfile::builtin_sigma(double xi) const {
    if (kind_ == SigmaKind::pure_power) {
        const double x2 = xi * xi;
        return nu_ * x2 * x2;
    }
    if (!growth_ || xi <= 0.5 * K_) return nu_;
    if (xi >= K_) return a1_ * std::pow(xi, b_ - 1.0);
    // Cubic Hermite joint on [K/2, K]: σ(K/2) = ν, σ'(K/2) = 0, σ(K) = a₁K^{b−1}, σ'(K) = a₁(b−1)K^{b−2}.
    const double h = 0.5 * K_;
    const double t = (xi - h) / h;
    const double p1 = a1_ * std::pow(K_, b_ - 1.0);
    const double m1 = a1_ * (b_ - 1.0) * std::pow(K_, b_ - 2.0);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * nu_ + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * h * m1;
}

double SigmaProfile::sigma(double xi) const {
    if (!(xi >= 0.0)) throw std::invalid_argument("sigma: argument must be >= 0");
    return custom_ ? custom_(xi) : builtin_sigma(xi);
}

void SigmaProfile::validate() const {
    if (!(nu_ > 0.0)) throw std::invalid_argument("profile: nu must be > 0");
    if (kind_ == SigmaKind::pure_power) return;
    if (!growth_) return;
    if (!(b_ >= 4.0)) throw std::invalid_argument("profile: hypothesis b >= 4 violated (b = " + std::to_string(b_) + ")");
    if (!(K_ > 0.0)) throw std::invalid_argument("profile: K must be > 0");
    if (!(a1_ > 0.0) || !(a2_ >= a1_))
        throw std::invalid_argument("profile: hypothesis 0 < a1 <= a2 violated");

    // Sampled check of sigma >= nu, sigma' >= 0 and the growth envelope beyond K.
    const double lo = 1e-6 * K_, hi = 1e3 * K_;
    const int samples = 4000;
    double prev = sigma(0.0);
    if (prev < nu_) throw std::invalid_argument("profile: hypothesis sigma(0) >= nu violated");
    for (int i = 0; i <= samples; ++i) {
        const double xi = lo * std::pow(hi / lo, double(i) / samples);
        const double s = sigma(xi);
        if (!std::isfinite(s)) throw std::invalid_argument("profile: sigma is not finite at xi = " + std::to_string(xi));
        if (s < nu_ * (1.0 - 1e-12))
            throw std::invalid_argument("profile: hypothesis sigma >= nu violated at xi = " + std::to_string(xi));
        if (s < prev * (1.0 - 1e-12))
            throw std::invalid_argument("profile: hypothesis sigma' >= 0 violated near xi = " + std::to_string(xi));
        if (xi > K_) {
            const double env = std::pow(xi, b_ - 1.0);
            if (s < a1_ * env * (1.0 - 1e-12) || s > a2_ * env * (1.0 + 1e-12))
                throw std::invalid_argument("profile: envelope a1 xi^(b-1) <= sigma <= a2 xi^(b-1) violated at xi = " +
                                            std::to_string(xi));
        }
        prev = s;
    }
}

double SigmaProfile::phi_integrability_constant() const {
    const double e = 1.0 + 1.0 / b_;
    if (kind_ == SigmaKind::pure_power) return std::pow(nu_, e);
    if (!growth_) return std::pow(nu_, e);
    // |Φ|^{1+1/b} ≤ (σ(K)K)^{1+1/b} on [0,K] (σ nondecreasing) and ≤ a₂^{1+1/b} ξ^{1+b} beyond K.
    return std::max(std::pow(sigma(K_) * K_, e), std::pow(a2_, e));
}

bool SigmaProfile::operator==(const SigmaProfile& o) const {
    return kind_ == o.kind_ && nu_ == o.nu_ && b_ == o.b_ && K_ == o.K_ && a1_ == o.a1_ && a2_ == o.a2_ &&
           growth_ == o.growth_ && !custom_ && !o.custom_;
}

PhysicalField phi_apply(const SigmaProfile& p, const PhysicalField& g, double shift) {
    PhysicalField out(g.L, g.N);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = std::sqrt(g.comp[0][i] * g.comp[0][i] + g.comp[1][i] * g.comp[1][i] +
                                   g.comp[2][i] * g.comp[2][i]);
        const double f = p.sigma(m) - shift;
        for (int c = 0; c < 3; ++c) out.comp[c][i] = f * g.comp[c][i];
    }
    return out;
}

SpectralField a_phi(const SpectralField& u, const SigmaProfile& p, double shift, const GridObserver& observe) {
    const SpectralSpace& sp = u.space();
    const PhysicalField g = transform_to_grid(u, u.geometry().padded_size);
    if (observe) observe(g);
    const PhysicalField phi = phi_apply(p, g, shift);
    std::vector<double> lambda(sp.num_wavevectors());
    for (std::size_t ik = 0; ik < lambda.size(); ++ik) lambda[ik] = sp.eigenvalue(ik);
    return transform_to_spectral_weighted(phi, u.space_ptr(), lambda);
}

SpectralField b_bilinear(const SpectralField& u, const SpectralField& v) {
    if (!u.geometry().same_space(v.geometry()))
        throw std::invalid_argument("b_bilinear: geometry mismatch");
    const int N = u.geometry().quadratic_size();
    const PhysicalField ug = transform_to_grid(u, N);
    const auto grad = gradient_to_grid(v, N);
    PhysicalField w(ug.L, N);
    for (std::size_t p = 0; p < ug.size(); ++p)
        for (int j = 0; j < 3; ++j)
            w.comp[j][p] = ug.comp[0][p] * grad[0].comp[j][p] + ug.comp[1][p] * grad[1].comp[j][p] +
                           ug.comp[2][p] * grad[2].comp[j][p];
    return transform_to_spectral(w, u.space_ptr());
}

SpectralField galerkin_drift(const SpectralField& u, const SigmaProfile& p) {
    SpectralField d = a_phi(u, p);
    d += b_bilinear(u, u);
    d *= -1.0;
    return d;
}

namespace {

double grid_dot_mean(const PhysicalField& a, const PhysicalField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a.comp[0][i] * b.comp[0][i] + a.comp[1][i] * b.comp[1][i] + a.comp[2][i] * b.comp[2][i];
    return s / double(a.size());
}

}  // namespace

double energy_production(const SpectralField& u, const SigmaProfile& p) {
    const int N = u.geometry().padded_size;
    const PhysicalField phi = phi_apply(p, transform_to_grid(u, N));
    const PhysicalField au = transform_to_grid(apply_a_power(u, 1.0), N);
    return grid_dot_mean(phi, au);
}

double monotonicity_pairing(const SpectralField& u1, const SpectralField& u2, const SigmaProfile& p) {
    if (!u1.geometry().same_space(u2.geometry()))
        throw std::invalid_argument("monotonicity_pairing: geometry mismatch");
    const int N = u1.geometry().padded_size;
    const PhysicalField g1 = transform_to_grid(u1, N);
    const PhysicalField g2 = transform_to_grid(u2, N);
    const PhysicalField f1 = phi_apply(p, g1);
    const PhysicalField f2 = phi_apply(p, g2);
    double s = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i)
        for (int c = 0; c < 3; ++c) s += (f1.comp[c][i] - f2.comp[c][i]) * (g1.comp[c][i] - g2.comp[c][i]);
    return s / double(g1.size());
}

double phi_pairing(const SpectralField& u, const SigmaProfile& p) {
    const PhysicalField g = transform_to_grid(u, u.geometry().padded_size);
    return grid_dot_mean(phi_apply(p, g), g);
}

double phi_integrability_lhs(const SpectralField& u, const SigmaProfile& p) {
    const PhysicalField g = transform_to_grid(u, u.geometry().padded_size);
    return mean_abs_pow(phi_apply(p, g), 1.0 + 1.0 / p.b());
}

double truncation_discrepancy(const SpectralField& u, const SigmaProfile& p) {
    const int N = u.geometry().padded_size;
    const int n = u.space().cutoff();
    const PhysicalField phi = phi_apply(p, transform_to_grid(u, N));
    const double scale = kTwoPi / u.geometry().L;
    std::array<std::vector<Complex>, 3> spec;
    for (int c = 0; c < 3; ++c) fft::forward(N, phi.comp[c], spec[c]);
    const double norm = 1.0 / (double(N) * N * N);
    double inside = 0.0, outside = 0.0;
    const int half = N / 2 + 1;
    for (int i0 = 0; i0 < N; ++i0)
        for (int i1 = 0; i1 < N; ++i1)
            for (int i2 = 0; i2 < half; ++i2) {
                const Lattice k{i0 <= N / 2 ? i0 : i0 - N, i1 <= N / 2 ? i1 : i1 - N, i2};
                const int k2 = norm_sq(k);
                if (k2 == 0) continue;
                CVec3 z;
                for (int c = 0; c < 3; ++c) z[c] = spec[c][fft::half_spectrum_index(N, i0, i1, i2)] * norm;
                const Complex kz = double(k[0]) * z[0] + double(k[1]) * z[1] + double(k[2]) * z[2];
                double mag2 = 0.0;
                for (int c = 0; c < 3; ++c) mag2 += std::norm(z[c] - double(k[c]) * kz / double(k2));
                // Entries with 0 < k₃ < N/2 stand for both k and −k.
                const double mult = (i2 == 0 || (N % 2 == 0 && i2 == N / 2)) ? 1.0 : 2.0;
                const double lam = scale * scale * k2;
                const double contrib = mult * lam * lam * mag2;
                (k2 <= n * n ? inside : outside) += contrib;
            }
    const double total = inside + outside;
    return total > 0.0 ? std::sqrt(outside / total) : 0.0;
}

}  // namespace psns
