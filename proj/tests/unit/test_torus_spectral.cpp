#include "doctest.h"

#include "psns/random_field.hpp"
#include "psns/torus_spectral.hpp"

#include <cmath>

using namespace psns;

namespace {

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

SpacePtr space_n(int n, double L = kTwoPi) { return SpectralSpace::create(TorusGeometry::with_cutoff(n, L)); }

double rel_diff(const SpectralField& a, const SpectralField& b) { return norm_h(a - b) / norm_h(b); }

}  // namespace

TEST_CASE("half-space membership") {
    CHECK(half_space_contains({0, 0, 1}));
    CHECK_FALSE(half_space_contains({0, -1, 3}));
    CHECK(half_space_contains({2, -5, 0}));
    CHECK_FALSE(half_space_contains({0, 0, 0}));
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int c = -3; c <= 3; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                CHECK(half_space_contains({a, b, c}) != half_space_contains({-a, -b, -c}));
            }
    CHECK_THROWS(WaveIndex({0, -1, 0}));
}

TEST_CASE("eigenvalues") {
    CHECK(eigenvalue(WaveIndex({1, 0, 0}), kTwoPi) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eigenvalue(WaveIndex({1, 2, 2}), kTwoPi) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(eigenvalue(WaveIndex({1, 0, 0}), std::numbers::pi) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("basis pair") {
    // Golden value: k × e₂ = (0,0,1), then k × v₁ = (0,−1,0).
    auto [v1, v2] = basis_pair({1, 0, 0});
    CHECK(v1 == Vec3{0, 0, 1});
    CHECK(v2[0] == 0.0);
    CHECK(v2[1] == -1.0);
    CHECK(v2[2] == 0.0);

    for (const Lattice& k : {Lattice{0, 0, 1}, Lattice{3, -2, 5}, Lattice{1, 1, 1}, Lattice{0, 4, -1}}) {
        auto [a, b] = basis_pair(k);
        const Vec3 kv{double(k[0]), double(k[1]), double(k[2])};
        CHECK(std::abs(dot3(a, kv)) < 1e-14);
        CHECK(std::abs(dot3(b, kv)) < 1e-14);
        CHECK(std::abs(dot3(a, b)) < 1e-15);
        CHECK(dot3(a, a) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(dot3(b, b) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK_THROWS(basis_pair({0, 0, 0}));
}

TEST_CASE("evaluate_mode") {
    const WaveIndex k({1, 2, 0});
    const auto [v1, v2] = basis_pair(k.k());
    const Vec3 h1 = evaluate_mode(k, 1, {0, 0, 0}, kTwoPi);
    for (int c = 0; c < 3; ++c) CHECK(h1[c] == doctest::Approx(std::sqrt(2.0) * v1[c]));
    CHECK(evaluate_mode(k, 3, {0, 0, 0}, kTwoPi) == Vec3{0, 0, 0});
    const Vec3 x{0.3, 1.1, 2.7};
    const Vec3 a = evaluate_mode(k, 4, x, 3.0);
    const Vec3 b = evaluate_mode(k, 4, {x[0] + 3.0, x[1], x[2]}, 3.0);
    for (int c = 0; c < 3; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
}

TEST_CASE("mode count pairs k with -k") {
    for (int n : {1, 2, 5, 8}) {
        int lattice = 0;
        for (int a = -n; a <= n; ++a)
            for (int b = -n; b <= n; ++b)
                for (int c = -n; c <= n; ++c)
                    if (a * a + b * b + c * c <= n * n && (a || b || c)) ++lattice;
        const auto sp = space_n(n);
        CHECK(2 * sp->num_wavevectors() == std::size_t(lattice));
        CHECK(sp->dof() == 4 * sp->num_wavevectors());
    }
    CHECK(space_n(1)->num_wavevectors() == 3);
}

TEST_CASE("geometry validation") {
    TorusGeometry g = TorusGeometry::with_cutoff(8);
    CHECK(g.grid_size == 18);
    CHECK(g.padded_size >= 51);
    g.grid_size = 16;
    CHECK_THROWS(g.validate());
    CHECK(fft_friendly_size(51) == 54);
    CHECK(fft_friendly_size(11) == 12);
}

TEST_CASE("synthesize matches the grid transform and single modes") {
    const auto sp = space_n(4, 2.5);
    Rng rng(7);
    const SpectralField u = gaussian_field(sp, rng, 1.0);
    const int N = sp->geometry().grid_size;
    const PhysicalField g = transform_to_grid(u, N);
    std::vector<Vec3> pts;
    std::vector<std::size_t> idx;
    for (int i0 = 0; i0 < N; i0 += 3)
        for (int i1 = 0; i1 < N; i1 += 2)
            for (int i2 = 0; i2 < N; i2 += 5) {
                pts.push_back(g.point(i0, i1, i2));
                idx.push_back(g.index(i0, i1, i2));
            }
    const auto vals = synthesize(u, pts);
    double err = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (int c = 0; c < 3; ++c) {
            err = std::max(err, std::abs(vals[p][c] - g.comp[c][idx[p]]));
            scale = std::max(scale, std::abs(vals[p][c]));
        }
    CHECK(err <= 1e-12 * scale);

    SpectralField single(sp);
    const std::size_t ik = *sp->find({1, -1, 2});
    single.at(ik, 3) = 0.7;
    const Vec3 x{0.4, 1.9, 0.1};
    const Vec3 s = synthesize(single, std::span<const Vec3>(&x, 1))[0];
    const Vec3 h = evaluate_mode(WaveIndex({1, -1, 2}), 3, x, 2.5);
    for (int c = 0; c < 3; ++c) CHECK(s[c] == doctest::Approx(0.7 * h[c]).epsilon(1e-13));

    const PhysicalField gs = transform_to_grid(single, N);
    for (std::size_t p = 0; p < gs.size(); p += 97) {
        const int i2 = int(p % N), i1 = int((p / N) % N), i0 = int(p / (std::size_t(N) * N));
        const Vec3 hp = evaluate_mode(WaveIndex({1, -1, 2}), 3, gs.point(i0, i1, i2), 2.5);
        for (int c = 0; c < 3; ++c) CHECK(gs.comp[c][p] == doctest::Approx(0.7 * hp[c]).epsilon(1e-12).scale(1.0));
    }

    const SpectralField zero(sp);
    const PhysicalField gz = transform_to_grid(zero, N);
    for (int c = 0; c < 3; ++c)
        for (double v : gz.comp[c]) CHECK(v == 0.0);
}

TEST_CASE("grid round trip") {
    for (int n : {1, 3, 8}) {
        const auto sp = space_n(n);
        Rng rng(11 + n);
        for (int trial = 0; trial < 5; ++trial) {
            const SpectralField u = gaussian_field(sp, rng, 0.5);
            for (int N : {2 * n + 2, sp->geometry().padded_size, sp->geometry().quadratic_size()}) {
                const SpectralField back = transform_to_spectral(transform_to_grid(u, N), sp);
                CHECK(rel_diff(back, u) <= 1e-12);
            }
        }
    }
    const auto sp = space_n(4);
    CHECK_THROWS(transform_to_grid(SpectralField(sp), 8));
}

TEST_CASE("transform_to_spectral projects") {
    const auto sp = space_n(3);
    const int N = 12;
    PhysicalField grad(kTwoPi, N), constant(kTwoPi, N);
    for (int i0 = 0; i0 < N; ++i0)
        for (int i1 = 0; i1 < N; ++i1)
            for (int i2 = 0; i2 < N; ++i2) {
                const Vec3 x = grad.point(i0, i1, i2);
                const std::size_t p = grad.index(i0, i1, i2);
                // φ = sin(x₁ + 2x₂) + cos(3x₃), ∇φ
                const double c = std::cos(x[0] + 2 * x[1]);
                grad.comp[0][p] = c;
                grad.comp[1][p] = 2 * c;
                grad.comp[2][p] = -3 * std::sin(3 * x[2]);
                for (int k = 0; k < 3; ++k) constant.comp[k][p] = 1.5 + k;
            }
    CHECK(norm_h(transform_to_spectral(grad, sp)) < 1e-13);
    CHECK(norm_h(transform_to_spectral(constant, sp)) < 1e-13);

    Rng rng(3);
    const SpectralField u = gaussian_field(sp, rng, 1.0);
    const SpectralField once = transform_to_spectral(transform_to_grid(u, N), sp);
    const SpectralField twice = transform_to_spectral(transform_to_grid(once, N), sp);
    CHECK(rel_diff(twice, once) <= 1e-13);
}

TEST_CASE("leray projection") {
    const std::vector<Lattice> ks{{1, 2, 3}, {0, 1, -1}, {0, 0, 0}};
    std::vector<CVec3> u{CVec3{Complex(2, 1), Complex(4, 2), Complex(6, 3)},   // parallel to k
                         CVec3{Complex(1, 0), Complex(0, 5), Complex(0, 5)},   // orthogonal to k
                         CVec3{Complex(1, 1), Complex(1, 1), Complex(1, 1)}};
    leray_project(u, ks);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(u[0][c]) < 1e-14);
    CHECK(u[1][0] == Complex(1, 0));
    CHECK(std::abs(u[1][1] - Complex(0, 5)) < 1e-14);
    for (int c = 0; c < 3; ++c) CHECK(u[2][c] == Complex(0, 0));

    // k + w with w ⊥ k → w
    const Lattice k{2, -1, 1};
    const CVec3 w{Complex(1, -2), Complex(2, 1), Complex(0, 5)};  // 2·1 − 2 + 0 = 0; 2·(−2) −1 + 5 = 0
    std::vector<CVec3> kw{CVec3{w[0] + 2.0, w[1] - 1.0, w[2] + 1.0}};
    leray_project(kw, std::vector<Lattice>{k});
    for (int c = 0; c < 3; ++c) CHECK(std::abs(kw[0][c] - w[c]) < 1e-14);

    // idempotence and symmetry of the projection on random data
    Rng rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Lattice> many;
    std::vector<CVec3> f, h;
    for (int i = 0; i < 50; ++i) {
        many.push_back({int(i % 5) + 1, int(i % 3) - 1, int(i % 7) - 3});
        f.push_back({Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))});
        h.push_back({Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))});
    }
    auto pf = f, ph = h;
    leray_project(pf, many);
    leray_project(ph, many);
    auto ppf = pf;
    leray_project(ppf, many);
    Complex lhs{}, rhs{};
    for (std::size_t i = 0; i < f.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            CHECK(std::abs(ppf[i][c] - pf[i][c]) < 1e-13);
            lhs += std::conj(pf[i][c]) * h[i][c];
            rhs += std::conj(f[i][c]) * ph[i][c];
        }
    CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("norms") {
    const auto sp = space_n(4);
    SpectralField single(sp);
    const std::size_t ik = *sp->find({1, 1, 0});
    single.at(ik, 2) = -1.5;
    CHECK(norm_h(single) == doctest::Approx(1.5));
    CHECK(norm_v(single) == doctest::Approx(std::sqrt(2.0) * 1.5));
    CHECK(norm_v(single) * norm_v(single) == doctest::Approx(2.0 * norm_h(single) * norm_h(single)));
    CHECK(norm(single, NormKind::Vprime) == doctest::Approx(1.5 / std::sqrt(2.0)));

    const SpectralField zero(sp);
    for (NormKind k : {NormKind::H, NormKind::V, NormKind::Vprime, NormKind::Lq, NormKind::X})
        CHECK(norm(zero, k, 3.0) == 0.0);

    for (double L : {kTwoPi, 1.0, 7.0}) {
        const auto s = space_n(5, L);
        Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            const SpectralField u = gaussian_field(s, rng, 1.5);
            const double h = norm_h(u), v = norm_v(u), vp = norm_vprime(u);
            const double c = kTwoPi / L;
            CHECK(norm_lq(u, 2.0) == doctest::Approx(h).epsilon(1e-10));
            CHECK(v * v >= c * c * h * h * (1 - 1e-12));                // Poincaré
            CHECK(vp <= h / c * (1 + 1e-12));                           // V′ ≤ (L/2π) H
            CHECK(h / c <= v / (c * c) * (1 + 1e-12));                   // (L/2π) H ≤ (L/2π)² V
            CHECK(norm_x(u) > 0.0);
        }
    }
}

TEST_CASE("first-shell fields attain Poincaré equality") {
    const auto sp = space_n(3);
    SpectralField u(sp);
    u.at(*sp->find({1, 0, 0}), 1) = 0.3;
    u.at(*sp->find({0, 0, 1}), 4) = -1.2;
    CHECK(norm_v(u) * norm_v(u) == doctest::Approx(norm_h(u) * norm_h(u)).epsilon(1e-14));
    u.at(*sp->find({1, 1, 0}), 1) = 0.1;
    CHECK(norm_v(u) * norm_v(u) > norm_h(u) * norm_h(u) * (1 + 1e-6));
}

TEST_CASE("X norm of a single mode against a direct quadrature") {
    // u = a·h_{k,1} with k = e₁: u = √2 a cos(x₁) v₁, |u|² = 2a²cos², |∇u|² = 2a² sin², u·∂_i u = 0 for i ≠ 1
    // and u·∂₁u = −2a² cos sin. Integrand: 8a⁶cos⁴sin² + 4·2a²cos²·4a⁴cos²sin² = 40 a⁶ cos⁴ sin².
    // The mean of cos⁴ sin² over a period is 1/16.
    const auto sp = space_n(2);
    SpectralField u(sp);
    const double a = 0.8;
    u.at(*sp->find({1, 0, 0}), 1) = a;
    CHECK(norm_x_pow6(u) == doctest::Approx(40.0 * std::pow(a, 6) / 16.0).epsilon(1e-12));
    // |u|⁶_{L⁶} = 8a⁶·mean(cos⁶) = 8a⁶·5/16
    CHECK(mean_abs_pow(u, 6.0) == doctest::Approx(8.0 * std::pow(a, 6) * 5.0 / 16.0).epsilon(1e-12));
}
