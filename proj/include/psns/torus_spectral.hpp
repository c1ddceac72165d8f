#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace psns {

using Vec3 = std::array<double, 3>;
using Lattice = std::array<int, 3>;
using Complex = std::complex<double>;
using CVec3 = std::array<Complex, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// True iff k lies in Z³₊ = {k₁>0} ∪ {k₁=0,k₂>0} ∪ {k₁=0,k₂=0,k₃>0}.
bool half_space_contains(const Lattice& k);

inline int norm_sq(const Lattice& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

/// A nonzero lattice vector in the half-space Z³₊.
class WaveIndex {
public:
    explicit WaveIndex(const Lattice& k);

    const Lattice& k() const { return k_; }
    int norm_sq() const { return psns::norm_sq(k_); }

    auto operator<=>(const WaveIndex&) const = default;

private:
    Lattice k_;
};

/// One basis direction h_{k,j}: j = 1,2 are cosines, j = 3,4 sines (polarizations v₁, v₂).
struct Mode {
    WaveIndex k;
    int j;

    Mode(WaveIndex wave, int polarization);
    auto operator<=>(const Mode&) const = default;
};

/// (2π/L)² |k|².
double eigenvalue(const WaveIndex& k, double L);

/// Orthonormal pair spanning the plane orthogonal to k.
/// v₁ = normalize(k × e) for the first axis e not parallel to k, v₂ = normalize(k × v₁).
std::pair<Vec3, Vec3> basis_pair(const Lattice& k);

/// h_{k,j}(x) under the volume-averaged inner product (prefactor √2).
Vec3 evaluate_mode(const WaveIndex& k, int j, const Vec3& x, double L);

/// Smallest integer ≥ n whose prime factors are all in {2,3,5,7}.
int fft_friendly_size(int n);

struct TorusGeometry {
    double L = kTwoPi;
    int n = 8;           ///< Galerkin cutoff: modes with |k| ≤ n
    int grid_size = 0;   ///< base grid per axis, ≥ 2n+1
    int padded_size = 0; ///< quadrature / Φ grid per axis, ≥ 3(2n+1)

    /// Geometry with default grids: grid_size = 2n+2, padded_size ≥ 3(2n+1).
    static TorusGeometry with_cutoff(int n, double L = kTwoPi);

    /// Grid for quadratic products (3/2 rule on 2n+1).
    int quadratic_size() const;

    /// Throws std::invalid_argument when a grid cannot resolve the retained modes.
    void validate() const;

    bool same_space(const TorusGeometry& other) const { return L == other.L && n == other.n; }
    bool operator==(const TorusGeometry&) const = default;
};

/// Enumerated retained modes of H_n with their polarization vectors and eigenvalues.
/// Wavevectors are stored in lexicographic (k₁,k₂,k₃) order; coefficient (ik, j) lives at 4·ik + j − 1.
class SpectralSpace {
public:
    static std::shared_ptr<const SpectralSpace> create(const TorusGeometry& geometry);

    const TorusGeometry& geometry() const { return geometry_; }
    double L() const { return geometry_.L; }
    int cutoff() const { return geometry_.n; }

    std::size_t num_wavevectors() const { return waves_.size(); }
    std::size_t dof() const { return 4 * waves_.size(); }

    const Lattice& wavevector(std::size_t ik) const { return waves_[ik]; }
    const Vec3& v1(std::size_t ik) const { return v1_[ik]; }
    const Vec3& v2(std::size_t ik) const { return v2_[ik]; }
    double eigenvalue(std::size_t ik) const { return lambda_[ik]; }
    /// Eigenvalue of the first shell, (2π/L)².
    double first_eigenvalue() const;
    double max_eigenvalue() const;

    std::span<const Lattice> wavevectors() const { return waves_; }

    std::optional<std::size_t> find(const Lattice& k) const;
    static std::size_t coefficient_index(std::size_t ik, int j) { return 4 * ik + static_cast<std::size_t>(j - 1); }

private:
    explicit SpectralSpace(const TorusGeometry& geometry);

    TorusGeometry geometry_;
    std::vector<Lattice> waves_;
    std::vector<Vec3> v1_;
    std::vector<Vec3> v2_;
    std::vector<double> lambda_;
};

using SpacePtr = std::shared_ptr<const SpectralSpace>;

/// Truncated divergence-free field as real coefficients a_{k,j}.
class SpectralField {
public:
    explicit SpectralField(SpacePtr space);
    SpectralField(SpacePtr space, std::vector<double> coeffs);

    const SpectralSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const TorusGeometry& geometry() const { return space_->geometry(); }

    std::span<double> coeffs() { return coeffs_; }
    std::span<const double> coeffs() const { return coeffs_; }
    const std::vector<double>& values() const { return coeffs_; }

    double& at(std::size_t ik, int j) { return coeffs_[SpectralSpace::coefficient_index(ik, j)]; }
    double at(std::size_t ik, int j) const { return coeffs_[SpectralSpace::coefficient_index(ik, j)]; }

    /// Complex Fourier coefficient û_k for the stored half-space wavevector.
    CVec3 fourier(std::size_t ik) const;
    /// Inverse of fourier(); the component of û along k is discarded.
    void set_fourier(std::size_t ik, const CVec3& uhat);

    bool is_finite() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);
    /// this += s·other
    SpectralField& axpy(double s, const SpectralField& other);

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

private:
    void require_same_space(const SpectralField& other) const;

    SpacePtr space_;
    std::vector<double> coeffs_;
};

/// Velocity sampled on the uniform grid x_i = i·L/N; component arrays are row-major (x₁ slowest).
struct PhysicalField {
    double L = kTwoPi;
    int N = 0;
    std::array<std::vector<double>, 3> comp;

    PhysicalField() = default;
    PhysicalField(double side, int points);

    std::size_t size() const { return comp[0].size(); }
    std::size_t index(int i0, int i1, int i2) const {
        return (static_cast<std::size_t>(i0) * N + i1) * N + i2;
    }
    Vec3 at(std::size_t p) const { return {comp[0][p], comp[1][p], comp[2][p]}; }
    Vec3 point(int i0, int i1, int i2) const;
};

/// Removes the component of each û_k along k; the k = 0 entry (if given) is zeroed.
void leray_project(std::span<CVec3> uhat, std::span<const Lattice> wavevectors);

/// Direct summation Σ a_{k,j} h_{k,j}(x).
std::vector<Vec3> synthesize(const SpectralField& u, std::span<const Vec3> points);

/// Evaluate the truncated field on an N³ grid (N ≥ 2n+1).
PhysicalField transform_to_grid(const SpectralField& u, int N);

/// ∂_i u_j on an N³ grid; result[i].comp[j].
std::array<PhysicalField, 3> gradient_to_grid(const SpectralField& u, int N);

/// Leray projection and truncation to the retained modes of `space`.
SpectralField transform_to_spectral(const PhysicalField& g, const SpacePtr& space);

/// Same as transform_to_spectral but each wavevector's output is scaled by weight[ik].
SpectralField transform_to_spectral_weighted(const PhysicalField& g, const SpacePtr& space,
                                             std::span<const double> weight);

/// Raw Fourier coefficients of a grid field at the retained wavevectors (no projection).
std::vector<CVec3> fourier_coefficients(const PhysicalField& g, const SpectralSpace& space);

enum class NormKind { H, V, Vprime, Lq, X };

double inner_h(const SpectralField& a, const SpectralField& b);
double norm_h(const SpectralField& u);
double norm_v(const SpectralField& u);
double norm_vprime(const SpectralField& u);
/// Volume average of |u|^q on the padded grid.
double mean_abs_pow(const SpectralField& u, double q);
double mean_abs_pow(const PhysicalField& g, double q);
double norm_lq(const SpectralField& u, double q);
/// |u|_X⁶ = (1/L³)∫ |u|⁴|∇u|² + 4|u|² Σ_i (u·∂_i u)².
double norm_x_pow6(const SpectralField& u);
double norm_x(const SpectralField& u);
double norm(const SpectralField& u, NormKind which, double q = 2.0);

/// u with each mode scaled by λ_k^power (A^power u).
SpectralField apply_a_power(const SpectralField& u, double power);

}  // namespace psns
