#pragma once

#include "psns/random_field.hpp"
#include "psns/torus_spectral.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace psns {

enum class NoiseKind { additive, diagonal_multiplicative };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseMode {
    Lattice k;
    int j = 1;
    double sigma = 0.0;
};

/// Built-in multiplicative law a/(1+|a|).
double default_mult_gain(double a);

/// Active mode set Λ with coefficients σ_{k,j} and the growth/Lipschitz certificates
/// (λ₀, ρ) and L_G. Modes keep the order they were given in; increments are indexed the same way.
class NoiseSpec {
public:
    NoiseSpec() = default;
    static NoiseSpec additive(std::vector<NoiseMode> modes);
    /// Certificates start at ρ = Σσ², λ₀ = 0, L_G = max σ²; refine with certify_multiplicative.
    static NoiseSpec multiplicative(std::vector<NoiseMode> modes,
                                    std::function<double(double)> gain = default_mult_gain);

    NoiseKind kind() const { return kind_; }
    const std::vector<NoiseMode>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }
    double gain(double a) const { return gain_ ? gain_(a) : default_mult_gain(a); }

    double lambda0() const { return lambda0_; }
    double rho() const { return rho_; }
    double lipschitz() const { return lipschitz_; }
    double sum_sigma_sq() const;

    /// Sampled suprema for λ₀ and L_G over random fields; replaces the stored certificates.
    void certify_multiplicative(const SpacePtr& space, Rng& rng, int samples);

    /// Coefficient index of every active mode in `space`; throws if a mode is not retained.
    std::vector<std::size_t> bind(const SpectralSpace& space) const;

    /// Same modes with every σ multiplied by `factor`.
    NoiseSpec scaled(double factor) const;

private:
    void validate() const;

    NoiseKind kind_ = NoiseKind::additive;
    std::vector<NoiseMode> modes_;
    std::function<double(double)> gain_;
    double lambda0_ = 0.0;
    double rho_ = 0.0;
    double lipschitz_ = 0.0;
};

/// Additive noise on the shells 1 ≤ |k|² ≤ 4, every polarization, uniform σ.
NoiseSpec default_forcing(double sigma = 0.2);

/// Gaussian increment generator for one trajectory. The full generator state
/// (engine and normal distribution) can be saved and restored.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed = 0);

    /// One N(0, dt) increment per active mode.
    std::vector<double> sample_increments(std::size_t modes, double dt);
    void sample_increments(double dt, std::span<double> out);

    std::string save_state() const;
    void load_state(const std::string& blob);

private:
    Rng engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// G(u)Δβ: additive Σσ Δβ h_{k,j}; multiplicative coefficient (k,j) += σ·gain(a_{k,j})·Δβ.
SpectralField apply_G(const NoiseSpec& spec, const SpectralField& u, std::span<const double> incr);
/// Adds G(u)Δβ into `target` using a precomputed binding.
void add_G(const NoiseSpec& spec, std::span<const std::size_t> binding, const SpectralField& u,
           std::span<const double> incr, SpectralField& target);

/// ‖G(u)‖²_HS.
double hs_norm_squared(const NoiseSpec& spec, const SpectralField& u);

/// ‖A^{−1/2}[G(v) − G(z)]‖²_HS.
double hs_difference_vprime(const NoiseSpec& spec, const SpectralField& v, const SpectralField& z);

/// (1/L³) Σ σ².
double energy_injection_rate(const NoiseSpec& spec, double L);

struct SymmetryReport {
    bool pass = true;
    std::vector<std::string> violations;
};

/// Cosine coefficients (j = 1,2) matched in absolute value by the sine coefficient of the same
/// polarization (j = 3,4) at every active k.
SymmetryReport homogeneity_check(const NoiseSpec& spec, double tol = 1e-12);

/// The 24 proper rotations of the cube as integer matrices.
const std::vector<std::array<Lattice, 3>>& cube_rotations();

/// Λ closed under every cube rotation (θk folded back into Z³₊) with matching |σ|,
/// polarization index kept.
SymmetryReport isotropy_check(const NoiseSpec& spec, double tol = 1e-12);

/// Per-mode Brownian increments on a uniform time grid; increments[step·modes + m].
struct BrownianPath {
    double dt = 0.0;
    std::size_t modes = 0;
    std::uint64_t seed = 0;
    std::vector<double> increments;

    static BrownianPath generate(std::size_t modes, double dt, std::size_t steps, std::uint64_t seed);

    std::size_t steps() const { return modes == 0 ? 0 : increments.size() / modes; }
    std::span<const double> step(std::size_t s) const { return {increments.data() + s * modes, modes}; }
    /// Path value β(s·dt) for mode m.
    double value(std::size_t s, std::size_t m) const;
    /// Sums `factor` consecutive increments: the same path on a grid of step factor·dt.
    BrownianPath coarsen(std::size_t factor) const;
};

/// β^λ(t) = λ^{−1/3}β(λ^{2/3}t) sampled with step dt_target, assembled from the fine increments.
/// λ^{2/3}·dt_target must be a positive integer multiple of path.dt.
BrownianPath rescaled_path(const BrownianPath& path, double lambda, double dt_target);

}  // namespace psns
