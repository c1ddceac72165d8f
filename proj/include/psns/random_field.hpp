#pragma once

#include "psns/torus_spectral.hpp"

#include <cstdint>
#include <random>

namespace psns {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives well-separated seeds from a base seed and an index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Gaussian coefficients with standard deviation |k|^{−decay}, unscaled.
SpectralField gaussian_field(const SpacePtr& space, Rng& rng, double decay);

/// Random initial law: gaussian_field rescaled onto the ball |u|_H ≤ bound when it falls outside.
SpectralField random_initial_field(const SpacePtr& space, Rng& rng, double decay, double bound);

/// Sampler for inequality certification: spectral shape from gaussian_field, H-norm drawn
/// log-uniformly in [min_amplitude, max_amplitude] so that both the linear and the growth
/// regimes of σ are visited.
struct FieldSampler {
    SpacePtr space;
    double decay = 2.0;
    double min_amplitude = 1e-2;
    double max_amplitude = 4.0;

    SpectralField draw(Rng& rng) const;
};

}  // namespace psns
