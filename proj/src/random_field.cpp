#include "psns/random_field.hpp"

#include <cmath>
#include <stdexcept>

namespace psns {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SpectralField gaussian_field(const SpacePtr& space, Rng& rng, double decay) {
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectralField u(space);
    for (std::size_t ik = 0; ik < space->num_wavevectors(); ++ik) {
        const double sd = std::pow(double(norm_sq(space->wavevector(ik))), -0.5 * decay);
        for (int j = 1; j <= 4; ++j) u.at(ik, j) = sd * normal(rng);
    }
    return u;
}

SpectralField random_initial_field(const SpacePtr& space, Rng& rng, double decay, double bound) {
    if (!(bound >= 0.0)) throw std::invalid_argument("initial field bound must be >= 0");
    SpectralField u = gaussian_field(space, rng, decay);
    const double h = norm_h(u);
    if (h > bound) u *= bound / h;
    return u;
}

SpectralField FieldSampler::draw(Rng& rng) const {
    if (!(min_amplitude > 0.0) || !(max_amplitude >= min_amplitude))
        throw std::invalid_argument("sampler amplitude range must satisfy 0 < min <= max");
    SpectralField u = gaussian_field(space, rng, decay);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double amp = min_amplitude * std::pow(max_amplitude / min_amplitude, unit(rng));
    const double h = norm_h(u);
    if (h > 0.0) u *= amp / h;
    return u;
}

}  // namespace psns
