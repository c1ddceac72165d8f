#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace psns::fft {

/// Number of complex entries in the half-spectrum of an N³ real grid.
inline std::size_t half_spectrum_size(int N) {
    return static_cast<std::size_t>(N) * N * (N / 2 + 1);
}

inline std::size_t half_spectrum_index(int N, int i0, int i1, int i2) {
    return (static_cast<std::size_t>(i0) * N + i1) * (N / 2 + 1) + i2;
}

/// Unnormalized complex-to-real transform; `spectrum` is overwritten.
void inverse(int N, std::vector<std::complex<double>>& spectrum, std::vector<double>& out);

/// Unnormalized real-to-complex transform.
void forward(int N, const std::vector<double>& in, std::vector<std::complex<double>>& spectrum);

}  // namespace psns::fft
