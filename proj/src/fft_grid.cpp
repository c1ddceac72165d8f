#include "psns/fft_grid.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace psns::fft {
namespace {

struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

// FFTW planning is not thread-safe; execution of an existing plan on new arrays is.
std::mutex g_plan_mutex;

const Plans& plans_for(int N) {
    static std::map<int, Plans> cache;
    std::lock_guard lock(g_plan_mutex);
    auto it = cache.find(N);
    if (it != cache.end()) return it->second;

    std::vector<double> real(static_cast<std::size_t>(N) * N * N);
    std::vector<std::complex<double>> spec(half_spectrum_size(N));
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    // ESTIMATE + UNALIGNED: the chosen codelets do not depend on timing or buffer alignment.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.r2c = fftw_plan_dft_r2c_3d(N, N, N, real.data(), cspec, flags);
    p.c2r = fftw_plan_dft_c2r_3d(N, N, N, cspec, real.data(), flags);
    if (!p.r2c || !p.c2r) throw std::runtime_error("FFTW planning failed");
    return cache.emplace(N, p).first->second;
}

}  // namespace

void inverse(int N, std::vector<std::complex<double>>& spectrum, std::vector<double>& out) {
    const Plans& p = plans_for(N);
    out.resize(static_cast<std::size_t>(N) * N * N);
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
}

void forward(int N, const std::vector<double>& in, std::vector<std::complex<double>>& spectrum) {
    const Plans& p = plans_for(N);
    spectrum.resize(half_spectrum_size(N));
    // r2c does not modify its input for out-of-place transforms.
    fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(spectrum.data()));
}

}  // namespace psns::fft
