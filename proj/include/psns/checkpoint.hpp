#pragma once

#include "psns/integrator.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace psns {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary state: "PSNS", u32 version, u32 n, f64 L, u32 count, count × f64 coefficients,
/// u32 length + rng blob, f64 time. All little-endian; coefficients in lexicographic (k, j) order.
struct Checkpoint {
    int n = 0;
    double L = 0.0;
    std::vector<double> coeffs;
    std::string rng_state;
    double t = 0.0;

    static Checkpoint from_state(const TorusGeometry& g, const SimState& s);
    /// Step index is recovered as round(t/dt); the run records t = step·dt exactly.
    SimState to_state(double dt) const;
    /// Throws CheckpointError when n, L or the coefficient count disagree with `g`.
    void check_geometry(const TorusGeometry& g) const;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::string& bytes);

/// Atomic (temporary file + rename).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace psns
