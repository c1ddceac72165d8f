#pragma once

#include "psns/integrator.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace psns {

/// Schema or hypothesis violation; the message starts with the JSON path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CertifyPlan {
    std::vector<std::string> names;  ///< default: every check that covers the profile
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    double decay = 2.0;
    double min_amplitude = 1e-2;
    double max_amplitude = 4.0;
};

struct UniquenessPlan {
    std::size_t pairs = 32;
    double initial_bound = 0.5;
    double tolerance = 0.05;
    std::size_t cb_trials = 1000;
    std::optional<double> C_B;  ///< skips the sampled estimate when given
};

struct ScalingPlan {
    double lambda = 0.5;
    std::size_t ensemble = 16;
    Vec3 point{1, 0, 0};
    std::vector<Vec3> psi{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<double> orders{2.0};
    int base_points = 0;
};

struct StructurePlan {
    Vec3 direction{1, 0, 0};
    std::vector<double> separations;  ///< default: L·{1/40, 1/20, 1/10, 1/5, 2/5}
    std::vector<double> orders{1, 2, 3, 4, 5, 6};
    int base_points = 0;
    double burn_in = 0.0;             ///< default 5/(νλ₁)
    double window = 0.0;              ///< averaging time after burn-in; default equals burn_in
    std::size_t sample_every = 10;    ///< steps between stationary snapshots
    std::size_t batches = 10;
};

struct DiagnosticsPlan {
    std::size_t ensemble_size = 16;
    double moment_p = 2.0;
    std::size_t checkpoint_every = 0;
    CertifyPlan certify;
    UniquenessPlan uniqueness;
    ScalingPlan scaling;
    StructurePlan structure;
};

struct RunConfig {
    SimConfig sim;
    DiagnosticsPlan plan;
};

/// Parses and validates a configuration document; every default is filled in explicitly.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);

/// Full configuration with all defaults; parse_config(echo_config(c)) reproduces c.
nlohmann::json echo_config(const RunConfig& config);

/// FNV-1a 64 of the compact echoed document.
std::uint64_t config_digest(const RunConfig& config);

}  // namespace psns
