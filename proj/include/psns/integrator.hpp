#pragma once

#include "psns/dynamics.hpp"
#include "psns/stochastic.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace psns {

enum class Scheme { explicit_em, semi_implicit_em };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct InitialCondition {
    enum class Kind { zero, single_mode, prescribed, random };
    Kind kind = Kind::zero;
    Lattice k{1, 0, 0};       ///< single_mode
    int j = 1;                ///< single_mode
    double amplitude = 0.0;   ///< single_mode
    std::vector<double> coeffs;  ///< prescribed
    double decay = 2.0;       ///< random: spectral decay exponent s
    double bound = 1.0;       ///< random: |u₀|_H ≤ bound

    SpectralField build(const SpacePtr& space, std::uint64_t seed) const;
};

std::string to_string(InitialCondition::Kind k);
InitialCondition::Kind initial_kind_from_string(const std::string& name);

struct SimConfig {
    TorusGeometry geometry = TorusGeometry::with_cutoff(8);
    SigmaProfile profile = SigmaProfile::linear(1.0);
    NoiseSpec noise;
    double dt = 1e-3;
    double T = 1.0;
    Scheme scheme = Scheme::semi_implicit_em;
    std::optional<double> R;          ///< stopping threshold on |u|²_H
    std::uint64_t seed = 0;
    InitialCondition initial;
    std::optional<double> nu0;        ///< semi-implicit floor; defaults to profile.nu()
    double stability_c = 0.5;
    bool override_stability = false;
    std::size_t snapshot_every = 0;   ///< 0: first and last state only
    bool keep_snapshot_coeffs = true;

    double floor() const { return nu0.value_or(profile.nu()); }
    std::size_t num_steps() const;
    /// Throws std::invalid_argument on inconsistent settings, including the explicit stability screen.
    void validate() const;
};

/// Seed of the increment stream of a trajectory and of its random initial condition.
std::uint64_t noise_seed(std::uint64_t seed);
std::uint64_t initial_seed(std::uint64_t seed);

/// Quantities evaluated at a state on the padded grid during a step.
struct StateNorms {
    double energy = 0.0;     ///< |u|²_H
    double enstrophy = 0.0;  ///< ‖u‖²_V
    double lq_pow = 0.0;     ///< |u|^{1+b}_{L^{1+b}}
    double l5_pow = 0.0;     ///< |u|⁵_{L⁵}
};

/// One time step. Keeps the binding of the noise modes and the exact linear factors.
class Stepper {
public:
    Stepper(const SimConfig& config, SpacePtr space);

    const SpacePtr& space() const { return space_; }
    /// u_{m+1} from u_m and the increments Δβ (one per active noise mode).
    /// When `norms` is given it receives the grid norms of u_m; when `drift` is given it
    /// receives the full drift −π_nAΦ(u_m) − π_nB(u_m,u_m).
    SpectralField step(const SpectralField& u, std::span<const double> incr, StateNorms* norms = nullptr,
                       SpectralField* drift = nullptr) const;
    StateNorms norms(const SpectralField& u) const;

private:
    const SimConfig* config_;
    SpacePtr space_;
    std::vector<std::size_t> binding_;
    std::vector<double> decay_;  ///< e^{−ν₀λ_k dt} per coefficient
};

/// step() without a persistent Stepper.
SpectralField step(const SpectralField& u, const SimConfig& config, std::span<const double> incr);

struct StepSample {
    double t = 0.0;
    StateNorms norms;
};

struct Snapshot {
    double t = 0.0;
    std::size_t step = 0;
    std::vector<double> coeffs;
    double h = 0.0;
    double v = 0.0;
    double l1b = 0.0;  ///< |u|_{L^{1+b}}
    double x = std::numeric_limits<double>::quiet_NaN();  ///< |u|_X, pure power only
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::uint64_t config_digest = 0;
    std::vector<StepSample> series;   ///< every visited state
    std::vector<Snapshot> snapshots;
    bool stopped = false;
    double stop_time = 0.0;
    double stop_overshoot = 0.0;      ///< |u|²_H − R at the first crossing
    bool blown_up = false;
    std::string failure;
    double sup_energy = 0.0;          ///< sup |u|²_H over visited states
    double int_enstrophy = 0.0;       ///< Σ dt‖u_m‖²_V
    double int_lq = 0.0;              ///< Σ dt|u_m|^{1+b}_{L^{1+b}}
    std::vector<double> final_coeffs;
    double final_time = 0.0;

    bool completed() const { return !blown_up && failure.empty(); }
};

/// State needed to continue a run exactly.
struct SimState {
    std::vector<double> coeffs;
    double t = 0.0;
    std::size_t step = 0;
    std::string rng_state;
};

/// Source of increments: fills `out` with the increments of step `s`.
using IncrementSource = std::function<void(std::size_t s, std::span<double> out)>;

struct RunOptions {
    std::optional<SimState> resume;
    std::size_t checkpoint_every = 0;
    std::function<void(const SimState&)> on_checkpoint;
    /// Replaces the live noise stream (stored paths for coupled and scaled runs).
    IncrementSource increments;
    std::optional<std::vector<double>> initial_override;
};

TrajectoryRecord run_trajectory(const SimConfig& config, const RunOptions& options = {});

struct MomentEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t count = 0;
    bool finite = true;
};

struct EnsembleSummary {
    double p = 2.0;
    MomentEstimate sup_h_pow;  ///< E sup_t |u|^p_H
    MomentEstimate int_v;      ///< E ∫‖u‖²_V dt
    MomentEstimate int_lq;     ///< E ∫|u|^{1+b}_{L^{1+b}} dt
    std::size_t members = 0;
    std::size_t completed = 0;
    std::size_t stopped = 0;
    std::vector<std::string> failures;
};

MomentEstimate estimate_mean(std::span<const double> samples);
EnsembleSummary summarize(std::span<const TrajectoryRecord> records, double p = 2.0);

struct Ensemble {
    std::vector<TrajectoryRecord> records;
    EnsembleSummary summary;
};

/// Member i uses seed derive_seed(config.seed, i), except that M = 1 runs config.seed itself. Members run on `threads` workers;
/// results and the summary do not depend on the thread count.
Ensemble run_ensemble(const SimConfig& config, std::size_t M, unsigned threads = 1, double p = 2.0);

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Per-step data of a coupled pair, evaluated at the state before each step.
struct DifferenceSample {
    double t = 0.0;
    double vprime_sq = 0.0;   ///< |v|²_{V′}
    double h_sq = 0.0;        ///< |v|²_H
    double l5_a = 0.0;        ///< |u¹|⁵_{L⁵}
    double l5_b = 0.0;        ///< |u²|⁵_{L⁵}
    double drift_rate = 0.0;  ///< 2⟨drift(u¹) − drift(u²), A⁻¹v⟩ + ‖A^{−1/2}(G(u¹) − G(u²))‖²_HS
    double martingale = 0.0;  ///< 2⟨A⁻¹v, (G(u¹) − G(u²))Δβ⟩
};

struct CoupledRecord {
    TrajectoryRecord a;
    TrajectoryRecord b;
    std::vector<DifferenceSample> diff;  ///< one per visited state (the last has no step terms)
    std::vector<double> final_difference;
    double dt = 0.0;
};

/// Two trajectories driven by identical increments from different initial data.
CoupledRecord run_coupled_pair(const SimConfig& config, const std::vector<double>& u0a, const std::vector<double>& u0b,
                               const IncrementSource& increments = {});

struct ScaledTriple {
    double lambda = 1.0;
    double dt = 0.0;       ///< step of the scaled system; the base uses λ^{2/3}·dt
    TrajectoryRecord base;         ///< (i) on [0,L]³
    TrajectoryRecord transformed;  ///< (ii) λ^{−1/3}u(λ^{2/3}t, λx) on [0,L/λ]³
    TrajectoryRecord scaled;       ///< (iii) scaled system on [0,L/λ]³
    TorusGeometry base_geometry;
    TorusGeometry scaled_geometry;
};

/// λ must equal 1/m for an integer 1 ≤ m ≤ 4 and the profile must be the pure power law.
/// The master path has step λ^{2/3}·config.dt unless one is supplied (its step must match).
ScaledTriple run_scaled_pair(const SimConfig& config, double lambda, const BrownianPath* master = nullptr);

/// M scaled triples; member i uses seed derive_seed(config.seed, i).
std::vector<ScaledTriple> run_scaled_ensemble(const SimConfig& config, double lambda, std::size_t M,
                                              unsigned threads = 1);

}  // namespace psns
