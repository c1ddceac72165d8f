#pragma once

#include "psns/integrator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace psns {

/// Result of checking one inequality over random samples.
/// Margins are normalized, (lhs − rhs)/scale, so that pass ⇔ worst_margin ≥ −tolerance.
struct InequalityReport {
    std::string name;
    std::size_t samples = 0;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::optional<double> constant;   ///< empirical constant where the inequality defines one
    std::string constant_name;
    std::size_t worst_index = 0;      ///< trial index of the worst sample
    std::uint64_t worst_seed = 0;     ///< replay: sampler draws with Rng(worst_seed)
    std::vector<double> worst_sample; ///< coefficients of the first field of the worst trial
    std::string note;
};

/// Registered names, in reporting order.
const std::vector<std::string>& certify_names();

/// Evaluates the named inequality on `trials` draws; trial i uses Rng(derive_seed(seed, i)).
/// Throws std::invalid_argument for unknown names and for profiles the inequality does not cover.
InequalityReport certify(const std::string& name, const SigmaProfile& profile, const FieldSampler& sampler,
                         std::size_t trials, std::uint64_t seed = 1, unsigned threads = 1);

/// Sampled supremum of (|⟨B(u,v),A⁻¹v⟩| − ν/4|v|²_H)₊ / (|u|⁵_{L⁵}|v|²_{V′}) over both argument orders.
double estimate_CB(const FieldSampler& sampler, std::size_t trials, double nu, std::uint64_t seed = 1,
                   unsigned threads = 1);

/// Max over grid points of |∂ᵢ(|u|²u) − |u|²∂ᵢu − 2u(u·∂ᵢu)| relative to the largest term,
/// with the left side differentiated spectrally on an N³ grid.
double product_rule_residual(const SpectralField& u, int N);

/// Weighted difference functional along one coupled pair.
struct ContractionRecord {
    std::vector<double> times;
    std::vector<double> theta;        ///< θ_m = 2C_B(|u¹_m|⁵_{L⁵} + |u²_m|⁵_{L⁵}) + L_G
    std::vector<double> weighted;     ///< e^{−Θ_m}|v_m|²_{V′}, Θ_m = Σ_{i<m} θ_i dt
    std::vector<double> dissipation;  ///< ν Σ_{i<m} e^{−Θ_i}|v_i|²_H dt
    double initial = 0.0;             ///< |v₀|²_{V′}
    double slack = 0.0;               ///< Σ e^{−Θ_m}|defect_m| / |v₀|²_{V′}
    double functional() const { return weighted.empty() ? 0.0 : weighted.back() + dissipation.back(); }
};

ContractionRecord contraction_record(const CoupledRecord& pair, double C_B, double L_G, double nu);

struct ContractionVerdict {
    std::vector<ContractionRecord> pairs;
    MomentEstimate lhs;       ///< E[e^{−Θ_N}|v_N|²_{V′} + νΣe^{−Θ}|v|²_H dt]
    double rhs = 0.0;         ///< E|v₀|²_{V′}
    double tolerance = 0.05;
    double slack = 0.0;       ///< mean per-pair slack
    double max_mean_increment = 0.0;  ///< largest ensemble-mean one-step increase of the functional, relative to rhs
    bool pass = true;
};

/// E[lhs] ≤ rhs·(1 + tolerance); identical data give lhs = rhs = 0 and pass.
ContractionVerdict contraction_test(std::span<const CoupledRecord> pairs, double C_B, double L_G, double nu,
                                    double tolerance = 0.05);

/// Moment estimates over an ensemble; throws if empty.
EnsembleSummary mp1_moments(std::span<const TrajectoryRecord> records, double p = 2.0);

struct StationarityVerdict {
    bool holds = false;
    double margin = 0.0;
    std::string condition;
};

/// Sufficient condition for a stationary law: 2ν(2π/L)² > λ₀, or 2νC_X > λ₀ for the pure power law.
StationarityVerdict stationarity_condition(const SigmaProfile& profile, double L, double lambda0,
                                           std::optional<double> C_X = std::nullopt);

/// 5/(νλ₁).
double burn_in_time(double nu, double L);

struct DriftTest {
    MomentEstimate first;
    MomentEstimate second;
    double relative_drift = 0.0;
    double z = 0.0;  ///< |mean₁ − mean₂| / combined standard error
    bool pass = false;
};

/// Two-window comparison of a stationary series; window errors from `batches` batch means each.
DriftTest window_drift_test(std::span<const double> values, std::size_t batches = 10);

/// Time average of ⟨AΦ(u),u⟩_H over snapshots (the mean dissipation ε).
double mean_energy_production(const SpacePtr& space, std::span<const std::vector<double>> snapshots,
                              const SigmaProfile& profile);

struct StructureFunctionTable {
    Vec3 direction{1, 0, 0};
    std::vector<double> separations;
    std::vector<double> orders;
    std::vector<std::vector<MomentEstimate>> S;  ///< S[i][j] at separations[i], orders[j]
    std::size_t samples = 0;
    std::size_t base_points = 0;
};

/// Monte-Carlo S_p(λ) = E|u(x₀+λe) − u(x₀)|^p, averaged per snapshot over an m³ grid of base points
/// shifted by `offset`; m defaults to the geometry's grid size. Separation 0 gives S = 0.
StructureFunctionTable structure_function(const SpacePtr& space, std::span<const std::vector<double>> snapshots,
                                          Vec3 direction, std::span<const double> separations,
                                          std::span<const double> orders, int base_points = 0,
                                          Vec3 offset = {0, 0, 0});

struct PowerLawFit {
    double p = 0.0;
    double zeta = 0.0;
    double zeta_stderr = 0.0;
    double k = 0.0;
    double residual = 0.0;  ///< rms of log-residuals
    double reference = 0.0; ///< p/3, reported only
    std::size_t points = 0;
    std::vector<std::string> warnings;
};

/// Least squares of log S_p against log λ for each order; throws when fewer than two positive points remain.
std::vector<PowerLawFit> fit_power_law(const StructureFunctionTable& table);

/// Largest H distance between the transformed and the scaled records over matched snapshots.
double transform_discrepancy(const ScaledTriple& triple);

struct PathwiseScaling {
    double coarse = 0.0;
    double fine = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

/// (a) of the scaling identity: discrepancy at dt and dt/2; pass when the ratio is 2 ± 30%.
PathwiseScaling pathwise_scaling(const ScaledTriple& coarse, const ScaledTriple& fine, double band = 0.3);

struct MomentIdentityRow {
    Vec3 psi;
    double p = 2.0;
    MomentEstimate base;    ///< E|⟨u(t,λe) − u(t,0), ψ⟩|^p
    MomentEstimate scaled;  ///< λ^{p/3}E|⟨u_λ(λ^{−2/3}t,e) − u_λ(λ^{−2/3}t,0), ψ⟩|^p
    double z = 0.0;
    bool pass = false;
};

struct ScalingReport {
    double lambda = 1.0;
    std::vector<MomentIdentityRow> rows;
    bool pass = true;
};

/// (b) of the scaling identity over an ensemble of triples at their final time, base points averaged
/// over an m³ grid (m defaults to the grid size). Pass when every row agrees within `z_max` combined errors.
ScalingReport scaling_identity_check(std::span<const ScaledTriple> ensemble, Vec3 e, std::span<const Vec3> psis,
                                     std::span<const double> orders, int base_points = 0, double z_max = 3.0);

}  // namespace psns
