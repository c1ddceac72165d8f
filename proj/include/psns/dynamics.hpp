#pragma once

#include "psns/torus_spectral.hpp"

#include <functional>
#include <string>

namespace psns {

enum class SigmaKind { prouse, pure_power };

std::string to_string(SigmaKind kind);
SigmaKind sigma_kind_from_string(const std::string& name);

/// Viscosity law σ(·) of Φ(u) = σ(|u|) u.
///
/// The built-in prouse profile equals ν on [0, K/2], follows a₁ξ^{b−1} on [K, ∞) and is
/// joined on [K/2, K] by the cubic Hermite interpolant matching value and slope at both
/// ends, so it is C¹. With `growth` disabled the profile is the constant ν (linear Φ).
/// Every profile is checked at construction by sampling σ on a logarithmic grid.
class SigmaProfile {
public:
    static SigmaProfile prouse(double nu, double b, double K, double a1, double a2);
    static SigmaProfile linear(double nu);
    static SigmaProfile pure_power(double nu);
    /// User-supplied σ with the prouse envelope parameters it claims to satisfy.
    static SigmaProfile custom(double nu, double b, double K, double a1, double a2,
                               std::function<double(double)> sigma);

    SigmaKind kind() const { return kind_; }
    double nu() const { return nu_; }
    /// Growth exponent; 5 for the pure power law.
    double b() const { return b_; }
    double K() const { return K_; }
    double a1() const { return a1_; }
    double a2() const { return a2_; }
    bool growth() const { return growth_; }
    bool is_custom() const { return static_cast<bool>(custom_); }
    /// σ ≡ ν.
    bool is_linear() const { return kind_ == SigmaKind::prouse && !growth_; }

    double sigma(double xi) const;
    /// Constant in |Φ(u)|^{1+1/b}_{L^{1+1/b}} ≤ C_Φ(1 + |u|^{1+b}_{L^{1+b}}), from the envelope.
    double phi_integrability_constant() const;

    bool operator==(const SigmaProfile& other) const;

private:
    SigmaProfile() = default;
    double builtin_sigma(double xi) const;
    void validate() const;

    SigmaKind kind_ = SigmaKind::prouse;
    double nu_ = 1.0;
    double b_ = 4.0;
    double K_ = 1.0;
    double a1_ = 1.0;
    double a2_ = 1.0;
    bool growth_ = true;
    std::function<double(double)> custom_;
};

/// Pointwise Φ(u(x)) − shift·u(x).
PhysicalField phi_apply(const SigmaProfile& p, const PhysicalField& g, double shift = 0.0);

/// Observer invoked with the padded-grid image of u during a_phi.
using GridObserver = std::function<void(const PhysicalField&)>;

/// π_n A(Φ(u) − shift·u), evaluated on the padded grid then Leray-projected and truncated.
SpectralField a_phi(const SpectralField& u, const SigmaProfile& p, double shift = 0.0,
                    const GridObserver& observe = {});

/// π_n B(u,v) = π_n P[(u·∇)v], dealiased on the 3/2 grid.
SpectralField b_bilinear(const SpectralField& u, const SpectralField& v);

/// −π_n AΦ(u) − π_n B(u,u).
SpectralField galerkin_drift(const SpectralField& u, const SigmaProfile& p);

/// ⟨AΦ(u), u⟩_H as the padded-grid quadrature of Φ(u)·Au.
double energy_production(const SpectralField& u, const SigmaProfile& p);

/// (1/L³)∫ [Φ(u¹) − Φ(u²)]·[u¹ − u²] dx on the padded grid.
double monotonicity_pairing(const SpectralField& u1, const SpectralField& u2, const SigmaProfile& p);

/// ⟨Φ(u), u⟩_H on the padded grid.
double phi_pairing(const SpectralField& u, const SigmaProfile& p);

/// |Φ(u)|^{1+1/b}_{L^{1+1/b}} (power, not norm) on the padded grid.
double phi_integrability_lhs(const SpectralField& u, const SigmaProfile& p);

/// |A(I − π_n)PΦ(u)|_H / |A P Φ(u)|_H over the modes the padded grid resolves.
/// Zero when Φ maps H_n into itself (linear σ).
double truncation_discrepancy(const SpectralField& u, const SigmaProfile& p);

}  // namespace psns
