#include "doctest.h"

#include "psns/diagnostics.hpp"

#include <cmath>

using namespace psns;

namespace {

FieldSampler sampler_n(int n, double L = kTwoPi) {
    FieldSampler s;
    s.space = SpectralSpace::create(TorusGeometry::with_cutoff(n, L));
    return s;
}

const SigmaProfile prouse4 = SigmaProfile::prouse(0.5, 4.0, 2.0, 0.25, 0.25);

}  // namespace

TEST_CASE("certify registry") {
    const FieldSampler s = sampler_n(3);
    for (const std::string& name : certify_names()) {
        const InequalityReport r = certify(name, prouse4, s, 20, 9);
        INFO(name << " worst " << r.worst_margin);
        CHECK(r.pass);
        CHECK(r.samples == 20);
        CHECK(r.worst_sample.size() == s.space->dof());
        CHECK(r.worst_seed == derive_seed(9, r.worst_index));
    }
    CHECK_THROWS_WITH(certify("nope", prouse4, s, 5), doctest::Contains("unknown"));
    CHECK_THROWS(certify("lemma3", SigmaProfile::pure_power(0.1), s, 5));
    CHECK_THROWS(certify("lq_coercivity", SigmaProfile::linear(1.0), s, 5));
    CHECK(certify("lemma3_weak", SigmaProfile::pure_power(0.1), s, 20).pass);
    CHECK(certify("lq_coercivity", SigmaProfile::pure_power(0.1), s, 20).pass);
}

TEST_CASE("certify details") {
    const FieldSampler s = sampler_n(3);
    const InequalityReport tri = certify("trilinear_antisym", prouse4, s, 20);
    CHECK(tri.worst_margin >= -1e-10);
    CHECK(tri.worst_margin <= 0.0);

    // equality case: σ ≡ ν
    const InequalityReport lin = certify("lemma2", SigmaProfile::linear(0.7), s, 20);
    CHECK(lin.pass);
    CHECK(lin.worst_margin >= -1e-10);

    // growth makes Lemma 2 strict somewhere
    CHECK(certify("lemma2", prouse4, s, 20).worst_margin >= -1e-9);

    const InequalityReport emb = certify("embedding_X", prouse4, s, 30, 1);
    REQUIRE(emb.constant);
    CHECK(*emb.constant > 0.0);
    CHECK(emb.constant_name == "C_prime");
    CHECK(emb.worst_margin == doctest::Approx(0.0).epsilon(1e-12));
    const InequalityReport hx = certify("embedding_H_X", prouse4, s, 30, 1);
    REQUIRE(hx.constant);
    CHECK(*hx.constant > 0.0);

    const InequalityReport phi = certify("phi_integrability", prouse4, s, 30);
    REQUIRE(phi.constant);
    CHECK(*phi.constant <= prouse4.phi_integrability_constant());

    // identical seeds give identical reports, independent of the thread count
    const InequalityReport a = certify("lemma3", prouse4, s, 12, 4, 1), b = certify("lemma3", prouse4, s, 12, 4, 3);
    CHECK(a.worst_margin == b.worst_margin);
    CHECK(a.worst_index == b.worst_index);
}

TEST_CASE("product rule") {
    const FieldSampler s = sampler_n(3);
    Rng rng(2);
    const SpectralField u = s.draw(rng);
    CHECK(product_rule_residual(u, u.geometry().padded_size) <= 1e-10);
    // a grid too coarse for the cubic product aliases
    CHECK(product_rule_residual(u, u.geometry().grid_size) > 1e-6);
}

TEST_CASE("estimate_CB") {
    FieldSampler s = sampler_n(2);
    CHECK_THROWS(estimate_CB(s, 50, 0.5));
    const double cb = estimate_CB(s, 100, 0.5, 3);
    CHECK(cb >= 0.0);
    CHECK(std::isfinite(cb));
    // for tiny fields the ν/4 term dominates and every ratio clips to zero
    s.min_amplitude = s.max_amplitude = 1e-8;
    CHECK(estimate_CB(s, 100, 0.5) == 0.0);
}

TEST_CASE("contraction record on a hand-made pair") {
    CoupledRecord pr;
    pr.dt = 0.5;
    // three visited states; θ = 2·C_B·(l5_a + l5_b) + L_G = 2·1·(1 + 0) + 0.5 = 2.5 at every step
    for (int m = 0; m < 3; ++m) {
        DifferenceSample d;
        d.t = 0.5 * m;
        d.vprime_sq = 4.0 - m;
        d.h_sq = 2.0;
        d.l5_a = 1.0;
        d.drift_rate = -2.0;
        pr.diff.push_back(d);
    }
    const ContractionRecord r = contraction_record(pr, 1.0, 0.5, 0.1);
    REQUIRE(r.theta.size() == 3);
    CHECK(r.theta[0] == 2.5);
    CHECK(r.weighted[0] == 4.0);
    CHECK(r.weighted[1] == doctest::Approx(3.0 * std::exp(-1.25)));
    CHECK(r.weighted[2] == doctest::Approx(2.0 * std::exp(-2.5)));
    CHECK(r.dissipation[2] == doctest::Approx(0.1 * 2.0 * 0.5 * (1.0 + std::exp(-1.25))));
    // defect per step: −1 − 0.5·(−2) = 0
    CHECK(r.slack == 0.0);
    CHECK(r.initial == 4.0);
}

TEST_CASE("contraction test on coupled runs") {
    SimConfig c;
    c.geometry = TorusGeometry::with_cutoff(2);
    c.profile = prouse4;
    c.noise = default_forcing(0.2);
    c.dt = 2e-3;
    c.T = 0.02;
    const auto sp = SpectralSpace::create(c.geometry);
    std::vector<CoupledRecord> same, distinct;
    for (int i = 0; i < 4; ++i) {
        Rng rng(derive_seed(50, i));
        const auto u0 = random_initial_field(sp, rng, 2.0, 0.5).values();
        const auto w0 = random_initial_field(sp, rng, 2.0, 0.5).values();
        c.seed = i;
        same.push_back(run_coupled_pair(c, u0, u0));
        distinct.push_back(run_coupled_pair(c, u0, w0));
    }
    const ContractionVerdict z = contraction_test(same, 1.0, 0.0, c.profile.nu());
    CHECK(z.pass);
    CHECK(z.lhs.mean == 0.0);
    CHECK(z.rhs == 0.0);
    const ContractionVerdict d = contraction_test(distinct, 1.0, 0.0, c.profile.nu());
    CHECK(d.pass);
    CHECK(d.rhs > 0.0);
    CHECK(d.slack < 0.05);
    for (const auto& r : d.pairs)
        for (double w : r.weighted) CHECK(std::isfinite(w));
    distinct[1].diff.pop_back();
    CHECK_THROWS(contraction_test(distinct, 1.0, 0.0, 0.5));
}

TEST_CASE("moments, stationarity and drift") {
    SimConfig c;
    c.geometry = TorusGeometry::with_cutoff(2);
    c.profile = SigmaProfile::linear(1.0);
    c.dt = 1e-2;
    c.T = 0.1;
    c.initial.kind = InitialCondition::Kind::single_mode;
    c.initial.k = {1, 1, 0};
    c.initial.amplitude = 0.3;
    const Ensemble e = run_ensemble(c, 2);
    const EnsembleSummary s = mp1_moments(e.records, 2.0);
    CHECK(s.sup_h_pow.mean == doctest::Approx(0.09).epsilon(1e-14));
    CHECK(s.sup_h_pow.finite);
    CHECK_THROWS(mp1_moments(std::span<const TrajectoryRecord>{}));

    const double L = kTwoPi;
    const StationarityVerdict add = stationarity_condition(SigmaProfile::linear(0.3), L, 0.0);
    CHECK(add.holds);
    CHECK(add.margin == doctest::Approx(0.6));
    CHECK_FALSE(stationarity_condition(SigmaProfile::linear(0.3), L, 0.6).holds);
    CHECK_THROWS(stationarity_condition(SigmaProfile::pure_power(0.3), L, 0.0));
    CHECK(stationarity_condition(SigmaProfile::pure_power(0.3), L, 0.1, 1.0).margin == doctest::Approx(0.5));
    CHECK(burn_in_time(0.5, 2.0 * L) == doctest::Approx(40.0));

    std::vector<double> flat(100, 3.0), ramp(100), noise(400);
    for (int i = 0; i < 100; ++i) ramp[i] = i;
    Rng rng(1);
    std::normal_distribution<double> nd;
    for (double& x : noise) x = 1.0 + nd(rng);
    CHECK(window_drift_test(flat).pass);
    CHECK_FALSE(window_drift_test(ramp).pass);
    CHECK(window_drift_test(noise).z < 4.0);
    CHECK_THROWS(window_drift_test(std::vector<double>(5, 1.0)));
}

TEST_CASE("structure functions") {
    const double L = kTwoPi, a = 0.7;
    const auto sp = SpectralSpace::create(TorusGeometry::with_cutoff(2, L));
    SpectralField u(sp);
    u.at(*sp->find({1, 0, 0}), 1) = a;  // √2·a·e₃·cos x₁
    const std::vector<std::vector<double>> snaps{u.values()};
    const std::vector<double> lambdas{0.0, 0.3, 1.0, 2.5}, ps{1.0, 2.0, 3.0};
    const int m = 8;

    const auto along = structure_function(sp, snaps, {0, 1, 0}, lambdas, ps, m);
    for (const auto& row : along.S)
        for (const auto& e : row) CHECK(e.mean == doctest::Approx(0.0).epsilon(1e-14));

    const auto t = structure_function(sp, snaps, {1, 0, 0}, lambdas, ps, m);
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        for (std::size_t j = 0; j < ps.size(); ++j) {
            double oracle = 0.0;
            for (int q = 0; q < m; ++q) {
                const double x = L * q / m;
                oracle += std::pow(std::sqrt(2.0) * a * std::abs(std::cos(x + lambdas[i]) - std::cos(x)), ps[j]);
            }
            oracle /= m;
            CHECK(t.S[i][j].mean == doctest::Approx(oracle).epsilon(1e-12));
            CHECK(t.S[i][j].mean >= 0.0);
        }
    CHECK(t.S[0][1].mean == 0.0);
    CHECK_THROWS(structure_function(sp, snaps, {1, 0, 0}, std::vector<double>{L / 2}, ps));

    // base-point averaging with m ≥ 2n+1 is exact for p = 2, so a uniform shift changes nothing
    Rng rng(6);
    const std::vector<std::vector<double>> random{gaussian_field(sp, rng, 1.0).values(),
                                                  gaussian_field(sp, rng, 1.0).values()};
    const std::vector<double> two{2.0};
    const auto base = structure_function(sp, random, {1, 2, 0}, lambdas, two);
    const auto moved = structure_function(sp, random, {1, 2, 0}, lambdas, two, 0, {0.37, -1.1, 2.2});
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        CHECK(moved.S[i][0].mean == doctest::Approx(base.S[i][0].mean).epsilon(1e-12));
}

TEST_CASE("power-law fits") {
    StructureFunctionTable t;
    t.separations = {0.05, 0.1, 0.2, 0.4, 0.8};
    t.orders = {1.0, 2.0, 3.0, 6.0};
    t.S.resize(t.separations.size());
    for (std::size_t i = 0; i < t.separations.size(); ++i)
        for (double p : t.orders) t.S[i].push_back({2.0 * std::pow(t.separations[i], p / 3.0), 0.0, 1, true});
    for (const PowerLawFit& f : fit_power_law(t)) {
        CHECK(std::abs(f.zeta - f.p / 3.0) <= 1e-12);
        CHECK(f.k == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(f.residual <= 1e-12);
        CHECK(f.warnings.empty());
    }

    Rng rng(17);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    StructureFunctionTable noisy = t;
    for (auto& row : noisy.S)
        for (auto& e : row) e.mean *= 1.0 + jitter(rng);
    for (const PowerLawFit& f : fit_power_law(noisy)) CHECK(std::abs(f.zeta - f.p / 3.0) <= 0.05);

    StructureFunctionTable single = t;
    single.separations = {0.1};
    single.S = {t.S[1]};
    CHECK_THROWS(fit_power_law(single));

    StructureFunctionTable holes = t;
    holes.S[0][0].mean = 0.0;
    const auto f = fit_power_law(holes);
    CHECK(f[0].points == 4);
    CHECK_FALSE(f[0].warnings.empty());
}

TEST_CASE("scaling identity at lambda = 1") {
    SimConfig c;
    c.geometry = TorusGeometry::with_cutoff(2);
    c.profile = SigmaProfile::pure_power(0.5);
    c.noise = default_forcing(0.3);
    c.dt = 2e-3;
    c.T = 0.01;
    c.initial.kind = InitialCondition::Kind::random;
    const auto triples = run_scaled_ensemble(c, 1.0, 3);
    CHECK(transform_discrepancy(triples[0]) == 0.0);
    const std::vector<Vec3> psis{{1, 0, 0}, {0, 0, 1}};
    const std::vector<double> ps{2.0};
    const ScalingReport rep = scaling_identity_check(triples, {1, 0, 0}, psis, ps, 4);
    CHECK(rep.pass);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& r : rep.rows) {
        CHECK(r.base.mean == r.scaled.mean);
        CHECK(r.z == 0.0);
        CHECK(r.base.count == 3);
    }
    const PathwiseScaling ps1 = pathwise_scaling(triples[0], triples[1]);
    CHECK(ps1.coarse == 0.0);
    CHECK_FALSE(ps1.pass);
}

// The supremum of a ratio with a fifth-power tail: measured spreads between 10³-sample sets reach a
// factor of 2 to 8, so the 25% stability target is expected to fail and is kept visible here.
TEST_CASE("sampled C_B is stable across independent sample sets" * doctest::may_fail()) {
    const FieldSampler s = sampler_n(3);
    const double c1 = estimate_CB(s, 1000, 0.5, 1), c2 = estimate_CB(s, 1000, 0.5, 2);
    REQUIRE(c1 > 0.0);
    REQUIRE(std::isfinite(c2));
    CHECK(std::abs(c1 - c2) / std::max(c1, c2) <= 0.25);
}

TEST_CASE("a larger C_B only lowers the contraction functional") {
    SimConfig c;
    c.geometry = TorusGeometry::with_cutoff(2);
    c.profile = prouse4;
    c.noise = default_forcing(0.2);
    c.dt = 2e-3;
    c.T = 0.05;
    const auto sp = SpectralSpace::create(c.geometry);
    Rng rng(3);
    const auto a = random_initial_field(sp, rng, 2.0, 1.0).values();
    const auto b = random_initial_field(sp, rng, 2.0, 1.0).values();
    const CoupledRecord pair = run_coupled_pair(c, a, b);
    double last = contraction_record(pair, 0.0, 0.0, 0.5).functional();
    for (double cb : {1e-3, 1e-2, 1e-1, 1.0}) {
        const double f = contraction_record(pair, cb, 0.0, 0.5).functional();
        CHECK(f <= last);
        last = f;
    }
}

TEST_CASE("moment estimates do not increase with the viscosity") {
    SimConfig c;
    c.geometry = TorusGeometry::with_cutoff(3);
    c.noise = default_forcing(0.3);
    c.initial.kind = InitialCondition::Kind::random;
    c.dt = 2e-3;
    c.T = 0.3;
    c.seed = 4;
    std::vector<EnsembleSummary> s;
    for (double nu : {0.5, 1.0}) {
        c.profile = SigmaProfile::prouse(nu, 4.0, 2.0, 0.25, 0.25);
        s.push_back(mp1_moments(run_ensemble(c, 16).records));
    }
    auto no_increase = [](const MomentEstimate& lo, const MomentEstimate& hi) {
        return hi.mean - lo.mean <= 3.0 * std::hypot(lo.stderr_, hi.stderr_);
    };
    CHECK(no_increase(s[0].sup_h_pow, s[1].sup_h_pow));
    CHECK(no_increase(s[0].int_v, s[1].int_v));
    CHECK(no_increase(s[0].int_lq, s[1].int_lq));
    CHECK(s[1].int_v.mean < s[0].int_v.mean);
}
