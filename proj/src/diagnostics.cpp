#include "psns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace psns {

ContractionRecord contraction_record(const CoupledRecord& pair, double C_B, double L_G, double nu) {
    ContractionRecord r;
    const auto& d = pair.diff;
    if (d.empty()) return r;
    const double dt = pair.dt;
    r.initial = d.front().vprime_sq;
    double Theta = 0.0, diss = 0.0, signed_defect = 0.0;
    for (std::size_t m = 0; m < d.size(); ++m) {
        const double w = std::exp(-Theta);
        r.times.push_back(d[m].t);
        r.theta.push_back(2.0 * C_B * (d[m].l5_a + d[m].l5_b) + L_G);
        r.weighted.push_back(w * d[m].vprime_sq);
        r.dissipation.push_back(diss);
        if (m + 1 < d.size()) {
            const double defect = d[m + 1].vprime_sq - d[m].vprime_sq - dt * d[m].drift_rate - d[m].martingale;
            signed_defect += w * defect;
            diss += nu * w * d[m].h_sq * dt;
            Theta += r.theta.back() * dt;
        }
    }
    r.slack = r.initial > 0.0 ? std::abs(signed_defect) / r.initial : 0.0;
    return r;
}

ContractionVerdict contraction_test(std::span<const CoupledRecord> pairs, double C_B, double L_G, double nu,
                                    double tolerance) {
    if (pairs.empty()) throw std::invalid_argument("contraction_test needs at least one pair");
    ContractionVerdict v;
    v.tolerance = tolerance;
    const std::size_t len = pairs.front().diff.size();
    for (const CoupledRecord& p : pairs) {
        if (p.dt != pairs.front().dt || p.diff.size() != len)
            throw std::invalid_argument("contraction_test: pairs differ in step or length");
        v.pairs.push_back(contraction_record(p, C_B, L_G, nu));
    }
    std::vector<double> lhs;
    double rhs = 0.0, slack = 0.0;
    for (const auto& r : v.pairs) {
        lhs.push_back(r.functional());
        rhs += r.initial;
        slack += r.slack;
    }
    v.lhs = estimate_mean(lhs);
    v.rhs = rhs / double(pairs.size());
    v.slack = slack / double(pairs.size());
    for (std::size_t m = 0; m + 1 < len; ++m) {
        double inc = 0.0;
        for (const auto& r : v.pairs)
            inc += (r.weighted[m + 1] + r.dissipation[m + 1]) - (r.weighted[m] + r.dissipation[m]);
        inc /= double(pairs.size());
        if (v.rhs > 0.0) v.max_mean_increment = std::max(v.max_mean_increment, inc / v.rhs);
    }
    v.pass = v.lhs.finite && std::isfinite(v.lhs.mean) && v.lhs.mean <= v.rhs * (1.0 + tolerance);
    return v;
}

EnsembleSummary mp1_moments(std::span<const TrajectoryRecord> records, double p) {
    if (records.empty()) throw std::invalid_argument("mp1_moments needs a nonempty ensemble");
    return summarize(records, p);
}

StationarityVerdict stationarity_condition(const SigmaProfile& profile, double L, double lambda0,
                                           std::optional<double> C_X) {
    StationarityVerdict v;
    if (profile.kind() == SigmaKind::pure_power) {
        if (!C_X) throw std::invalid_argument("the pure power condition needs a sampled C_X");
        v.margin = 2.0 * profile.nu() * *C_X - lambda0;
        v.condition = "2*nu*C_X > lambda0";
    } else {
        const double k1 = kTwoPi / L;
        v.margin = 2.0 * profile.nu() * k1 * k1 - lambda0;
        v.condition = "2*nu*(2*pi/L)^2 > lambda0";
    }
    v.holds = v.margin > 0.0;
    return v;
}

double burn_in_time(double nu, double L) {
    const double k1 = kTwoPi / L;
    return 5.0 / (nu * k1 * k1);
}

DriftTest window_drift_test(std::span<const double> values, std::size_t batches) {
    if (batches < 2 || values.size() < 2 * batches)
        throw std::invalid_argument("window_drift_test needs at least two batches per window");
    const std::size_t half = values.size() / 2;
    auto batch_means = [batches](std::span<const double> w) {
        std::vector<double> out;
        const std::size_t size = w.size() / batches;
        for (std::size_t b = 0; b < batches; ++b) {
            double s = 0.0;
            for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += w[i];
            out.push_back(s / double(size));
        }
        return estimate_mean(out);
    };
    DriftTest t;
    t.first = batch_means(values.subspan(0, half));
    t.second = batch_means(values.subspan(half, half));
    const double gap = std::abs(t.first.mean - t.second.mean);
    const double se = std::hypot(t.first.stderr_, t.second.stderr_);
    const double level = 0.5 * std::abs(t.first.mean + t.second.mean);
    t.relative_drift = level > 0.0 ? gap / level : gap;
    t.z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    t.pass = t.z < 2.0;
    return t;
}

double mean_energy_production(const SpacePtr& space, std::span<const std::vector<double>> snapshots,
                              const SigmaProfile& profile) {
    if (snapshots.empty()) throw std::invalid_argument("mean_energy_production needs snapshots");
    double s = 0.0;
    for (const auto& c : snapshots) s += energy_production(SpectralField(space, c), profile);
    return s / double(snapshots.size());
}

namespace {

std::vector<Vec3> base_grid(double L, int m, Vec3 offset) {
    std::vector<Vec3> pts;
    pts.reserve(std::size_t(m) * m * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                pts.push_back({offset[0] + L * a / m, offset[1] + L * b / m, offset[2] + L * c / m});
    return pts;
}

Vec3 shifted(const Vec3& x, const Vec3& d, double s) { return {x[0] + s * d[0], x[1] + s * d[1], x[2] + s * d[2]}; }

}  // namespace

StructureFunctionTable structure_function(const SpacePtr& space, std::span<const std::vector<double>> snapshots,
                                          Vec3 direction, std::span<const double> separations,
                                          std::span<const double> orders, int base_points, Vec3 offset) {
    if (snapshots.empty()) throw std::invalid_argument("structure_function needs snapshots");
    const double L = space->L();
    const double len = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]);
    if (!(len > 0.0)) throw std::invalid_argument("structure_function direction must be nonzero");
    for (double& x : direction) x /= len;
    for (double s : separations)
        if (!(s >= 0.0) || s >= 0.5 * L)
            throw std::invalid_argument("separation " + std::to_string(s) + " outside [0, L/2)");
    for (double p : orders)
        if (!(p > 0.0)) throw std::invalid_argument("structure function orders must be positive");
    const int m = base_points > 0 ? base_points : space->geometry().grid_size;

    StructureFunctionTable t;
    t.direction = direction;
    t.separations.assign(separations.begin(), separations.end());
    t.orders.assign(orders.begin(), orders.end());
    t.samples = snapshots.size();
    t.base_points = std::size_t(m) * m * m;
    const std::vector<Vec3> x0 = base_grid(L, m, offset);
    // per separation, per order, per snapshot
    std::vector<std::vector<std::vector<double>>> acc(separations.size(),
                                                      std::vector<std::vector<double>>(orders.size()));
    for (const auto& coeffs : snapshots) {
        const SpectralField u(space, coeffs);
        const std::vector<Vec3> at0 = synthesize(u, x0);
        for (std::size_t i = 0; i < separations.size(); ++i) {
            std::vector<Vec3> x1(x0.size());
            for (std::size_t q = 0; q < x0.size(); ++q) x1[q] = shifted(x0[q], direction, separations[i]);
            const std::vector<Vec3> at1 = separations[i] == 0.0 ? at0 : synthesize(u, x1);
            for (std::size_t j = 0; j < orders.size(); ++j) {
                double s = 0.0;
                if (separations[i] != 0.0)
                    for (std::size_t q = 0; q < x0.size(); ++q) {
                        const double dx = at1[q][0] - at0[q][0], dy = at1[q][1] - at0[q][1], dz = at1[q][2] - at0[q][2];
                        s += std::pow(dx * dx + dy * dy + dz * dz, 0.5 * orders[j]);
                    }
                acc[i][j].push_back(s / double(x0.size()));
            }
        }
    }
    t.S.resize(separations.size());
    for (std::size_t i = 0; i < separations.size(); ++i)
        for (std::size_t j = 0; j < orders.size(); ++j) t.S[i].push_back(estimate_mean(acc[i][j]));
    return t;
}

std::vector<PowerLawFit> fit_power_law(const StructureFunctionTable& table) {
    std::vector<PowerLawFit> out;
    for (std::size_t j = 0; j < table.orders.size(); ++j) {
        PowerLawFit f;
        f.p = table.orders[j];
        f.reference = f.p / 3.0;
        std::vector<double> x, y;
        for (std::size_t i = 0; i < table.separations.size(); ++i) {
            const double s = table.S[i][j].mean;
            if (table.separations[i] <= 0.0) continue;
            if (!(s > 0.0)) {
                f.warnings.push_back("excluded nonpositive estimate at separation " + std::to_string(table.separations[i]));
                continue;
            }
            x.push_back(std::log(table.separations[i]));
            y.push_back(std::log(s));
        }
        if (x.size() < 2)
            throw std::invalid_argument("fit_power_law needs at least two positive separations for order " +
                                        std::to_string(f.p));
        f.points = x.size();
        if (x.size() < 4) f.warnings.push_back("fewer than four separations");
        if (*std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end()) < std::log(10.0) - 1e-12)
            f.warnings.push_back("separations span less than a decade");
        const double n = double(x.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
        f.zeta = sxy / sxx;
        const double icpt = my - f.zeta * mx;
        f.k = std::exp(icpt);
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (icpt + f.zeta * x[i]);
            ss += r * r;
        }
        f.residual = std::sqrt(ss / n);
        f.zeta_stderr = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
        out.push_back(std::move(f));
    }
    return out;
}

double transform_discrepancy(const ScaledTriple& triple) {
    auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) throw std::invalid_argument("scaled records have different sizes");
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    };
    const auto& tr = triple.transformed.snapshots;
    const auto& sc = triple.scaled.snapshots;
    if (tr.size() != sc.size()) throw std::invalid_argument("scaled records have unmatched snapshots");
    double worst = dist(triple.transformed.final_coeffs, triple.scaled.final_coeffs);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr[i].step != sc[i].step) throw std::invalid_argument("scaled records have unmatched snapshot times");
        if (!tr[i].coeffs.empty() && !sc[i].coeffs.empty()) worst = std::max(worst, dist(tr[i].coeffs, sc[i].coeffs));
    }
    return worst;
}

PathwiseScaling pathwise_scaling(const ScaledTriple& coarse, const ScaledTriple& fine, double band) {
    PathwiseScaling r;
    r.coarse = transform_discrepancy(coarse);
    r.fine = transform_discrepancy(fine);
    r.ratio = r.fine > 0.0 ? r.coarse / r.fine : std::numeric_limits<double>::quiet_NaN();
    r.pass = std::isfinite(r.ratio) && std::abs(r.ratio - 2.0) <= 2.0 * band;
    return r;
}

ScalingReport scaling_identity_check(std::span<const ScaledTriple> ensemble, Vec3 e, std::span<const Vec3> psis,
                                     std::span<const double> orders, int base_points, double z_max) {
    if (ensemble.empty()) throw std::invalid_argument("scaling_identity_check needs an ensemble");
    ScalingReport rep;
    const double lambda = ensemble.front().lambda;
    rep.lambda = lambda;
    const TorusGeometry& gb = ensemble.front().base_geometry;
    const TorusGeometry& gs = ensemble.front().scaled_geometry;
    const SpacePtr base_space = SpectralSpace::create(gb);
    const SpacePtr scaled_space = SpectralSpace::create(gs);
    const int m = base_points > 0 ? base_points : gb.grid_size;
    const std::vector<Vec3> x0 = base_grid(gb.L, m, {0, 0, 0});
    std::vector<Vec3> xb1(x0.size()), xs0(x0.size()), xs1(x0.size());
    for (std::size_t q = 0; q < x0.size(); ++q) {
        xb1[q] = shifted(x0[q], e, lambda);
        xs0[q] = shifted({0, 0, 0}, x0[q], 1.0 / lambda);
        xs1[q] = shifted(xs0[q], e, 1.0);
    }

    const std::size_t rows = psis.size() * orders.size();
    std::vector<std::vector<double>> lhs(rows), rhs(rows);
    for (const ScaledTriple& t : ensemble) {
        if (t.lambda != lambda || !(t.base_geometry == gb) || !(t.scaled_geometry == gs))
            throw std::invalid_argument("scaling ensemble mixes geometries or lambdas");
        if (!t.base.completed() || !t.scaled.completed() || t.base.stopped || t.scaled.stopped) continue;
        const SpectralField ub(base_space, t.base.final_coeffs), us(scaled_space, t.scaled.final_coeffs);
        const auto b0 = synthesize(ub, x0), b1 = synthesize(ub, xb1);
        const auto s0 = synthesize(us, xs0), s1 = synthesize(us, xs1);
        std::size_t row = 0;
        for (const Vec3& psi : psis)
            for (double p : orders) {
                double sb = 0.0, ss = 0.0;
                for (std::size_t q = 0; q < x0.size(); ++q) {
                    double db = 0.0, ds = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        db += (b1[q][c] - b0[q][c]) * psi[c];
                        ds += (s1[q][c] - s0[q][c]) * psi[c];
                    }
                    sb += std::pow(std::abs(db), p);
                    ss += std::pow(std::abs(ds), p);
                }
                lhs[row].push_back(sb / double(x0.size()));
                rhs[row].push_back(std::pow(lambda, p / 3.0) * ss / double(x0.size()));
                ++row;
            }
    }
    std::size_t row = 0;
    for (const Vec3& psi : psis)
        for (double p : orders) {
            MomentIdentityRow r;
            r.psi = psi;
            r.p = p;
            r.base = estimate_mean(lhs[row]);
            r.scaled = estimate_mean(rhs[row]);
            const double gap = std::abs(r.base.mean - r.scaled.mean);
            const double se = std::hypot(r.base.stderr_, r.scaled.stderr_);
            r.z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            r.pass = r.base.count > 0 && r.z <= z_max;
            rep.pass = rep.pass && r.pass;
            rep.rows.push_back(r);
            ++row;
        }
    return rep;
}

}  // namespace psns
