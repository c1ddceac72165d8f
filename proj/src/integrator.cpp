#include "psns/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <thread>

namespace psns {

std::string to_string(Scheme s) { return s == Scheme::explicit_em ? "explicit_em" : "semi_implicit_em"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "explicit_em") return Scheme::explicit_em;
    if (name == "semi_implicit_em") return Scheme::semi_implicit_em;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(InitialCondition::Kind k) {
    switch (k) {
    case InitialCondition::Kind::zero: return "zero";
    case InitialCondition::Kind::single_mode: return "single_mode";
    case InitialCondition::Kind::prescribed: return "prescribed";
    case InitialCondition::Kind::random: return "random";
    }
    return "zero";
}

InitialCondition::Kind initial_kind_from_string(const std::string& name) {
    if (name == "zero") return InitialCondition::Kind::zero;
    if (name == "single_mode") return InitialCondition::Kind::single_mode;
    if (name == "prescribed") return InitialCondition::Kind::prescribed;
    if (name == "random") return InitialCondition::Kind::random;
    throw std::invalid_argument("unknown initial condition kind '" + name + "'");
}

SpectralField InitialCondition::build(const SpacePtr& space, std::uint64_t seed) const {
    switch (kind) {
    case Kind::zero: return SpectralField(space);
    case Kind::single_mode: {
        const auto ik = space->find(k);
        if (!ik || j < 1 || j > 4) throw std::invalid_argument("initial single mode is not a retained mode");
        SpectralField u(space);
        u.at(*ik, j) = amplitude;
        return u;
    }
    case Kind::prescribed: return SpectralField(space, coeffs);
    case Kind::random: {
        Rng rng(seed);
        return random_initial_field(space, rng, decay, bound);
    }
    }
    return SpectralField(space);
}

std::uint64_t noise_seed(std::uint64_t seed) { return derive_seed(seed, 0); }
std::uint64_t initial_seed(std::uint64_t seed) { return derive_seed(seed, 1); }

std::size_t SimConfig::num_steps() const { return static_cast<std::size_t>(std::floor(T / dt + 1e-9)); }

void SimConfig::validate() const {
    geometry.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integration.dt must be > 0");
    if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("integration.T must be >= 0");
    if (T > 0.0 && dt > T) throw std::invalid_argument("integration.dt must not exceed T");
    if (R && !(*R > 0.0)) throw std::invalid_argument("integration.R must be > 0");
    if (nu0 && !(*nu0 >= 0.0)) throw std::invalid_argument("integration.nu0 must be >= 0");
    const auto space = SpectralSpace::create(geometry);
    noise.bind(*space);
    if (scheme == Scheme::explicit_em && !override_stability) {
        const double limit = stability_c / (profile.nu() * space->max_eigenvalue());
        if (dt > limit)
            throw std::invalid_argument("explicit_em stability screen: dt = " + std::to_string(dt) + " exceeds " +
                                        std::to_string(stability_c) + "/(nu*lambda_max) = " + std::to_string(limit));
    }
}

Stepper::Stepper(const SimConfig& config, SpacePtr space)
    : config_(&config), space_(std::move(space)), binding_(config.noise.bind(*space_)) {
    decay_.assign(space_->dof(), 1.0);
    if (config.scheme == Scheme::semi_implicit_em) {
        const double nu0 = config.floor();
        for (std::size_t ik = 0; ik < space_->num_wavevectors(); ++ik) {
            const double f = std::exp(-nu0 * space_->eigenvalue(ik) * config.dt);
            for (int j = 1; j <= 4; ++j) decay_[SpectralSpace::coefficient_index(ik, j)] = f;
        }
    }
}

namespace {

struct GridMoments {
    double q = 5.0;
    double lq = 0.0;
    double l5 = 0.0;

    void operator()(const PhysicalField& g) {
        double s_q = 0.0, s_5 = 0.0;
        const bool same = q == 5.0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            const double m2 = g.comp[0][p] * g.comp[0][p] + g.comp[1][p] * g.comp[1][p] + g.comp[2][p] * g.comp[2][p];
            const double m5 = m2 * m2 * std::sqrt(m2);
            s_5 += m5;
            s_q += same ? m5 : std::pow(m2, 0.5 * q);
        }
        lq = s_q / double(g.size());
        l5 = s_5 / double(g.size());
    }
};

double spectral_weighted(const SpectralField& u, bool weighted) {
    const SpectralSpace& sp = u.space();
    double s = 0.0;
    for (std::size_t ik = 0; ik < sp.num_wavevectors(); ++ik) {
        double shell = 0.0;
        for (int j = 1; j <= 4; ++j) shell += u.at(ik, j) * u.at(ik, j);
        s += weighted ? sp.eigenvalue(ik) * shell : shell;
    }
    return s;
}

StateNorms state_norms(const SpectralField& u, double b) {
    GridMoments gm{1.0 + b};
    gm(transform_to_grid(u, u.geometry().padded_size));
    return {spectral_weighted(u, false), spectral_weighted(u, true), gm.lq, gm.l5};
}

}  // namespace

StateNorms Stepper::norms(const SpectralField& u) const { return state_norms(u, config_->profile.b()); }

SpectralField Stepper::step(const SpectralField& u, std::span<const double> incr, StateNorms* norms,
                            SpectralField* drift) const {
    const SimConfig& c = *config_;
    GridMoments gm{1.0 + c.profile.b()};
    const bool semi = c.scheme == Scheme::semi_implicit_em;
    const double shift = semi ? c.floor() : 0.0;
    GridObserver observe;
    if (norms) observe = [&gm](const PhysicalField& g) { gm(g); };
    // rate = −π_nA(Φ(u) − shift·u) − π_nB(u,u)
    SpectralField rate = a_phi(u, c.profile, shift, observe);
    rate += b_bilinear(u, u);
    rate *= -1.0;
    if (norms) *norms = {spectral_weighted(u, false), spectral_weighted(u, true), gm.lq, gm.l5};
    if (drift) {
        *drift = rate;
        if (semi && shift != 0.0) drift->axpy(-shift, apply_a_power(u, 1.0));
    }
    SpectralField next = u;
    next.axpy(c.dt, rate);
    add_G(c.noise, binding_, u, incr, next);
    if (semi) {
        auto a = next.coeffs();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= decay_[i];
    }
    return next;
}

SpectralField step(const SpectralField& u, const SimConfig& config, std::span<const double> incr) {
    Stepper s(config, u.space_ptr());
    return s.step(u, incr);
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t config_digest(const SimConfig& c) {
    std::string s = "L=" + g17(c.geometry.L) + ";n=" + std::to_string(c.geometry.n) +
                    ";grid=" + std::to_string(c.geometry.grid_size) + ";pad=" + std::to_string(c.geometry.padded_size) +
                    ";kind=" + to_string(c.profile.kind()) + ";nu=" + g17(c.profile.nu()) + ";b=" + g17(c.profile.b()) +
                    ";K=" + g17(c.profile.K()) + ";a1=" + g17(c.profile.a1()) + ";a2=" + g17(c.profile.a2()) +
                    ";growth=" + std::to_string(c.profile.growth()) + ";noise=" + to_string(c.noise.kind());
    for (const NoiseMode& m : c.noise.modes())
        s += ";" + std::to_string(m.k[0]) + "," + std::to_string(m.k[1]) + "," + std::to_string(m.k[2]) + "," +
             std::to_string(m.j) + "," + g17(m.sigma);
    s += ";dt=" + g17(c.dt) + ";T=" + g17(c.T) + ";scheme=" + to_string(c.scheme) + ";R=" + (c.R ? g17(*c.R) : "none") +
         ";seed=" + std::to_string(c.seed) + ";ic=" + to_string(c.initial.kind) + ";nu0=" + g17(c.floor());
    return fnv1a(s);
}

/// Bookkeeping shared by single and coupled runs.
class Recorder {
public:
    Recorder(const SimConfig& c, TrajectoryRecord& rec) : c_(c), rec_(rec) {
        rec_.seed = c.seed;
        rec_.config_digest = config_digest(c);
    }

    /// Records the state at step s; returns false when the stopping threshold is reached.
    bool visit(std::size_t s, double t, const SpectralField& u, const StateNorms& nm, bool last) {
        rec_.series.push_back({t, nm});
        rec_.sup_energy = std::max(rec_.sup_energy, nm.energy);
        if (c_.R && nm.energy >= *c_.R) {
            rec_.stopped = true;
            rec_.stop_time = t;
            rec_.stop_overshoot = nm.energy - *c_.R;
            snapshot(s, t, u, nm);
            finish(u, t);
            return false;
        }
        const bool due = c_.snapshot_every == 0 ? (s == first_ || last) : (s % c_.snapshot_every == 0 || last);
        if (due) snapshot(s, t, u, nm);
        if (!last) {
            rec_.int_enstrophy += c_.dt * nm.enstrophy;
            rec_.int_lq += c_.dt * nm.lq_pow;
        } else {
            finish(u, t);
        }
        return true;
    }

    void blow_up(std::size_t s, double t, const SpectralField& last_good) {
        rec_.blown_up = true;
        rec_.failure = "non-finite state after step " + std::to_string(s) + " (t = " + g17(t) + ")";
        finish(last_good, t);
    }

    void set_first(std::size_t s) { first_ = s; }

private:
    void snapshot(std::size_t s, double t, const SpectralField& u, const StateNorms& nm) {
        if (!rec_.snapshots.empty() && rec_.snapshots.back().step == s) return;
        Snapshot snap;
        snap.t = t;
        snap.step = s;
        if (c_.keep_snapshot_coeffs) snap.coeffs = u.values();
        snap.h = std::sqrt(nm.energy);
        snap.v = std::sqrt(nm.enstrophy);
        snap.l1b = std::pow(nm.lq_pow, 1.0 / (1.0 + c_.profile.b()));
        if (c_.profile.kind() == SigmaKind::pure_power) snap.x = norm_x(u);
        rec_.snapshots.push_back(std::move(snap));
    }

    void finish(const SpectralField& u, double t) {
        rec_.final_coeffs = u.values();
        rec_.final_time = t;
    }

    const SimConfig& c_;
    TrajectoryRecord& rec_;
    std::size_t first_ = 0;
};

}  // namespace

TrajectoryRecord run_trajectory(const SimConfig& config, const RunOptions& options) {
    config.validate();
    const SpacePtr space = SpectralSpace::create(config.geometry);
    const Stepper stepper(config, space);
    TrajectoryRecord rec;
    Recorder recorder(config, rec);

    SpectralField u = options.initial_override ? SpectralField(space, *options.initial_override)
                                               : config.initial.build(space, initial_seed(config.seed));
    NoiseStream stream(noise_seed(config.seed));
    std::size_t start = 0;
    if (options.resume) {
        u = SpectralField(space, options.resume->coeffs);
        start = options.resume->step;
        stream.load_state(options.resume->rng_state);
    }
    recorder.set_first(start);
    const std::size_t N = config.num_steps();
    if (start > N) throw std::invalid_argument("resume point lies beyond the horizon");
    std::vector<double> incr(config.noise.size());

    for (std::size_t s = start;; ++s) {
        const double t = double(s) * config.dt;
        if (options.checkpoint_every && options.on_checkpoint && s != start && s % options.checkpoint_every == 0)
            options.on_checkpoint(SimState{u.values(), t, s, stream.save_state()});
        const bool last = s == N;
        StateNorms nm;
        std::optional<SpectralField> next;
        if (!last) {
            if (options.increments)
                options.increments(s, incr);
            else
                stream.sample_increments(config.dt, incr);
            next = stepper.step(u, incr, &nm);
        } else {
            nm = stepper.norms(u);
        }
        if (!recorder.visit(s, t, u, nm, last) || last) break;
        if (!next->is_finite()) {
            recorder.blow_up(s, t, u);
            break;
        }
        u = std::move(*next);
    }
    return rec;
}

MomentEstimate estimate_mean(std::span<const double> samples) {
    MomentEstimate e;
    e.count = samples.size();
    if (samples.empty()) return e;
    double s = 0.0;
    for (double x : samples) {
        if (!std::isfinite(x)) e.finite = false;
        s += x;
    }
    e.mean = s / double(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double x : samples) ss += (x - e.mean) * (x - e.mean);
        e.stderr_ = std::sqrt(ss / double(samples.size() - 1) / double(samples.size()));
    }
    return e;
}

EnsembleSummary summarize(std::span<const TrajectoryRecord> records, double p) {
    EnsembleSummary s;
    s.p = p;
    s.members = records.size();
    std::vector<double> sup, iv, iq;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TrajectoryRecord& r = records[i];
        if (!r.completed()) {
            s.failures.push_back("member " + std::to_string(i) + ": " + r.failure);
            continue;
        }
        ++s.completed;
        if (r.stopped) ++s.stopped;
        sup.push_back(std::pow(r.sup_energy, 0.5 * p));
        iv.push_back(r.int_enstrophy);
        iq.push_back(r.int_lq);
    }
    s.sup_h_pow = estimate_mean(sup);
    s.int_v = estimate_mean(iv);
    s.int_lq = estimate_mean(iq);
    return s;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Ensemble run_ensemble(const SimConfig& config, std::size_t M, unsigned threads, double p) {
    if (M == 0) throw std::invalid_argument("ensemble size must be >= 1");
    config.validate();
    Ensemble e;
    e.records.resize(M);
    parallel_for(M, threads, [&](std::size_t i) {
        SimConfig member = config;
        member.seed = M == 1 ? config.seed : derive_seed(config.seed, i);
        try {
            e.records[i] = run_trajectory(member);
        } catch (const std::exception& ex) {
            e.records[i].seed = member.seed;
            e.records[i].failure = ex.what();
        }
    });
    e.summary = summarize(e.records, p);
    return e;
}

CoupledRecord run_coupled_pair(const SimConfig& config, const std::vector<double>& u0a, const std::vector<double>& u0b,
                               const IncrementSource& increments) {
    config.validate();
    const SpacePtr space = SpectralSpace::create(config.geometry);
    const Stepper stepper(config, space);
    CoupledRecord out;
    out.dt = config.dt;
    Recorder ra(config, out.a), rb(config, out.b);
    SpectralField a(space, u0a), b(space, u0b);
    NoiseStream stream(noise_seed(config.seed));
    const std::size_t N = config.num_steps();
    std::vector<double> incr(config.noise.size());
    const auto binding = config.noise.bind(*space);
    const bool multiplicative = config.noise.kind() == NoiseKind::diagonal_multiplicative;

    for (std::size_t s = 0;; ++s) {
        const double t = double(s) * config.dt;
        const bool last = s == N;
        StateNorms na, nb;
        std::optional<SpectralField> next_a, next_b;
        SpectralField da(space), db(space);
        if (!last) {
            if (increments)
                increments(s, incr);
            else
                stream.sample_increments(config.dt, incr);
            next_a = stepper.step(a, incr, &na, &da);
            next_b = stepper.step(b, incr, &nb, &db);
        } else {
            na = stepper.norms(a);
            nb = stepper.norms(b);
        }
        const SpectralField v = a - b;
        const SpectralField ainv_v = apply_a_power(v, -1.0);
        DifferenceSample d;
        d.t = t;
        d.vprime_sq = inner_h(v, ainv_v);
        d.h_sq = inner_h(v, v);
        d.l5_a = na.l5_pow;
        d.l5_b = nb.l5_pow;
        if (!last) {
            d.drift_rate = 2.0 * inner_h(da - db, ainv_v);
            if (multiplicative) {
                d.drift_rate += hs_difference_vprime(config.noise, a, b);
                SpectralField g(space);
                add_G(config.noise, binding, a, incr, g);
                g *= -1.0;
                add_G(config.noise, binding, b, incr, g);
                d.martingale = -2.0 * inner_h(ainv_v, g);
            }
        }
        out.diff.push_back(d);
        const bool go_a = ra.visit(s, t, a, na, last);
        const bool go_b = rb.visit(s, t, b, nb, last);
        if (!go_a || !go_b || last) {
            out.final_difference = v.values();
            break;
        }
        if (!next_a->is_finite() || !next_b->is_finite()) {
            if (!next_a->is_finite()) ra.blow_up(s, t, a);
            if (!next_b->is_finite()) rb.blow_up(s, t, b);
            out.final_difference = v.values();
            break;
        }
        a = std::move(*next_a);
        b = std::move(*next_b);
    }
    return out;
}

ScaledTriple run_scaled_pair(const SimConfig& config, double lambda, const BrownianPath* master) {
    if (config.profile.kind() != SigmaKind::pure_power)
        throw std::invalid_argument("scaled runs require the pure power profile");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0,1]");
    const double m = std::round(1.0 / lambda);
    if (std::abs(1.0 / lambda - m) > 1e-12 * m)
        throw std::invalid_argument("lambda must be the reciprocal of an integer (lambda = " + g17(lambda) + ")");
    if (m > 4) throw std::invalid_argument("lambda must be one of 1, 1/2, 1/3, 1/4");
    config.validate();

    ScaledTriple out;
    out.lambda = lambda;
    out.dt = config.dt;
    const std::size_t N = config.num_steps();
    const double dt_fine = std::pow(lambda, 2.0 / 3.0) * config.dt;
    const double amp = std::pow(lambda, -1.0 / 3.0);

    BrownianPath generated;
    if (!master) {
        generated = BrownianPath::generate(config.noise.size(), dt_fine, N, noise_seed(config.seed));
        master = &generated;
    }
    if (master->modes != config.noise.size()) throw std::invalid_argument("master path has the wrong number of modes");
    if (std::abs(master->dt - dt_fine) > 1e-12 * dt_fine)
        throw std::invalid_argument("master path step " + g17(master->dt) + " differs from lambda^(2/3)*dt = " + g17(dt_fine));
    if (master->steps() < N) throw std::invalid_argument("master path is shorter than the run");
    const BrownianPath scaled_path = rescaled_path(*master, lambda, config.dt);

    // (i) base system on [0,L]³ at the fine step
    SimConfig base = config;
    base.dt = dt_fine;
    base.T = double(N) * dt_fine;
    const SpacePtr base_space = SpectralSpace::create(config.geometry);
    const std::vector<double> u0 = config.initial.build(base_space, initial_seed(config.seed)).values();
    RunOptions base_opts;
    base_opts.initial_override = u0;
    base_opts.increments = [master](std::size_t s, std::span<double> o) {
        const auto st = master->step(s);
        std::copy(st.begin(), st.end(), o.begin());
    };
    out.base = run_trajectory(base, base_opts);

    // (iii) scaled system on [0,L/λ]³ driven by β^λ
    SimConfig scaled = config;
    scaled.geometry.L = config.geometry.L / lambda;
    scaled.T = double(N) * config.dt;
    out.base_geometry = config.geometry;
    out.scaled_geometry = scaled.geometry;
    std::vector<double> u0s = u0;
    for (double& x : u0s) x *= amp;
    RunOptions scaled_opts;
    scaled_opts.initial_override = u0s;
    scaled_opts.increments = [&scaled_path](std::size_t s, std::span<double> o) {
        const auto st = scaled_path.step(s);
        std::copy(st.begin(), st.end(), o.begin());
    };
    out.scaled = run_trajectory(scaled, scaled_opts);

    // (ii) the deterministic transform of (i)
    const SpacePtr scaled_space = SpectralSpace::create(scaled.geometry);
    const double q = 1.0 + config.profile.b();
    TrajectoryRecord& tr = out.transformed;
    tr.seed = out.base.seed;
    tr.config_digest = out.scaled.config_digest;
    tr.stopped = out.base.stopped;
    tr.blown_up = out.base.blown_up;
    tr.failure = out.base.failure;
    for (std::size_t s = 0; s < out.base.series.size(); ++s) {
        StepSample smp;
        smp.t = double(s) * config.dt;
        const StateNorms& b = out.base.series[s].norms;
        smp.norms.energy = amp * amp * b.energy;
        smp.norms.enstrophy = amp * amp * lambda * lambda * b.enstrophy;
        smp.norms.lq_pow = std::pow(amp, q) * b.lq_pow;
        smp.norms.l5_pow = std::pow(amp, 5.0) * b.l5_pow;
        tr.series.push_back(smp);
    }
    for (const Snapshot& bs : out.base.snapshots) {
        Snapshot snap;
        snap.step = bs.step;
        snap.t = double(bs.step) * config.dt;
        std::vector<double> c = bs.coeffs;
        if (c.empty()) c = out.base.final_coeffs;
        for (double& x : c) x *= amp;
        const SpectralField f(scaled_space, c);
        const StateNorms nm = state_norms(f, config.profile.b());
        snap.h = std::sqrt(nm.energy);
        snap.v = std::sqrt(nm.enstrophy);
        snap.l1b = std::pow(nm.lq_pow, 1.0 / q);
        snap.x = norm_x(f);
        if (config.keep_snapshot_coeffs) snap.coeffs = std::move(c);
        tr.snapshots.push_back(std::move(snap));
    }
    tr.final_coeffs = out.base.final_coeffs;
    for (double& x : tr.final_coeffs) x *= amp;
    tr.final_time = out.base.series.empty() ? 0.0 : tr.series.back().t;
    tr.sup_energy = amp * amp * out.base.sup_energy;
    return out;
}

std::vector<ScaledTriple> run_scaled_ensemble(const SimConfig& config, double lambda, std::size_t M, unsigned threads) {
    if (M == 0) throw std::invalid_argument("ensemble size must be >= 1");
    std::vector<ScaledTriple> out(M);
    parallel_for(M, threads, [&](std::size_t i) {
        SimConfig member = config;
        member.seed = derive_seed(config.seed, i);
        out[i] = run_scaled_pair(member, lambda);
    });
    return out;
}

}  // namespace psns
