#include "psns/checkpoint.hpp"
#include "psns/config.hpp"
#include "psns/report_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

using namespace psns;
using nlohmann::json;

namespace {

constexpr int kPass = 0, kVerdictFailure = 2, kConfigError = 3, kRuntimeFailure = 4;

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string resume;
};

struct Outcome {
    int code = kPass;
    bool partial = false;
};

FieldSampler sampler_for(const SimConfig& c, double decay, double lo, double hi) {
    return {SpectralSpace::create(c.geometry), decay, lo, hi};
}

Outcome simulate(const RunConfig& rc, OutputDir& out, const Options& opt) {
    const SimConfig& c = rc.sim;
    RunOptions ro;
    if (!opt.resume.empty()) {
        const Checkpoint cp = load_checkpoint(opt.resume);
        cp.check_geometry(c.geometry);
        ro.resume = cp.to_state(c.dt);
    }
    ro.checkpoint_every = rc.plan.checkpoint_every;
    ro.on_checkpoint = [&](const SimState& s) {
        save_checkpoint(out.path() / "checkpoint.bin", Checkpoint::from_state(c.geometry, s));
        out.record("checkpoint.bin");
    };
    const TrajectoryRecord rec = run_trajectory(c, ro);
    out.write("trajectory.csv", trajectory_csv(rec, c.profile));
    out.write_json("summary.json", {{"seed", rec.seed},
                                    {"completed", rec.completed()},
                                    {"stopped", rec.stopped},
                                    {"stop_time", rec.stopped ? json(rec.stop_time) : json(nullptr)},
                                    {"stop_overshoot", rec.stop_overshoot},
                                    {"sup_energy", rec.sup_energy},
                                    {"int_enstrophy", rec.int_enstrophy},
                                    {"int_lq", rec.int_lq},
                                    {"final_time", rec.final_time},
                                    {"failure", rec.failure}});
    if (!rec.completed()) {
        std::cerr << "psns: " << rec.failure << "\n";
        return {kRuntimeFailure, true};
    }
    return {};
}

Outcome ensemble(const RunConfig& rc, OutputDir& out, const Options& opt) {
    const Ensemble e = run_ensemble(rc.sim, rc.plan.ensemble_size, opt.threads, rc.plan.moment_p);
    json members = json::array();
    for (const TrajectoryRecord& r : e.records) {
        out.add_seed(r.seed);
        members.push_back({{"seed", r.seed},
                           {"completed", r.completed()},
                           {"stopped", r.stopped},
                           {"sup_energy", r.sup_energy},
                           {"int_enstrophy", r.int_enstrophy},
                           {"int_lq", r.int_lq},
                           {"failure", r.failure}});
    }
    const StationarityVerdict st =
        stationarity_condition(rc.sim.profile, rc.sim.geometry.L, rc.sim.noise.lambda0());
    out.write_json("ensemble.json", {{"summary", to_json(e.summary)}, {"stationarity", to_json(st)}, {"members", members}});
    if (e.summary.completed == 0) return {kRuntimeFailure, true};
    return {};
}

Outcome certify_all(const RunConfig& rc, OutputDir& out, const Options& opt) {
    const CertifyPlan& p = rc.plan.certify;
    const FieldSampler sampler = sampler_for(rc.sim, p.decay, p.min_amplitude, p.max_amplitude);
    json reports = json::array();
    bool pass = true;
    for (const std::string& name : p.names) {
        const InequalityReport r = certify(name, rc.sim.profile, sampler, p.trials, p.seed, opt.threads);
        std::printf("%-18s %s  worst margin %.3e  (tol %.0e)\n", name.c_str(), r.pass ? "pass" : "FAIL", r.worst_margin,
                    r.tolerance);
        pass = pass && r.pass;
        reports.push_back(to_json(r));
        if (!r.pass) {
            Checkpoint cp{rc.sim.geometry.n, rc.sim.geometry.L, r.worst_sample, {}, 0.0};
            save_checkpoint(out.path() / ("worst_" + name + ".bin"), cp);
            out.record("worst_" + name + ".bin");
        }
    }
    out.add_seed(p.seed);
    out.write_json("certify.json", reports);
    return {pass ? kPass : kVerdictFailure, false};
}

Outcome uniqueness(const RunConfig& rc, OutputDir& out, const Options& opt) {
    const SimConfig& c = rc.sim;
    const UniquenessPlan& p = rc.plan.uniqueness;
    const SpacePtr space = SpectralSpace::create(c.geometry);
    const double C_B = p.C_B ? *p.C_B
                             : estimate_CB(sampler_for(c, rc.plan.certify.decay, rc.plan.certify.min_amplitude,
                                                       rc.plan.certify.max_amplitude),
                                           p.cb_trials, c.profile.nu(), rc.plan.certify.seed, opt.threads);
    const double L_G = c.noise.lipschitz();
    const bool distinct = c.initial.kind == InitialCondition::Kind::random;
    std::vector<CoupledRecord> pairs(p.pairs);
    parallel_for(p.pairs, opt.threads, [&](std::size_t i) {
        SimConfig ci = c;
        ci.seed = derive_seed(c.seed, i);
        std::vector<double> a, b;
        if (distinct) {
            Rng rng(derive_seed(initial_seed(ci.seed), 0));
            a = random_initial_field(space, rng, c.initial.decay, p.initial_bound).values();
            b = random_initial_field(space, rng, c.initial.decay, p.initial_bound).values();
        } else {
            a = b = c.initial.build(space, initial_seed(ci.seed)).values();
        }
        pairs[i] = run_coupled_pair(ci, a, b);
    });
    for (std::size_t i = 0; i < p.pairs; ++i) out.add_seed(derive_seed(c.seed, i));
    const ContractionVerdict v = contraction_test(pairs, C_B, L_G, c.profile.nu(), p.tolerance);
    json j = to_json(v);
    j["C_B"] = C_B;
    j["C_B_sampled"] = !p.C_B.has_value();
    j["L_G"] = L_G;
    j["identical_initial_data"] = !distinct;
    out.write_json("uniqueness.json", j);
    std::printf("contraction: E[lhs] = %.6e +- %.1e, rhs = %.6e, slack %.3e: %s\n", v.lhs.mean, v.lhs.stderr_, v.rhs,
                v.slack, v.pass ? "pass" : "FAIL");
    return {v.pass ? kPass : kVerdictFailure, false};
}

Outcome scaling(const RunConfig& rc, OutputDir& out, const Options& opt) {
    const ScalingPlan& p = rc.plan.scaling;
    if (rc.sim.profile.kind() != SigmaKind::pure_power)
        throw ConfigError("$.profile.kind: the scaling transform needs the pure_power profile");
    const auto members = run_scaled_ensemble(rc.sim, p.lambda, p.ensemble, opt.threads);
    // pathwise convergence: one Brownian path at the fine step, coarsened for the dt run
    SimConfig half = rc.sim;
    half.dt = rc.sim.dt / 2;
    const BrownianPath fine_path = BrownianPath::generate(rc.sim.noise.size(), std::pow(p.lambda, 2.0 / 3.0) * half.dt,
                                                          std::max(half.num_steps(), 2 * rc.sim.num_steps()), noise_seed(rc.sim.seed));
    const BrownianPath coarse_path = fine_path.coarsen(2);
    const ScaledTriple coarse = run_scaled_pair(rc.sim, p.lambda, &coarse_path);
    const ScaledTriple fine = run_scaled_pair(half, p.lambda, &fine_path);
    const PathwiseScaling path = pathwise_scaling(coarse, fine);
    const ScalingReport rep = scaling_identity_check(members, p.point, p.psi, p.orders, p.base_points);
    for (std::size_t i = 0; i < p.ensemble; ++i) out.add_seed(derive_seed(rc.sim.seed, i));
    out.write_json("scaling.json", {{"pathwise", to_json(path)}, {"moments", to_json(rep)}});
    std::printf("pathwise discrepancy ratio %.3f: %s\nmoment identity: %s\n", path.ratio, path.pass ? "pass" : "FAIL",
                rep.pass ? "pass" : "FAIL");
    return {path.pass && rep.pass ? kPass : kVerdictFailure, false};
}

Outcome structure(const RunConfig& rc, OutputDir& out, const Options& opt) {
    const StructurePlan& p = rc.plan.structure;
    SimConfig c = rc.sim;
    c.T = p.burn_in + p.window;
    c.snapshot_every = p.sample_every;
    c.R.reset();
    const Ensemble e = run_ensemble(c, rc.plan.ensemble_size, opt.threads, rc.plan.moment_p);
    std::vector<std::vector<double>> snaps;
    std::vector<double> energy;
    for (const TrajectoryRecord& r : e.records) {
        out.add_seed(r.seed);
        if (!r.completed()) continue;
        for (const Snapshot& s : r.snapshots)
            if (s.t >= p.burn_in - 1e-12) snaps.push_back(s.coeffs);
    }
    // pooled energy per time after burn-in, for the stationarity drift check
    if (!e.records.empty())
        for (std::size_t i = 0; i < e.records.front().series.size(); ++i) {
            if (e.records.front().series[i].t < p.burn_in - 1e-12) continue;
            double sum = 0.0;
            std::size_t n = 0;
            for (const TrajectoryRecord& r : e.records)
                if (r.completed() && i < r.series.size()) sum += r.series[i].norms.energy, ++n;
            if (n) energy.push_back(sum / double(n));
        }
    if (snaps.empty()) return {kRuntimeFailure, true};
    const SpacePtr space = SpectralSpace::create(c.geometry);
    const StructureFunctionTable table =
        structure_function(space, snaps, p.direction, p.separations, p.orders, p.base_points);
    out.write("structure.csv", structure_csv(table));
    json fits = json::array();
    for (const PowerLawFit& f : fit_power_law(table)) fits.push_back(to_json(f));
    json j = {{"fits", fits},
              {"snapshots", snaps.size()},
              {"mean_energy_production", mean_energy_production(space, snaps, c.profile)},
              {"stationarity", to_json(stationarity_condition(c.profile, c.geometry.L, c.noise.lambda0()))},
              {"caveat",
               "exponents are reported against p/3 without gating; a Galerkin truncation has smooth fields and "
               "cannot test the regularity assumption behind the power-law claim"}};
    if (energy.size() >= 2 * p.batches) j["energy_drift"] = to_json(window_drift_test(energy, p.batches));
    out.write_json("structure_fit.json", j);
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galerkin simulator and verification harness for stochastic Prouse-type Navier-Stokes on a 3-torus"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration (defaults apply when omitted)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "overrides integration.seed");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    using Command = Outcome (*)(const RunConfig&, OutputDir&, const Options&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands{
        {"simulate", "one trajectory: CSV time series and checkpoints", simulate},
        {"ensemble", "moment estimates over an ensemble", ensemble},
        {"certify", "randomized inequality certification", certify_all},
        {"uniqueness", "coupled-pair contraction test", uniqueness},
        {"scaling", "scaling transform: pathwise and moment checks", scaling},
        {"structure", "stationary structure functions and fitted exponents", structure}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        if (name == "simulate") sub->add_option("--resume", opt.resume, "checkpoint to continue from")->check(CLI::ExistingFile);
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const auto& [name, help, fn] = commands[which];
    if (subs[which]->count("--seed")) opt.seed = seed;

    RunConfig rc;
    try {
        json doc = json::object();
        if (!opt.config.empty()) {
            try {
                doc = json::parse(read_file(opt.config));
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("$: invalid JSON: ") + e.what());
            }
        }
        if (opt.seed) doc["integration"]["seed"] = *opt.seed;
        rc = parse_config(doc);
    } catch (const ConfigError& e) {
        std::cerr << "psns: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "psns: " << e.what() << "\n";
        return kRuntimeFailure;
    }

    std::optional<OutputDir> out;
    try {
        out.emplace(opt.out, echo_config(rc), config_digest(rc));
        out->add_seed(rc.sim.seed);
        const Outcome o = fn(rc, *out, opt);
        out->finish(o.partial, name, o.code);
        return o.code;
    } catch (const ConfigError& e) {
        std::cerr << "psns: config error: " << e.what() << "\n";
        if (out) out->finish(true, name, kConfigError);
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "psns: " << name << " failed: " << e.what() << "\n";
        if (out) {
            try {
                out->finish(true, name, kRuntimeFailure);
            } catch (...) {
            }
        }
        return kRuntimeFailure;
    }
}
