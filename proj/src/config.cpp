#include "psns/config.hpp"
#include "psns/diagnostics.hpp"

#include <algorithm>

#include <cmath>
#include <set>

namespace psns {

using nlohmann::json;

namespace {

std::string type_name(const json& v) { return v.type_name(); }

/// One JSON object being read; remembers consumed keys so leftovers can be reported.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object, got " + type_name(j_));
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
        throw ConfigError(path + ": " + msg);
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number()) fail(at(key), "expected a number, got " + type_name(*v));
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail(at(key), "must be finite");
        return x;
    }

    std::optional<double> optional_number(const std::string& key, std::optional<double> def) {
        const json* v = raw(key);
        if (!v) return def;
        if (v->is_null()) return std::nullopt;
        if (!v->is_number()) fail(at(key), "expected a number or null, got " + type_name(*v));
        return v->get<double>();
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
            fail(at(key), "expected a nonnegative integer, got " + v->dump());
        return v->get<std::uint64_t>();
    }

    int integer(const std::string& key, int def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number_integer()) fail(at(key), "expected an integer, got " + v->dump());
        return v->get<int>();
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_boolean()) fail(at(key), "expected a boolean, got " + type_name(*v));
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_string()) fail(at(key), "expected a string, got " + type_name(*v));
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_array()) fail(at(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back((*v)[i].get<double>());
        }
        return out;
    }

    static Vec3 vec3(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 3) fail(path, "expected an array of three numbers");
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
            out[i] = v[i].get<double>();
        }
        return out;
    }

    Vec3 vector3(const std::string& key, Vec3 def) {
        const json* v = raw(key);
        return v ? vec3(*v, at(key)) : def;
    }

    std::optional<Section> child(const std::string& key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        return Section(*v, at(key));
    }

    void reject(const std::string& key, const std::string& why) {
        if (has(key)) fail(at(key), why);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto guarded(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

TorusGeometry read_geometry(std::optional<Section> s) {
    if (!s) return TorusGeometry::with_cutoff(8, kTwoPi);
    const int n = s->integer("n", 8);
    const double L = s->number("L", kTwoPi);
    if (n < 1) Section::fail(s->at("n"), "cutoff must be >= 1");
    if (!(L > 0.0)) Section::fail(s->at("L"), "side length must be > 0");
    TorusGeometry g = TorusGeometry::with_cutoff(n, L);
    g.grid_size = s->integer("grid_size", g.grid_size);
    g.padded_size = s->integer("padded_size", g.padded_size);
    s->finish();
    guarded("$.geometry", [&] {
        g.validate();
        return 0;
    });
    return g;
}

SigmaProfile read_profile(std::optional<Section> s) {
    if (!s) return SigmaProfile::prouse(0.5, 4.0, 2.0, 0.25, 0.25);
    const std::string kind = s->string("kind", "prouse");
    const double nu = s->number("nu", 0.5);
    if (kind == "prouse") {
        const double b = s->number("b", 4.0), K = s->number("K", 2.0);
        const double a1 = s->number("a1", 0.25), a2 = s->number("a2", 0.25);
        s->finish();
        return guarded("$.profile", [&] { return SigmaProfile::prouse(nu, b, K, a1, a2); });
    }
    if (kind != "linear" && kind != "pure_power") Section::fail(s->at("kind"), "unknown profile kind '" + kind + "'");
    for (const char* k : {"b", "K", "a1", "a2"}) s->reject(k, "not a parameter of the " + kind + " profile");
    s->finish();
    return guarded("$.profile", [&] {
        return kind == "linear" ? SigmaProfile::linear(nu) : SigmaProfile::pure_power(nu);
    });
}

NoiseSpec read_noise(std::optional<Section> s) {
    if (!s) return default_forcing(0.2);
    const std::string kind = s->string("kind", "additive");
    const NoiseKind nk = guarded(s->at("kind"), [&] { return noise_kind_from_string(kind); });
    std::vector<NoiseMode> modes;
    if (s->has("modes")) {
        s->reject("sigma", "give either modes or sigma (default shells), not both");
        const json* arr = s->raw("modes");
        if (!arr->is_array()) Section::fail(s->at("modes"), "expected an array");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string path = s->at("modes") + "[" + std::to_string(i) + "]";
            Section m((*arr)[i], path);
            const json* k = m.raw("k");
            if (!k) Section::fail(path + ".k", "missing");
            if (!k->is_array() || k->size() != 3) Section::fail(path + ".k", "expected three integers");
            NoiseMode mode;
            for (int c = 0; c < 3; ++c) {
                if (!(*k)[c].is_number_integer()) Section::fail(path + ".k", "expected three integers");
                mode.k[c] = (*k)[c].get<int>();
            }
            mode.j = m.integer("j", 1);
            if (!m.has("sigma")) Section::fail(path + ".sigma", "missing");
            mode.sigma = m.number("sigma", 0.0);
            m.finish();
            modes.push_back(mode);
        }
    } else {
        modes = default_forcing(s->number("sigma", 0.2)).modes();
    }
    s->finish();
    return guarded(s->at("modes"), [&] {
        return nk == NoiseKind::additive ? NoiseSpec::additive(modes) : NoiseSpec::multiplicative(modes);
    });
}

InitialCondition read_initial(std::optional<Section> s, const SpacePtr& space) {
    InitialCondition ic;
    ic.kind = InitialCondition::Kind::random;
    if (!s) return ic;
    const std::string kind = s->string("kind", "random");
    ic.kind = guarded(s->at("kind"), [&] { return initial_kind_from_string(kind); });
    using K = InitialCondition::Kind;
    if (ic.kind == K::single_mode) {
        if (const json* k = s->raw("k")) {
            if (!k->is_array() || k->size() != 3) Section::fail(s->at("k"), "expected three integers");
            for (int c = 0; c < 3; ++c) {
                if (!(*k)[c].is_number_integer()) Section::fail(s->at("k"), "expected three integers");
                ic.k[c] = (*k)[c].get<int>();
            }
        }
        ic.j = s->integer("j", 1);
        ic.amplitude = s->number("amplitude", 0.0);
        if (!space->find(ic.k) || ic.j < 1 || ic.j > 4) Section::fail(s->at("k"), "not a retained mode");
    } else if (ic.kind == K::prescribed) {
        ic.coeffs = s->numbers("coeffs", {});
        if (ic.coeffs.size() != space->dof())
            Section::fail(s->at("coeffs"), "expected " + std::to_string(space->dof()) + " coefficients, got " +
                                               std::to_string(ic.coeffs.size()));
    } else if (ic.kind == K::random) {
        ic.decay = s->number("decay", 2.0);
        ic.bound = s->number("bound", 1.0);
        if (!(ic.bound > 0.0)) Section::fail(s->at("bound"), "must be > 0");
    }
    s->finish();
    return ic;
}

std::vector<Vec3> read_vec3_list(Section& s, const std::string& key, std::vector<Vec3> def) {
    const json* v = s.raw(key);
    if (!v) return def;
    if (!v->is_array()) Section::fail(s.at(key), "expected an array of 3-vectors");
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(Section::vec3((*v)[i], s.at(key) + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::string> default_certify_names(const SigmaProfile& p) {
    std::vector<std::string> out;
    for (const std::string& n : certify_names()) {
        if (n == "lemma3" && p.kind() == SigmaKind::pure_power) continue;
        if (n == "lq_coercivity" && p.kind() != SigmaKind::pure_power && !p.growth()) continue;
        out.push_back(n);
    }
    return out;
}

DiagnosticsPlan read_plan(std::optional<Section> s, const SimConfig& sim) {
    DiagnosticsPlan d;
    const double L = sim.geometry.L;
    const double k1 = kTwoPi / L;
    d.certify.names = default_certify_names(sim.profile);
    d.structure.separations = {L / 40, L / 20, L / 10, L / 5, 2 * L / 5};
    d.structure.burn_in = burn_in_time(sim.profile.nu(), L);
    d.structure.window = d.structure.burn_in;
    d.structure.base_points = sim.geometry.grid_size;
    d.scaling.base_points = sim.geometry.grid_size;
    (void)k1;
    if (!s) return d;

    d.ensemble_size = s->unsigned_int("ensemble_size", d.ensemble_size);
    if (d.ensemble_size < 1) Section::fail(s->at("ensemble_size"), "must be >= 1");
    d.moment_p = s->number("moment_p", d.moment_p);
    if (!(d.moment_p >= 1.0)) Section::fail(s->at("moment_p"), "must be >= 1");
    d.checkpoint_every = s->unsigned_int("checkpoint_every", 0);

    if (auto c = s->child("certify")) {
        if (const json* names = c->raw("names")) {
            if (!names->is_array()) Section::fail(c->at("names"), "expected an array of strings");
            d.certify.names.clear();
            for (std::size_t i = 0; i < names->size(); ++i) {
                const std::string path = c->at("names") + "[" + std::to_string(i) + "]";
                if (!(*names)[i].is_string()) Section::fail(path, "expected a string");
                const std::string n = (*names)[i].get<std::string>();
                const auto& all = certify_names();
                if (std::find(all.begin(), all.end(), n) == all.end()) Section::fail(path, "unknown inequality '" + n + "'");
                d.certify.names.push_back(n);
            }
        }
        d.certify.trials = c->unsigned_int("trials", d.certify.trials);
        if (d.certify.trials < 1) Section::fail(c->at("trials"), "must be >= 1");
        d.certify.seed = c->unsigned_int("seed", d.certify.seed);
        d.certify.decay = c->number("decay", d.certify.decay);
        d.certify.min_amplitude = c->number("min_amplitude", d.certify.min_amplitude);
        d.certify.max_amplitude = c->number("max_amplitude", d.certify.max_amplitude);
        if (!(d.certify.min_amplitude > 0.0) || d.certify.max_amplitude < d.certify.min_amplitude)
            Section::fail(c->at("min_amplitude"), "amplitudes must satisfy 0 < min <= max");
        c->finish();
    }
    if (auto u = s->child("uniqueness")) {
        d.uniqueness.pairs = u->unsigned_int("pairs", d.uniqueness.pairs);
        if (d.uniqueness.pairs < 1) Section::fail(u->at("pairs"), "must be >= 1");
        d.uniqueness.initial_bound = u->number("initial_bound", d.uniqueness.initial_bound);
        d.uniqueness.tolerance = u->number("tolerance", d.uniqueness.tolerance);
        d.uniqueness.cb_trials = u->unsigned_int("cb_trials", d.uniqueness.cb_trials);
        if (d.uniqueness.cb_trials < 100) Section::fail(u->at("cb_trials"), "must be >= 100");
        d.uniqueness.C_B = u->optional_number("C_B", std::nullopt);
        u->finish();
    }
    if (auto c = s->child("scaling")) {
        d.scaling.lambda = c->number("lambda", d.scaling.lambda);
        d.scaling.ensemble = c->unsigned_int("ensemble", d.scaling.ensemble);
        if (d.scaling.ensemble < 1) Section::fail(c->at("ensemble"), "must be >= 1");
        d.scaling.point = c->vector3("point", d.scaling.point);
        d.scaling.psi = read_vec3_list(*c, "psi", d.scaling.psi);
        d.scaling.orders = c->numbers("orders", d.scaling.orders);
        d.scaling.base_points = c->integer("base_points", d.scaling.base_points);
        if (d.scaling.base_points < 1) Section::fail(c->at("base_points"), "must be >= 1");
        const double m = std::round(1.0 / d.scaling.lambda);
        if (!(d.scaling.lambda > 0.0) || std::abs(1.0 / d.scaling.lambda - m) > 1e-12 * m || m > 4)
            Section::fail(c->at("lambda"), "must be one of 1, 1/2, 1/3, 1/4");
        c->finish();
    }
    if (auto c = s->child("structure")) {
        d.structure.direction = c->vector3("direction", d.structure.direction);
        d.structure.separations = c->numbers("separations", d.structure.separations);
        for (std::size_t i = 0; i < d.structure.separations.size(); ++i)
            if (!(d.structure.separations[i] > 0.0) || d.structure.separations[i] >= 0.5 * L)
                Section::fail(c->at("separations") + "[" + std::to_string(i) + "]", "must lie in (0, L/2)");
        d.structure.orders = c->numbers("orders", d.structure.orders);
        d.structure.base_points = c->integer("base_points", d.structure.base_points);
        if (d.structure.base_points < 1) Section::fail(c->at("base_points"), "must be >= 1");
        d.structure.burn_in = c->number("burn_in", d.structure.burn_in);
        d.structure.window = c->number("window", d.structure.window);
        if (!(d.structure.window > 0.0)) Section::fail(c->at("window"), "must be > 0");
        d.structure.sample_every = c->unsigned_int("sample_every", d.structure.sample_every);
        if (d.structure.sample_every < 1) Section::fail(c->at("sample_every"), "must be >= 1");
        d.structure.batches = c->unsigned_int("batches", d.structure.batches);
        if (d.structure.batches < 2) Section::fail(c->at("batches"), "must be >= 2");
        c->finish();
    }
    s->finish();
    return d;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

RunConfig parse_config(const json& doc) {
    Section root(doc, "$");
    RunConfig rc;
    SimConfig& c = rc.sim;
    c.geometry = read_geometry(root.child("geometry"));
    c.profile = read_profile(root.child("profile"));
    c.noise = read_noise(root.child("noise"));
    const SpacePtr space = SpectralSpace::create(c.geometry);
    guarded("$.noise.modes", [&] { return c.noise.bind(*space); });

    auto integ = root.child("integration");
    if (integ) {
        Section& s = *integ;
        c.dt = s.number("dt", c.dt);
        c.T = s.number("T", c.T);
        c.scheme = guarded(s.at("scheme"), [&] { return scheme_from_string(s.string("scheme", "semi_implicit_em")); });
        c.R = s.optional_number("R", std::nullopt);
        c.seed = s.unsigned_int("seed", 0);
        c.nu0 = s.number("nu0", c.profile.nu());
        c.stability_c = s.number("stability_c", c.stability_c);
        c.override_stability = s.boolean("override_stability", false);
        c.snapshot_every = s.unsigned_int("snapshot_every", 0);
        c.initial = read_initial(s.child("initial_condition"), space);
        s.finish();
    } else {
        c.nu0 = c.profile.nu();
        c.initial = read_initial(std::nullopt, space);
    }
    try {
        c.validate();
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        const std::string path = msg.find("dt") != std::string::npos ? "$.integration.dt"
                                 : msg.find("T ") != std::string::npos || msg.find(".T") != std::string::npos
                                     ? "$.integration.T"
                                     : "$.integration";
        throw ConfigError(path + ": " + msg);
    }
    rc.plan = read_plan(root.child("diagnostics"), c);
    root.finish();
    return rc;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("$: invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json echo_config(const RunConfig& rc) {
    const SimConfig& c = rc.sim;
    json j;
    j["geometry"] = {{"n", c.geometry.n},
                     {"L", c.geometry.L},
                     {"grid_size", c.geometry.grid_size},
                     {"padded_size", c.geometry.padded_size}};
    const SigmaProfile& p = c.profile;
    if (p.kind() == SigmaKind::pure_power)
        j["profile"] = {{"kind", "pure_power"}, {"nu", p.nu()}};
    else if (p.is_linear())
        j["profile"] = {{"kind", "linear"}, {"nu", p.nu()}};
    else
        j["profile"] = {{"kind", "prouse"}, {"nu", p.nu()}, {"b", p.b()}, {"K", p.K()}, {"a1", p.a1()}, {"a2", p.a2()}};
    json modes = json::array();
    for (const NoiseMode& m : c.noise.modes())
        modes.push_back({{"k", {m.k[0], m.k[1], m.k[2]}}, {"j", m.j}, {"sigma", m.sigma}});
    j["noise"] = {{"kind", to_string(c.noise.kind())}, {"modes", modes}};

    json ic = {{"kind", to_string(c.initial.kind)}};
    switch (c.initial.kind) {
    case InitialCondition::Kind::single_mode:
        ic["k"] = {c.initial.k[0], c.initial.k[1], c.initial.k[2]};
        ic["j"] = c.initial.j;
        ic["amplitude"] = c.initial.amplitude;
        break;
    case InitialCondition::Kind::prescribed: ic["coeffs"] = c.initial.coeffs; break;
    case InitialCondition::Kind::random:
        ic["decay"] = c.initial.decay;
        ic["bound"] = c.initial.bound;
        break;
    case InitialCondition::Kind::zero: break;
    }
    j["integration"] = {{"dt", c.dt},
                        {"T", c.T},
                        {"scheme", to_string(c.scheme)},
                        {"R", c.R ? json(*c.R) : json(nullptr)},
                        {"seed", c.seed},
                        {"nu0", c.floor()},
                        {"stability_c", c.stability_c},
                        {"override_stability", c.override_stability},
                        {"snapshot_every", c.snapshot_every},
                        {"initial_condition", ic}};

    const DiagnosticsPlan& d = rc.plan;
    json psi = json::array();
    for (const Vec3& v : d.scaling.psi) psi.push_back(vec_json(v));
    j["diagnostics"] = {
        {"ensemble_size", d.ensemble_size},
        {"moment_p", d.moment_p},
        {"checkpoint_every", d.checkpoint_every},
        {"certify",
         {{"names", d.certify.names},
          {"trials", d.certify.trials},
          {"seed", d.certify.seed},
          {"decay", d.certify.decay},
          {"min_amplitude", d.certify.min_amplitude},
          {"max_amplitude", d.certify.max_amplitude}}},
        {"uniqueness",
         {{"pairs", d.uniqueness.pairs},
          {"initial_bound", d.uniqueness.initial_bound},
          {"tolerance", d.uniqueness.tolerance},
          {"cb_trials", d.uniqueness.cb_trials},
          {"C_B", d.uniqueness.C_B ? json(*d.uniqueness.C_B) : json(nullptr)}}},
        {"scaling",
         {{"lambda", d.scaling.lambda},
          {"ensemble", d.scaling.ensemble},
          {"point", vec_json(d.scaling.point)},
          {"psi", psi},
          {"orders", d.scaling.orders},
          {"base_points", d.scaling.base_points}}},
        {"structure",
         {{"direction", vec_json(d.structure.direction)},
          {"separations", d.structure.separations},
          {"orders", d.structure.orders},
          {"base_points", d.structure.base_points},
          {"burn_in", d.structure.burn_in},
          {"window", d.structure.window},
          {"sample_every", d.structure.sample_every},
          {"batches", d.structure.batches}}}};
    return j;
}

std::uint64_t config_digest(const RunConfig& config) {
    const std::string s = echo_config(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace psns
