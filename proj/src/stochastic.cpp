#include "psns/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace psns {

namespace {

std::string mode_name(const Lattice& k, int j) {
    return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) + ";" +
           std::to_string(j) + ")";
}

Lattice fold(const Lattice& k) { return half_space_contains(k) ? k : Lattice{-k[0], -k[1], -k[2]}; }

}  // namespace

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::additive ? "additive" : "diagonal_multiplicative";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "additive") return NoiseKind::additive;
    if (name == "diagonal_multiplicative") return NoiseKind::diagonal_multiplicative;
    throw std::invalid_argument("unknown noise kind '" + name + "'");
}

double default_mult_gain(double a) { return a / (1.0 + std::abs(a)); }

void NoiseSpec::validate() const {
    std::set<std::pair<Lattice, int>> seen;
    for (const NoiseMode& m : modes_) {
        if (!half_space_contains(m.k)) throw std::invalid_argument("noise mode " + mode_name(m.k, m.j) + " is not in Z3+");
        if (m.j < 1 || m.j > 4) throw std::invalid_argument("noise mode " + mode_name(m.k, m.j) + ": j must be in 1..4");
        if (!std::isfinite(m.sigma)) throw std::invalid_argument("noise mode " + mode_name(m.k, m.j) + ": sigma not finite");
        if (!seen.insert({m.k, m.j}).second) throw std::invalid_argument("duplicate noise mode " + mode_name(m.k, m.j));
    }
}

double NoiseSpec::sum_sigma_sq() const {
    double s = 0.0;
    for (const NoiseMode& m : modes_) s += m.sigma * m.sigma;
    return s;
}

NoiseSpec NoiseSpec::additive(std::vector<NoiseMode> modes) {
    NoiseSpec s;
    s.kind_ = NoiseKind::additive;
    s.modes_ = std::move(modes);
    s.validate();
    s.rho_ = s.sum_sigma_sq();
    return s;
}

NoiseSpec NoiseSpec::multiplicative(std::vector<NoiseMode> modes, std::function<double(double)> gain) {
    NoiseSpec s;
    s.kind_ = NoiseKind::diagonal_multiplicative;
    s.modes_ = std::move(modes);
    s.gain_ = std::move(gain);
    s.validate();
    s.rho_ = s.sum_sigma_sq();
    double mx = 0.0;
    for (const NoiseMode& m : s.modes_) mx = std::max(mx, m.sigma * m.sigma);
    s.lipschitz_ = mx;
    return s;
}

void NoiseSpec::certify_multiplicative(const SpacePtr& space, Rng& rng, int samples) {
    if (kind_ == NoiseKind::additive) return;
    bind(*space);
    FieldSampler sampler{space, 1.0, 1e-3, 1e2};
    double lam0 = 0.0, lip = 0.0;
    for (int i = 0; i < samples; ++i) {
        const SpectralField v = sampler.draw(rng);
        const SpectralField z = sampler.draw(rng);
        const double h2 = inner_h(v, v);
        lam0 = std::max(lam0, (hs_norm_squared(*this, v) - rho_) / h2);
        const double d = norm_vprime(v - z);
        if (d > 0.0) lip = std::max(lip, hs_difference_vprime(*this, v, z) / (d * d));
    }
    lambda0_ = lam0;
    lipschitz_ = lip;
}

std::vector<std::size_t> NoiseSpec::bind(const SpectralSpace& space) const {
    std::vector<std::size_t> out;
    out.reserve(modes_.size());
    for (const NoiseMode& m : modes_) {
        const auto ik = space.find(m.k);
        if (!ik) throw std::invalid_argument("noise mode " + mode_name(m.k, m.j) + " lies outside the truncation |k| <= " +
                                             std::to_string(space.cutoff()));
        out.push_back(SpectralSpace::coefficient_index(*ik, m.j));
    }
    return out;
}

NoiseSpec NoiseSpec::scaled(double factor) const {
    NoiseSpec s = *this;
    for (NoiseMode& m : s.modes_) m.sigma *= factor;
    s.rho_ *= factor * factor;
    s.lambda0_ *= factor * factor;
    s.lipschitz_ *= factor * factor;
    return s;
}

NoiseSpec default_forcing(double sigma) {
    std::vector<NoiseMode> modes;
    for (int a = 0; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
            for (int c = -2; c <= 2; ++c) {
                const Lattice k{a, b, c};
                const int k2 = norm_sq(k);
                if (!half_space_contains(k) || k2 < 1 || k2 > 4) continue;
                for (int j = 1; j <= 4; ++j) modes.push_back({k, j, sigma});
            }
    return NoiseSpec::additive(std::move(modes));
}

NoiseStream::NoiseStream(std::uint64_t seed) : engine_(seed) {}

void NoiseStream::sample_increments(double dt, std::span<double> out) {
    if (!(dt > 0.0)) throw std::invalid_argument("increment step dt must be > 0");
    const double s = std::sqrt(dt);
    for (double& x : out) x = s * normal_(engine_);
}

std::vector<double> NoiseStream::sample_increments(std::size_t modes, double dt) {
    std::vector<double> out(modes);
    sample_increments(dt, out);
    return out;
}

std::string NoiseStream::save_state() const {
    std::ostringstream os;
    os << engine_ << '\n' << normal_;
    return os.str();
}

void NoiseStream::load_state(const std::string& blob) {
    std::istringstream is(blob);
    is >> engine_ >> normal_;
    if (!is) throw std::runtime_error("corrupt random generator state");
}

SpectralField apply_G(const NoiseSpec& spec, const SpectralField& u, std::span<const double> incr) {
    SpectralField out(u.space_ptr());
    add_G(spec, spec.bind(u.space()), u, incr, out);
    return out;
}

void add_G(const NoiseSpec& spec, std::span<const std::size_t> binding, const SpectralField& u,
           std::span<const double> incr, SpectralField& target) {
    if (incr.size() != spec.size()) throw std::invalid_argument("increment count does not match the active modes");
    const auto& modes = spec.modes();
    auto a = u.coeffs();
    auto out = target.coeffs();
    if (spec.kind() == NoiseKind::additive) {
        for (std::size_t m = 0; m < modes.size(); ++m) out[binding[m]] += modes[m].sigma * incr[m];
    } else {
        for (std::size_t m = 0; m < modes.size(); ++m)
            out[binding[m]] += modes[m].sigma * spec.gain(a[binding[m]]) * incr[m];
    }
}

double hs_norm_squared(const NoiseSpec& spec, const SpectralField& u) {
    if (spec.kind() == NoiseKind::additive) return spec.sum_sigma_sq();
    const auto binding = spec.bind(u.space());
    double s = 0.0;
    for (std::size_t m = 0; m < spec.size(); ++m) {
        const double g = spec.modes()[m].sigma * spec.gain(u.coeffs()[binding[m]]);
        s += g * g;
    }
    return s;
}

double hs_difference_vprime(const NoiseSpec& spec, const SpectralField& v, const SpectralField& z) {
    if (spec.kind() == NoiseKind::additive) return 0.0;
    const auto binding = spec.bind(v.space());
    double s = 0.0;
    for (std::size_t m = 0; m < spec.size(); ++m) {
        const std::size_t c = binding[m];
        const double d = spec.modes()[m].sigma * (spec.gain(v.coeffs()[c]) - spec.gain(z.coeffs()[c]));
        s += d * d / v.space().eigenvalue(c / 4);
    }
    return s;
}

double energy_injection_rate(const NoiseSpec& spec, double L) { return spec.sum_sigma_sq() / (L * L * L); }

SymmetryReport homogeneity_check(const NoiseSpec& spec, double tol) {
    std::map<std::pair<Lattice, int>, double> sig;
    for (const NoiseMode& m : spec.modes()) sig[{m.k, m.j}] = std::abs(m.sigma);
    SymmetryReport r;
    for (const auto& [key, s] : sig) {
        const auto& [k, j] = key;
        const int partner = j <= 2 ? j + 2 : j - 2;
        auto it = sig.find({k, partner});
        const double other = it == sig.end() ? 0.0 : it->second;
        if (std::abs(s - other) > tol * std::max(1.0, s)) {
            r.pass = false;
            r.violations.push_back("mode " + mode_name(k, j) + " |sigma| = " + std::to_string(s) +
                                   " unmatched by " + mode_name(k, partner) + " |sigma| = " + std::to_string(other));
        }
    }
    return r;
}

const std::vector<std::array<Lattice, 3>>& cube_rotations() {
    static const std::vector<std::array<Lattice, 3>> rotations = [] {
        std::vector<std::array<Lattice, 3>> out;
        std::array<int, 3> perm{0, 1, 2};
        do {
            for (int signs = 0; signs < 8; ++signs) {
                std::array<Lattice, 3> m{};
                for (int r = 0; r < 3; ++r) m[r][perm[r]] = (signs >> r) & 1 ? -1 : 1;
                const int det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                                m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                                m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                if (det == 1) out.push_back(m);
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }();
    return rotations;
}

SymmetryReport isotropy_check(const NoiseSpec& spec, double tol) {
    std::map<std::pair<Lattice, int>, double> sig;
    for (const NoiseMode& m : spec.modes()) sig[{m.k, m.j}] = std::abs(m.sigma);
    SymmetryReport r;
    for (const auto& rot : cube_rotations()) {
        for (const auto& [key, s] : sig) {
            const auto& [k, j] = key;
            Lattice rk{};
            for (int a = 0; a < 3; ++a) rk[a] = rot[a][0] * k[0] + rot[a][1] * k[1] + rot[a][2] * k[2];
            rk = fold(rk);
            auto it = sig.find({rk, j});
            const double other = it == sig.end() ? 0.0 : it->second;
            if (std::abs(s - other) > tol * std::max(1.0, s)) {
                r.pass = false;
                r.violations.push_back("rotation maps " + mode_name(k, j) + " (|sigma| = " + std::to_string(s) + ") to " +
                                       mode_name(rk, j) + " (|sigma| = " + std::to_string(other) + ")");
            }
        }
    }
    return r;
}

BrownianPath BrownianPath::generate(std::size_t modes, double dt, std::size_t steps, std::uint64_t seed) {
    BrownianPath p;
    p.dt = dt;
    p.modes = modes;
    p.seed = seed;
    p.increments.resize(modes * steps);
    NoiseStream stream(seed);
    for (std::size_t s = 0; s < steps; ++s)
        stream.sample_increments(dt, std::span<double>(p.increments.data() + s * modes, modes));
    return p;
}

double BrownianPath::value(std::size_t s, std::size_t m) const {
    double v = 0.0;
    for (std::size_t i = 0; i < s; ++i) v += increments[i * modes + m];
    return v;
}

BrownianPath BrownianPath::coarsen(std::size_t factor) const {
    if (factor == 0) throw std::invalid_argument("coarsen factor must be >= 1");
    BrownianPath p;
    p.dt = dt * double(factor);
    p.modes = modes;
    p.seed = seed;
    const std::size_t out_steps = steps() / factor;
    p.increments.assign(out_steps * modes, 0.0);
    for (std::size_t s = 0; s < out_steps; ++s)
        for (std::size_t i = 0; i < factor; ++i)
            for (std::size_t m = 0; m < modes; ++m) p.increments[s * modes + m] += increments[(s * factor + i) * modes + m];
    return p;
}

BrownianPath rescaled_path(const BrownianPath& path, double lambda, double dt_target) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("rescaled_path: lambda must lie in (0,1]");
    if (!(dt_target > 0.0)) throw std::invalid_argument("rescaled_path: dt must be > 0");
    const double span = std::pow(lambda, 2.0 / 3.0) * dt_target;
    const double ratio = span / path.dt;
    const double m = std::round(ratio);
    if (m < 1.0 || std::abs(ratio - m) > 1e-9 * ratio) {
        std::ostringstream os;
        os.precision(17);
        os << "rescaled_path: lambda^(2/3)*dt = " << span << " is not a multiple of the stored step " << path.dt
           << "; generate the master path with dt_fine = " << span << " (or an integer fraction of it)";
        throw std::invalid_argument(os.str());
    }
    const std::size_t factor = static_cast<std::size_t>(m);
    BrownianPath out = path.coarsen(factor);
    out.dt = dt_target;
    const double scale = std::pow(lambda, -1.0 / 3.0);
    if (scale != 1.0)
        for (double& x : out.increments) x *= scale;
    return out;
}

}  // namespace psns
