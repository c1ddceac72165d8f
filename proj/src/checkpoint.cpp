#include "psns/checkpoint.hpp"
#include "psns/report_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace psns {

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

namespace {

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}

    template <class T>
    T get(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, s_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string out = s_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == s_.size(); }

private:
    void need(std::size_t n, const char* what) const {
        if (s_.size() - pos_ < n) throw CheckpointError(std::string("truncated checkpoint while reading ") + what);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Checkpoint Checkpoint::from_state(const TorusGeometry& g, const SimState& s) {
    return {g.n, g.L, s.coeffs, s.rng_state, s.t};
}

SimState Checkpoint::to_state(double dt) const {
    SimState s;
    s.coeffs = coeffs;
    s.t = t;
    s.step = static_cast<std::size_t>(std::llround(t / dt));
    s.rng_state = rng_state;
    return s;
}

void Checkpoint::check_geometry(const TorusGeometry& g) const {
    if (n != g.n || L != g.L)
        throw CheckpointError("checkpoint geometry (n=" + std::to_string(n) + ", L=" + format_double(L) +
                              ") does not match the configuration (n=" + std::to_string(g.n) +
                              ", L=" + format_double(g.L) + ")");
    if (coeffs.size() != SpectralSpace::create(g)->dof())
        throw CheckpointError("checkpoint coefficient count does not match the configuration");
}

std::string encode_checkpoint(const Checkpoint& c) {
    std::string out = "PSNS";
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.n));
    put<double>(out, c.L);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.coeffs.size()));
    for (double x : c.coeffs) put<double>(out, x);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.rng_state.size()));
    out += c.rng_state;
    put<double>(out, c.t);
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    if (r.bytes(4, "magic") != "PSNS") throw CheckpointError("not a checkpoint: bad magic bytes");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    c.n = static_cast<int>(r.get<std::uint32_t>("n"));
    c.L = r.get<double>("L");
    const auto count = r.get<std::uint32_t>("coefficient count");
    if (count > (bytes.size() / 8)) throw CheckpointError("truncated checkpoint while reading coefficients");
    c.coeffs.resize(count);
    for (double& x : c.coeffs) x = r.get<double>("coefficients");
    const auto len = r.get<std::uint32_t>("rng length");
    c.rng_state = r.bytes(len, "rng state");
    c.t = r.get<double>("time");
    if (!r.done()) throw CheckpointError("trailing bytes after checkpoint");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_atomic(path, encode_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path));
}

}  // namespace psns
