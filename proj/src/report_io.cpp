#include "psns/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace psns {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trajectory_csv(const TrajectoryRecord& rec, const SigmaProfile& profile) {
    std::string out = "t,h,v,l1b,stopped\n";
    const double q = 1.0 + profile.b();
    if (rec.series.size() < 2 && !rec.stopped) return out;
    for (std::size_t i = 0; i < rec.series.size(); ++i) {
        const StepSample& s = rec.series[i];
        const bool stop_row = rec.stopped && i + 1 == rec.series.size();
        out += format_double(s.t) + "," + format_double(std::sqrt(s.norms.energy)) + "," +
               format_double(std::sqrt(s.norms.enstrophy)) + "," + format_double(std::pow(s.norms.lq_pow, 1.0 / q)) +
               "," + (stop_row ? "1" : "0") + "\n";
    }
    return out;
}

std::string structure_csv(const StructureFunctionTable& t) {
    std::string out = "separation,p,mean,stderr,count\n";
    for (std::size_t i = 0; i < t.separations.size(); ++i)
        for (std::size_t j = 0; j < t.orders.size(); ++j) {
            const MomentEstimate& m = t.S[i][j];
            out += format_double(t.separations[i]) + "," + format_double(t.orders[j]) + "," + format_double(m.mean) +
                   "," + format_double(m.stderr_) + "," + std::to_string(m.count) + "\n";
        }
    return out;
}

json to_json(const MomentEstimate& m) {
    return {{"mean", m.mean}, {"stderr", m.stderr_}, {"count", m.count}, {"finite", m.finite}};
}

json to_json(const EnsembleSummary& s) {
    return {{"p", s.p},
            {"sup_h_pow", to_json(s.sup_h_pow)},
            {"int_v", to_json(s.int_v)},
            {"int_lq", to_json(s.int_lq)},
            {"members", s.members},
            {"completed", s.completed},
            {"stopped", s.stopped},
            {"failures", s.failures}};
}

json to_json(const InequalityReport& r) {
    json j = {{"name", r.name},
              {"samples", r.samples},
              {"worst_margin", r.worst_margin},
              {"tolerance", r.tolerance},
              {"pass", r.pass},
              {"worst_index", r.worst_index},
              {"worst_seed", r.worst_seed}};
    if (r.constant) j[r.constant_name] = *r.constant;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

json to_json(const ContractionRecord& r) {
    return {{"times", r.times},         {"theta", r.theta},     {"weighted", r.weighted},
            {"dissipation", r.dissipation}, {"initial", r.initial}, {"slack", r.slack},
            {"functional", r.functional()}};
}

json to_json(const ContractionVerdict& v) {
    json pairs = json::array();
    for (const ContractionRecord& r : v.pairs) pairs.push_back(to_json(r));
    return {{"lhs", to_json(v.lhs)},
            {"rhs", v.rhs},
            {"tolerance", v.tolerance},
            {"slack", v.slack},
            {"max_mean_increment", v.max_mean_increment},
            {"pass", v.pass},
            {"pairs", pairs}};
}

json to_json(const StationarityVerdict& v) {
    return {{"holds", v.holds}, {"margin", v.margin}, {"condition", v.condition}};
}

json to_json(const DriftTest& d) {
    return {{"first", to_json(d.first)},
            {"second", to_json(d.second)},
            {"relative_drift", d.relative_drift},
            {"z", d.z},
            {"pass", d.pass}};
}

json to_json(const PowerLawFit& f) {
    return {{"p", f.p},
            {"zeta", f.zeta},
            {"zeta_stderr", f.zeta_stderr},
            {"k", f.k},
            {"residual", f.residual},
            {"reference", f.reference},
            {"points", f.points},
            {"warnings", f.warnings}};
}

json to_json(const PathwiseScaling& p) {
    return {{"coarse", p.coarse}, {"fine", p.fine}, {"ratio", p.ratio}, {"pass", p.pass}};
}

json to_json(const ScalingReport& r) {
    json rows = json::array();
    for (const MomentIdentityRow& row : r.rows)
        rows.push_back({{"psi", row.psi},
                        {"p", row.p},
                        {"base", to_json(row.base)},
                        {"scaled", to_json(row.scaled)},
                        {"z", row.z},
                        {"pass", row.pass}});
    return {{"lambda", r.lambda}, {"rows", rows}, {"pass", r.pass}};
}

namespace {

std::string wall_time() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

OutputDir::OutputDir(std::filesystem::path dir, json config, std::uint64_t digest)
    : dir_(std::move(dir)), config_(std::move(config)), digest_(digest), start_(wall_time()) {
    std::filesystem::create_directories(dir_);
}

void OutputDir::write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    for (auto& f : files_)
        if (f.first == name) {
            f.second = fnv1a64(content);
            return;
        }
    files_.emplace_back(name, fnv1a64(content));
}

void OutputDir::record(const std::string& name) {
    const std::uint64_t h = fnv1a64(read_file(dir_ / name));
    for (auto& f : files_)
        if (f.first == name) {
            f.second = h;
            return;
        }
    files_.emplace_back(name, h);
}

void OutputDir::finish(bool partial, const std::string& command, int exit_code) {
    json files = json::array();
    for (const auto& [name, h] : files_) files.push_back({{"name", name}, {"fnv1a64", hex64(h)}});
    const json m = {{"command", command},
                    {"tool_version", kToolVersion},
                    {"config_digest", hex64(digest_)},
                    {"config", config_},
                    {"seeds", seeds_},
                    {"start", start_},
                    {"end", wall_time()},
                    {"exit_code", exit_code},
                    {"partial", partial},
                    {"files", files}};
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace psns
