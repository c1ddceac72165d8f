#include "doctest.h"

#include "psns/checkpoint.hpp"
#include "psns/config.hpp"
#include "psns/report_io.hpp"

#include <cmath>
#include <filesystem>

using namespace psns;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "psns_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal document echoes every default") {
    const RunConfig rc = parse_config_text(R"({"profile":{"kind":"pure_power","nu":0.1}})");
    const json e = echo_config(rc);
    CHECK(e["profile"] == json({{"kind", "pure_power"}, {"nu", 0.1}}));
    CHECK(e["geometry"]["n"] == 8);
    CHECK(e["geometry"]["L"].get<double>() == doctest::Approx(kTwoPi));
    CHECK(e["geometry"]["grid_size"] == 18);
    CHECK(e["geometry"]["padded_size"] == 54);
    CHECK(e["noise"]["kind"] == "additive");
    CHECK(e["noise"]["modes"].size() == default_forcing(0.2).size());
    CHECK(e["integration"]["dt"] == 1e-3);
    CHECK(e["integration"]["scheme"] == "semi_implicit_em");
    CHECK(e["integration"]["nu0"] == 0.1);
    CHECK(e["integration"]["R"].is_null());
    CHECK(e["integration"]["initial_condition"]["kind"] == "random");
    CHECK(e["diagnostics"]["structure"]["burn_in"].get<double>() == doctest::Approx(50.0));
    CHECK(e["diagnostics"]["structure"]["separations"].size() == 5);
    // lemma3 needs the linear floor the pure power law lacks
    const auto names = e["diagnostics"]["certify"]["names"].get<std::vector<std::string>>();
    CHECK(std::find(names.begin(), names.end(), "lemma3") == names.end());
    CHECK(std::find(names.begin(), names.end(), "lemma3_weak") != names.end());
}

TEST_CASE("echo is idempotent") {
    for (const char* doc : {R"({})", R"({"profile":{"kind":"pure_power","nu":0.1}})",
                            R"({"geometry":{"n":3,"L":2.5},"profile":{"kind":"linear","nu":0.7},
                                "noise":{"kind":"diagonal_multiplicative","modes":[{"k":[1,0,0],"j":2,"sigma":0.3}]},
                                "integration":{"dt":0.01,"T":0.3,"R":4,"seed":18446744073709551615,
                                               "initial_condition":{"kind":"single_mode","k":[0,1,0],"j":3,"amplitude":0.1}},
                                "diagnostics":{"uniqueness":{"C_B":2.5},"scaling":{"lambda":0.25}}})"}) {
        const json once = echo_config(parse_config_text(doc));
        const json twice = echo_config(parse_config(once));
        CHECK(once == twice);
        CHECK(config_digest(parse_config(once)) == config_digest(parse_config(twice)));
    }
    const RunConfig rc = parse_config_text(R"({"integration":{"seed":18446744073709551615}})");
    CHECK(rc.sim.seed == 18446744073709551615ULL);
}

TEST_CASE("schema and hypothesis errors carry the JSON path") {
    const std::string b3 = config_error(R"({"profile":{"kind":"prouse","b":3}})");
    CHECK(contains(b3, "$.profile"));
    CHECK(contains(b3, "b >= 4"));
    CHECK(contains(config_error(R"({"noise":{"modes":[{"k":[1,0,0],"j":1,"sigma":0.1},{"k":[1,0,0],"j":1,"sigma":0.2}]}})"),
                   "$.noise.modes"));
    CHECK(contains(config_error(R"({"noise":{"modes":[{"k":[1,0,0],"j":1,"sigma":0.1}]},"integration":{"oops":1}})"),
                   "$.integration.oops: unknown key"));
    CHECK(contains(config_error(R"({"geometry":{"n":"eight"}})"), "$.geometry.n"));
    CHECK(contains(config_error(R"({"profile":{"kind":"linear","b":5}})"), "$.profile.b"));
    CHECK(contains(config_error(R"({"profile":{"kind":"cubic"}})"), "$.profile.kind"));
    CHECK(contains(config_error(R"({"geometry":{"n":1},"noise":{"modes":[{"k":[2,0,0],"j":1,"sigma":1}]}})"),
                   "$.noise.modes"));
    CHECK(contains(config_error(R"({"integration":{"dt":0.5,"scheme":"explicit_em"}})"), "$.integration.dt"));
    CHECK(contains(config_error(R"({"diagnostics":{"scaling":{"lambda":0.2}}})"), "$.diagnostics.scaling.lambda"));
    CHECK(contains(config_error(R"({"diagnostics":{"certify":{"names":["nope"]}}})"), "$.diagnostics.certify.names[0]"));
    CHECK(contains(config_error("{"), "invalid JSON"));
    CHECK(contains(config_error("[]"), "$: expected an object"));
}

TEST_CASE("checkpoint bytes round-trip") {
    const TorusGeometry g = TorusGeometry::with_cutoff(2);
    const SpacePtr space = SpectralSpace::create(g);
    Rng rng(5);
    SimState s;
    s.coeffs = gaussian_field(space, rng, 1.0).values();
    s.coeffs[3] = -0.0;
    s.t = 0.123;
    NoiseStream stream(99);
    stream.sample_increments(4, 0.1);
    s.rng_state = stream.save_state();

    const Checkpoint c = Checkpoint::from_state(g, s);
    const std::string bytes = encode_checkpoint(c);
    CHECK(bytes.substr(0, 4) == "PSNS");
    CHECK(bytes.size() == 4 + 4 + 4 + 8 + 4 + 8 * s.coeffs.size() + 4 + s.rng_state.size() + 8);
    CHECK(encode_checkpoint(decode_checkpoint(bytes)) == bytes);

    const auto path = scratch("roundtrip.bin");
    save_checkpoint(path, c);
    CHECK(read_file(path) == bytes);
    const Checkpoint back = load_checkpoint(path);
    CHECK(std::signbit(back.coeffs[3]));
    save_checkpoint(path, back);
    CHECK(read_file(path) == bytes);
    CHECK(back.to_state(0.001).step == 123);
    CHECK_NOTHROW(back.check_geometry(g));
    CHECK_THROWS_AS(back.check_geometry(TorusGeometry::with_cutoff(3)), CheckpointError);

    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains("magic"), CheckpointError);
    bad = bytes;
    bad[4] = 7;
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains("version"), CheckpointError);
    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1})
        CHECK_THROWS_WITH_AS(decode_checkpoint(bytes.substr(0, cut)), doctest::Contains("truncated"), CheckpointError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), CheckpointError);
}

TEST_CASE("resume from a saved checkpoint equals the uninterrupted run") {
    RunConfig rc = parse_config_text(R"({"geometry":{"n":2},"integration":{"dt":0.002,"T":0.05,"seed":77}})");
    const SimConfig& c = rc.sim;
    const TrajectoryRecord full = run_trajectory(c);

    const auto path = scratch("resume.bin");
    RunOptions ro;
    ro.checkpoint_every = 10;
    int saved = 0;
    ro.on_checkpoint = [&](const SimState& s) {
        if (s.step == 10) save_checkpoint(path, Checkpoint::from_state(c.geometry, s)), ++saved;
    };
    run_trajectory(c, ro);
    REQUIRE(saved == 1);

    RunOptions resume;
    const Checkpoint cp = load_checkpoint(path);
    resume.resume = cp.to_state(c.dt);
    CHECK(resume.resume->step == 10);
    const TrajectoryRecord tail = run_trajectory(c, resume);
    CHECK(tail.final_coeffs == full.final_coeffs);
    CHECK(tail.final_time == full.final_time);
    REQUIRE(tail.series.size() == full.series.size() - 10);
    CHECK(tail.series.back().norms.energy == full.series.back().norms.energy);
}

TEST_CASE("report formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(255) == "00000000000000ff");

    TrajectoryRecord rec;
    const SigmaProfile p = SigmaProfile::pure_power(0.1);
    rec.series.push_back({0.0, {4.0, 9.0, 64.0, 0.0}});
    CHECK(trajectory_csv(rec, p) == "t,h,v,l1b,stopped\n");
    rec.series.push_back({0.5, {1.0, 1.0, 1.0, 0.0}});
    rec.stopped = true;
    CHECK(trajectory_csv(rec, p) == "t,h,v,l1b,stopped\n0,2,3,2,0\n0.5,1,1,1,1\n");
}

TEST_CASE("output directory lists every file with its hash") {
    const auto dir = scratch("outdir");
    std::filesystem::remove_all(dir);
    const RunConfig rc = parse_config_text("{}");
    OutputDir out(dir, echo_config(rc), config_digest(rc));
    out.write("a.txt", "hello");
    out.write("a.txt", "hello again");
    write_atomic(dir / "b.bin", "xyz");
    out.record("b.bin");
    out.add_seed(3);
    out.finish(false, "simulate", 0);
    const json m = json::parse(read_file(dir / "manifest.json"));
    REQUIRE(m["files"].size() == 2);
    CHECK(m["files"][0]["fnv1a64"] == hex64(fnv1a64("hello again")));
    CHECK(m["files"][1]["fnv1a64"] == hex64(fnv1a64("xyz")));
    CHECK(m["partial"] == false);
    CHECK(m["seeds"] == json::array({3}));
    CHECK(m["config_digest"] == hex64(config_digest(parse_config(m["config"]))));
    CHECK(!std::filesystem::exists(dir / "a.txt.tmp"));
}
