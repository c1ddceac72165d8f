#pragma once

#include "psns/diagnostics.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace psns {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Shortest form is not attempted: always 17 significant digits, which round-trips every double.
std::string format_double(double x);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Columns t, |u|_H, ‖u‖_V, |u|_{L^{1+b}}, stopped (1 only on the stopping row).
/// A record that took no step (T = 0) gives the header alone.
std::string trajectory_csv(const TrajectoryRecord& record, const SigmaProfile& profile);
/// One row per (separation, order).
std::string structure_csv(const StructureFunctionTable& table);

nlohmann::json to_json(const MomentEstimate& m);
nlohmann::json to_json(const EnsembleSummary& s);
nlohmann::json to_json(const InequalityReport& r);
nlohmann::json to_json(const ContractionRecord& r);
nlohmann::json to_json(const ContractionVerdict& v);
nlohmann::json to_json(const StationarityVerdict& v);
nlohmann::json to_json(const DriftTest& d);
nlohmann::json to_json(const PowerLawFit& f);
nlohmann::json to_json(const PathwiseScaling& p);
nlohmann::json to_json(const ScalingReport& r);

/// Output directory plus its manifest: every file written through it is listed with its content hash.
class OutputDir {
public:
    OutputDir(std::filesystem::path dir, nlohmann::json config, std::uint64_t digest);

    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }
    void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
    /// Records a file written elsewhere (e.g. a checkpoint) under its current content.
    void record(const std::string& name);
    const std::filesystem::path& path() const { return dir_; }

    /// Writes manifest.json; `partial` flags an interrupted or failed command.
    void finish(bool partial, const std::string& command, int exit_code);

private:
    std::filesystem::path dir_;
    nlohmann::json config_;
    std::uint64_t digest_;
    std::vector<std::uint64_t> seeds_;
    std::string start_;
    std::vector<std::pair<std::string, std::uint64_t>> files_;
};

}  // namespace psns
