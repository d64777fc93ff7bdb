#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vortexgas/io.hpp"

namespace vortexgas::experiments {

/// A named experiment plus flat key=value overrides; every numeric output of
/// a run is a pure function of (experiment, params, seed), independent of the
/// worker count.
struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> params;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
};

/// `key=value` lines; blank lines and `#` comments are skipped.
/// Throws Error("config-invalid") on unreadable files or malformed lines.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

/// The dispatchable experiment tags, in canonical order ("all" last).
const std::vector<std::string>& experiment_names();

struct RunResult {
    io::RunManifest manifest;
    bool all_passed = false;       ///< every recorded check passed
    bool noise_dominated = false;  ///< rate experiment below its sampling floor
};

/// Dispatch one experiment: writes its CSV/SVG outputs and manifest.json
/// atomically under cfg.out_dir and returns the verdicts.  Unknown experiment
/// tags, unknown parameter keys, and unparsable values throw
/// Error("config-invalid").
RunResult run(const ExperimentConfig& cfg);

/// Merge the verdict blocks of existing manifests into one markdown summary
/// mapping every check to the mathematical statement it probes.  Throws
/// Error("manifest-missing") when the list is empty or a path does not
/// resolve to a readable manifest.
std::string report(const std::vector<std::filesystem::path>& manifest_paths);

}  // namespace vortexgas::experiments
