#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace patchant {

inline constexpr const char* kVersion = "0.1.0";

enum class ExitCode : int { Success = 0, Invalid = 2, NotConverged = 3 };

struct RunConfig {
    std::string command;
    nlohmann::json document;  // full config, section defaults applied lazily
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    unsigned workers = 1;
    std::filesystem::path base_dir;  // relative input paths resolve against this
};

// Command-line values that override the config document.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
    std::optional<unsigned> workers;
    std::optional<std::string> fit_mode;  // "reference" | "antenna"
    std::optional<std::filesystem::path> input;
};

// Throws ValidationError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc, const RunOverrides& overrides = {},
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path, const RunOverrides& overrides = {});

struct RunOutcome {
    ExitCode code = ExitCode::Success;
    std::vector<std::filesystem::path> artifacts;  // relative to output_dir, manifest last
    std::string message;
};

// Dispatches the command, writes artifacts and manifest.json. Library errors map to exit codes.
RunOutcome run(const RunConfig& config);

const std::vector<std::string>& known_commands();
std::string usage_text();

}  // namespace patchant
