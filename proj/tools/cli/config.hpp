#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genopt/harness.hpp"

namespace genopt::cli {

inline constexpr int kFormatVersion = 1;

/// A configuration problem, tagged with a stable machine-readable code.
class ConfigError : public Error {
public:
    ConfigError(std::string code, const std::string& message) : Error(message), code_(std::move(code)) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct ExperimentEntry {
    ExperimentSpec spec;
    /// For compare: name of the baseline this GeN experiment is paired with.
    std::optional<std::string> base;
};

struct Config {
    int format_version = kFormatVersion;
    std::optional<std::filesystem::path> output_dir;
    std::vector<ExperimentEntry> experiments;
};

/// Strict parse: unknown keys, wrong types, duplicate names and invalid
/// values all throw ConfigError.
[[nodiscard]] Config parse_config(const nlohmann::json& doc);
[[nodiscard]] Config load_config(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json to_json(const ExperimentSpec& spec);
[[nodiscard]] ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::string& where = "experiment");

[[nodiscard]] const char* to_string(ProblemKind kind);
[[nodiscard]] const char* to_string(OptimizerKind kind);

}  // namespace genopt::cli
