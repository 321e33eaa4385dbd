#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace genopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct CommandOptions {
    std::filesystem::path config_path;
    /// Overrides the config's output_dir; "." when neither is given.
    std::optional<std::filesystem::path> out_dir;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

/// Writes <out>/<name>.csv per experiment and <out>/summary.csv.
int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Writes <out>/<name>_grid.csv per experiment (18 rows + header) and prints
/// the table with the winner marked.
int cmd_grid_search(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Every GeN experiment names its baseline via "base"; every baseline must be
/// claimed. Writes <out>/compare.csv (iter + one loss column per experiment)
/// and <out>/compare_summary.csv.
int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace genopt::cli
