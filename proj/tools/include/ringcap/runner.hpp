#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ringcap::runner {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, internal_error = 1, config_error = 2, not_converged = 3 };

/// Invalid or inconsistent configuration. Raised before any output is written.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"dimension", "bounds",          "profile-energy",
                                              "solve",     "sandwich",        "green",
                                              "singleton-limit", "regime-sweep", "fit"};
  return names;
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config value
  bool quiet = false;
  /// Treat |p0 - Q(x0)| <= snap_tolerance as critical by setting Q(x0) = p0.
  bool snap_critical = false;
  double snap_tolerance = 0.05;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunResult {
  int status = ExitCode::ok;
  std::string message;
  std::vector<OutputFile> files;  // task outputs, manifest excluded
};

/// Validates `config` for `task` and runs it, returning the artifacts in memory.
/// Throws ConfigError for schema or parameter problems.
RunResult execute(const std::string& task, const Json& config, const RunOptions& options);

/// execute() plus writing the artifacts and manifest.json under options.out_dir.
/// Returns the exit status; nothing is written on a config error.
int run(const std::string& task, const Json& config, const RunOptions& options);

/// Reads a JSON config file; throws ConfigError on parse failure.
Json load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace ringcap::runner
