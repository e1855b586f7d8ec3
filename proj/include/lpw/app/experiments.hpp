#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpw/app/config.hpp"

namespace lpw::app {

/// One file an experiment produces, relative to the output directory.
struct Artifact {
  std::string name;
  std::string content;
};

struct ExperimentResult {
  nlohmann::json report;
  std::vector<Artifact> artifacts;
  std::size_t flagged_runs = 0;
};

/// Runs the experiment in memory without touching the filesystem.
ExperimentResult run_experiment(const RunConfig& config);

struct ExecutionSummary {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> written;
  nlohmann::json manifest;
};

/// Runs the experiment and writes its artifacts plus manifest.json (written
/// last, atomically). Module errors are rethrown as std::runtime_error
/// prefixed with the experiment name.
ExecutionSummary execute(const RunConfig& config);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// One-paragraph description of what an experiment exercises (CLI help).
std::string describe(ExperimentKind kind);

}  // namespace lpw::app
