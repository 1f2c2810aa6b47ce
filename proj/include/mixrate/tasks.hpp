// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixrate/error.hpp"
#include "mixrate/evolve2d.hpp"
#include "mixrate/functionals.hpp"
#include "mixrate/spectral1d.hpp"
#include "mixrate/validation.hpp"

namespace mixrate::tasks {

enum class Task { bounds, spectrum, evolve, simulate, validate, report };
const char* to_string(Task t);
std::optional<Task> task_from_string(const std::string& s);

// Process exit statuses.
enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_validation_failed = 2,
  exit_io = 3,
  exit_numeric = 4,
};
int exit_code_for(ErrorCode code);

// Top-level keys: task, velocity, params, output_dir, seed. Anything else is
// rejected, as are unknown keys inside params and velocity.
struct ExperimentConfig {
  Task task = Task::bounds;
  std::optional<nlohmann::json> velocity;
  nlohmann::json params = nlohmann::json::object();  // defaults filled in
  std::filesystem::path output_dir = "mixrate_out";
  std::uint64_t seed = 1;
  std::filesystem::path base_dir = ".";  // resolves relative report inputs

  // Normalized form stored in manifests; parse_config(to_json()) round-trips.
  nlohmann::json to_json() const;
};

// Throws Error(config) on any schema violation. A manifest written by run()
// is also accepted; its embedded config is used.
ExperimentConfig parse_config(const nlohmann::json& j, std::optional<Task> forced_task = std::nullopt,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<Task> forced_task = std::nullopt);

// Bounds options from a (partial) bounds params object; config errors on
// unknown keys or bad values.
BoundsOptions bounds_options(const nlohmann::json& params);

// Parameter names, defaults and types per task (the published schema).
nlohmann::json schema();

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::function<void(const std::string&)> log;
  std::function<void(const validation::CriterionResult&)> on_criterion;
};

struct RunResult {
  int exit_code = exit_ok;
  std::string summary;
  std::vector<std::string> warnings;
  nlohmann::json manifest;
  std::filesystem::path output_dir;
};

// Executes the task and writes its artifacts plus manifest.json. Library
// errors propagate as mixrate::Error; map them with exit_code_for.
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

// CSV encodings shared by tasks and the validation suite.
std::string decay_csv(const DecayTrace& trace);
std::string sweep_csv(const SpectralSummary& summary);

}  // namespace mixrate::tasks
