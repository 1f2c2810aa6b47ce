// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixrate/io.hpp"

namespace mixrate::validation {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  nlohmann::json metrics = nlohmann::json::object();
  double seconds = 0.0;
};

struct SuiteOptions {
  std::vector<int> criteria;  // empty: all of 1..11
  std::uint64_t seed = 20240917;
  std::function<void(int id, const std::string& title)> on_start;
  std::function<void(const CriterionResult&)> on_result;
  io::ArtifactSet* artifacts = nullptr;  // receives CSV traces when set
};

const std::vector<std::pair<int, std::string>>& criteria();

std::vector<CriterionResult> run_suite(const SuiteOptions& options);

// "PASS  4  resolvent ordering ... (12.3 s): detail"
std::string format_line(const CriterionResult& r);

nlohmann::json to_json(const std::vector<CriterionResult>& results);

// Reduced-size runs of every suite that produces CSV or JSON artifacts.
// The determinism criterion builds this at several worker counts and
// compares bytes.
io::ArtifactSet determinism_bundle(std::uint64_t seed);

}  // namespace mixrate::validation
