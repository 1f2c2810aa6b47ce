// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace mixrate::io {

// Shortest text that round-trips the double ("%.17g"); artifacts compare
// byte for byte, so every writer goes through this.
std::string format_double(double x);

// Header plus one line per row; all columns must have equal length.
std::string csv(const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& columns);

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Row-major little-endian float64 payload; the sidecar records the layout.
std::string grid_bytes(const Eigen::MatrixXd& m);
Eigen::MatrixXd grid_from_bytes(std::string_view bytes, std::size_t rows, std::size_t cols);

struct Artifact {
  std::string name;  // relative path inside the output directory
  std::string kind;  // csv, json, grid, text
  std::string bytes;
};

// Collects artifacts in memory so a task either writes everything or nothing.
class ArtifactSet {
 public:
  void add(std::string name, std::string kind, std::string bytes);
  void add_json(std::string name, const nlohmann::json& j);
  void add_csv(std::string name, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
  // name.bin plus name.json sidecar (dimensions, time, endianness, dtype).
  void add_grid(const std::string& name, const Eigen::MatrixXd& m, double time,
                nlohmann::json extra = nlohmann::json::object());

  const std::vector<Artifact>& artifacts() const { return items_; }
  const Artifact* find(std::string_view name) const;
  bool empty() const { return items_.empty(); }

  // Writes every artifact and manifest.json listing them with SHA-256
  // hashes. Returns the manifest.
  nlohmann::json write(const std::filesystem::path& dir, const nlohmann::json& metadata) const;

 private:
  std::vector<Artifact> items_;
};

}  // namespace mixrate::io
