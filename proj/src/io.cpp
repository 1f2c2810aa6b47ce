// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mixrate/error.hpp"

namespace mixrate::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv(const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& columns) {
  require(header.size() == columns.size(), ErrorCode::invalid_argument,
          "csv: header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    require(c.size() == rows, ErrorCode::invalid_argument, "csv: columns differ in length");
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      out += format_double(columns[j][i]);
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::io, "sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

std::string grid_bytes(const Eigen::MatrixXd& m) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  std::string out(static_cast<std::size_t>(m.size()) * 8, '\0');
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j, pos += 8) {
      const double v = m(i, j);
      std::memcpy(out.data() + pos, &v, 8);
    }
  return out;
}

Eigen::MatrixXd grid_from_bytes(std::string_view bytes, std::size_t rows, std::size_t cols) {
  require(bytes.size() == rows * cols * 8, ErrorCode::io, "grid: payload size does not match");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t pos = 0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j, pos += 8) {
      double v;
      std::memcpy(&v, bytes.data() + pos, 8);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  return m;
}

void ArtifactSet::add(std::string name, std::string kind, std::string bytes) {
  require(find(name) == nullptr, ErrorCode::invalid_argument, "artifact " + name + " added twice");
  require(name != "manifest.json", ErrorCode::invalid_argument, "manifest.json is reserved");
  items_.push_back({std::move(name), std::move(kind), std::move(bytes)});
}

void ArtifactSet::add_json(std::string name, const nlohmann::json& j) {
  add(std::move(name), "json", j.dump(2) + "\n");
}

void ArtifactSet::add_csv(std::string name, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& columns) {
  add(std::move(name), "csv", csv(header, columns));
}

void ArtifactSet::add_grid(const std::string& name, const Eigen::MatrixXd& m, double time,
                           nlohmann::json extra) {
  extra["rows"] = m.rows();
  extra["cols"] = m.cols();
  extra["layout"] = "row-major";
  extra["dtype"] = "float64";
  extra["endianness"] = "little";
  extra["time"] = time;
  extra["payload"] = name + ".bin";
  add(name + ".bin", "grid", grid_bytes(m));
  add_json(name + ".json", extra);
}

const Artifact* ArtifactSet::find(std::string_view name) const {
  for (const auto& a : items_)
    if (a.name == name) return &a;
  return nullptr;
}

nlohmann::json ArtifactSet::write(const std::filesystem::path& dir,
                                  const nlohmann::json& metadata) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json manifest = metadata;
  manifest["artifacts"] = nlohmann::json::array();
  for (const auto& a : items_) {
    const auto path = dir / a.name;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    write_file(path, a.bytes);
    manifest["artifacts"].push_back(
        {{"path", a.name}, {"kind", a.kind}, {"bytes", a.bytes.size()}, {"sha256", sha256_hex(a.bytes)}});
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace mixrate::io
