// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(MIXRATE_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const char* name) { return std::string(MIXRATE_TEST_DATA) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh(const char* name) {
  const auto p = fs::current_path() / "cli_out" / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("bounds on the two-plateau field") {
  const auto out = fresh("bounds");
  const auto r = cli("bounds --config " + data("bounds_two_plateau.json") + " --out " + out.string());
  CHECK(r.code == 0);
  const auto text = slurp(out / "bounds.json");
  CHECK(text.find("\"t_P\": 1.4375") != std::string::npos);
  CHECK(fs::exists(out / "manifest.json"));

  // rerunning from the manifest reproduces the artifact byte for byte
  const auto again = fresh("bounds_again");
  CHECK(cli("run --config " + (out / "manifest.json").string() + " --out " + again.string()).code == 0);
  CHECK(slurp(again / "bounds.json") == text);
}

TEST_CASE("malformed configs exit 1 without artifacts") {
  for (const char* name : {"malformed.json", "not_json.json", "does_not_exist.json"}) {
    CAPTURE(name);
    const auto out = fresh("bad");
    CHECK(cli("bounds --config " + data(name) + " --out " + out.string()).code == 1);
    CHECK_FALSE(fs::exists(out));
  }
  // a config whose task disagrees with the subcommand
  const auto out = fresh("mismatch");
  CHECK(cli("spectrum --config " + data("bounds_two_plateau.json") + " --out " + out.string()).code == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("spectrum then report") {
  const auto out = fresh("spectrum");
  REQUIRE(cli("spectrum --config " + data("spectrum_cos.json") + " --out " + out.string()).code == 0);
  CHECK(fs::exists(out / "sigma_min.csv"));

  const auto cfg = fresh("report_cfg");
  fs::create_directories(cfg);
  {
    std::ofstream f(cfg / "report.json");
    f << R"({"task":"report","params":{"spectrum":")" << (out / "spectrum.json").string() << "\"}}";
  }
  const auto rep = fresh("report");
  CHECK(cli("report --config " + (cfg / "report.json").string() + " --out " + rep.string()).code == 0);
  const auto table = slurp(rep / "report.txt");
  CHECK(table.find("omega2 bound") != std::string::npos);
  CHECK(table.find("FAIL") == std::string::npos);
  CHECK(fs::exists(rep / "spectrum_plot.csv"));

  const auto empty = fresh("report_empty");
  CHECK(cli("report --out " + empty.string()).code == 0);
  CHECK(slurp(empty / "report.txt").empty());
}

TEST_CASE("validate prints one line per selected criterion") {
  const auto out = fresh("validate");
  const auto r = cli("validate --config " + data("validate_quick.json") + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS  1") != std::string::npos);
  CHECK(r.out.find("PASS  7") != std::string::npos);
  CHECK(fs::exists(out / "validation.json"));
}

TEST_CASE("schema and usage errors") {
  const auto s = cli("schema");
  CHECK(s.code == 0);
  CHECK(s.out.find("\"simulate\"") != std::string::npos);
  CHECK(cli("bounds").code != 0);
  CHECK(cli("frobnicate").code != 0);
}
