// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <random>

#include "doctest.h"
#include "mixrate/error.hpp"
#include "mixrate/io.hpp"
#include "mixrate/tasks.hpp"

using namespace mixrate;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  static const auto root = [] {
    std::random_device rd;
    auto p = fs::temp_directory_path() / ("mixrate_unit_" + std::to_string(rd()));
    fs::create_directories(p);
    return p;
  }();
  auto p = root / name;
  fs::remove_all(p);
  return p;
}

json two_plateau() { return json::parse(R"({"kind":"piecewise_constant","breaks":[0.5],"values":[0,1]})"); }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("format_double round trips") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(2.0) == "2");
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(io::format_double(-INFINITY) == "-inf");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      CHECK(std::stod(io::format_double(x)) == x);
    }
  }

  TEST_CASE("csv") {
    CHECK(io::csv({"a", "b"}, {{1, 2}, {0.5, -3}}) == "a,b\n1,0.5\n2,-3\n");
    CHECK_THROWS_AS(io::csv({"a", "b"}, {{1, 2}, {0.5}}), Error);
  }

  TEST_CASE("sha256") {
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }

  TEST_CASE("grid bytes round trip") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6.5;
    const auto b = io::grid_bytes(m);
    CHECK(b.size() == 6 * sizeof(double));
    double second;
    std::memcpy(&second, b.data() + sizeof(double), sizeof(double));
    CHECK(second == 2.0);  // row-major
    CHECK(io::grid_from_bytes(b, 2, 3) == m);
    CHECK_THROWS_AS(io::grid_from_bytes(b, 3, 3), Error);
  }

  TEST_CASE("artifact set writes a manifest with hashes") {
    io::ArtifactSet set;
    set.add_csv("a.csv", {"x"}, {{1.0, 2.0}});
    set.add_json("b.json", {{"k", 1}});
    set.add_grid("g", Eigen::MatrixXd::Identity(2, 2), 0.5);
    const auto dir = scratch("artifacts");
    const auto manifest = set.write(dir, {{"tool", "test"}});
    CHECK(manifest["tool"] == "test");
    REQUIRE(manifest["artifacts"].size() == 4);
    for (const auto& a : manifest["artifacts"]) {
      const auto bytes = io::read_file(dir / a["path"].get<std::string>());
      CHECK(io::sha256_hex(bytes) == a["sha256"]);
      CHECK(a["bytes"] == bytes.size());
    }
    const auto sidecar = json::parse(io::read_file(dir / "g.json"));
    CHECK(sidecar["rows"] == 2);
    CHECK(sidecar["time"] == 0.5);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK_THROWS_AS(set.add("manifest.json", "json", "{}"), Error);
  }
}

TEST_SUITE("tasks") {
  TEST_CASE("exit codes") {
    CHECK(tasks::exit_code_for(ErrorCode::config) == 1);
    CHECK(tasks::exit_code_for(ErrorCode::io) == 3);
    CHECK(tasks::exit_code_for(ErrorCode::numeric) == 4);
    CHECK(tasks::exit_code_for(ErrorCode::domain) == 4);
  }

  TEST_CASE("config validation") {
    auto bad = [](const char* text) {
      try {
        tasks::parse_config(json::parse(text));
      } catch (const Error& e) {
        return e.code() == ErrorCode::config;
      }
      return false;
    };
    CHECK(bad(R"({"task":"bounds"})"));  // velocity required
    CHECK(bad(R"({"task":"nope"})"));
    CHECK(bad(R"({"task":"bounds","velocity":{"kind":"sine"},"extra":1})"));
    CHECK(bad(R"({"task":"bounds","velocity":{"kind":"sine"},"params":{"omega2_grid":"x"}})"));
    CHECK(bad(R"({"task":"bounds","velocity":{"kind":"sine"},"params":{"typo":1}})"));
    CHECK(bad(R"({"task":"simulate","velocity":{"kind":"sine"},"params":{"experiment":"teleport"}})"));
    CHECK(bad(R"({"task":"evolve","velocity":{"kind":"sine"},"params":{"grid_n":4}})"));
    CHECK_THROWS_AS(tasks::parse_config(json::parse(R"({"task":"bounds","velocity":{"kind":"sine"}})"),
                                        tasks::Task::spectrum),
                    Error);
    const auto ok = tasks::parse_config(json::parse(R"({"velocity":{"kind":"sine"}})"), tasks::Task::spectrum);
    CHECK(ok.task == tasks::Task::spectrum);
    CHECK(ok.params.contains("n"));
    const auto again = tasks::parse_config(ok.to_json());
    CHECK(again.to_json() == ok.to_json());
    CHECK_THROWS_AS(tasks::load_config(scratch("missing") / "none.json"), Error);
  }

  TEST_CASE("bounds task and rerun from its manifest") {
    json cfg = {{"task", "bounds"}, {"velocity", two_plateau()}, {"params", {{"omega2_grid", 64}}}};
    const auto c = tasks::parse_config(cfg);
    tasks::RunOptions o1;
    o1.output_dir = scratch("bounds1");
    const auto r1 = tasks::run(c, o1);
    CHECK(r1.exit_code == 0);
    const auto b = json::parse(io::read_file(*o1.output_dir / "bounds.json"));
    CHECK(b["t_P"] == 1.4375);

    const auto c2 = tasks::parse_config(r1.manifest);
    tasks::RunOptions o2;
    o2.output_dir = scratch("bounds2");
    tasks::run(c2, o2);
    CHECK(io::read_file(*o1.output_dir / "bounds.json") == io::read_file(*o2.output_dir / "bounds.json"));
  }

  TEST_CASE("simulate task is seeded") {
    json cfg = {{"task", "simulate"},
                {"velocity", two_plateau()},
                {"seed", 5},
                {"params", {{"experiment", "histogram"}, {"n_paths", 2000}, {"t_end", 0.2}, {"dt", 0.01}}}};
    const auto c = tasks::parse_config(cfg);
    tasks::RunOptions a, b;
    a.output_dir = scratch("sim_a");
    b.output_dir = scratch("sim_b");
    tasks::run(c, a);
    tasks::run(c, b);
    CHECK(io::read_file(*a.output_dir / "histogram.csv") == io::read_file(*b.output_dir / "histogram.csv"));
    b.seed = 6;
    b.output_dir = scratch("sim_c");
    tasks::run(c, b);
    CHECK(io::read_file(*a.output_dir / "histogram.csv") != io::read_file(*b.output_dir / "histogram.csv"));
  }

  TEST_CASE("report task") {
    const auto empty = tasks::run(tasks::parse_config(json{{"task", "report"}}),
                                  tasks::RunOptions{scratch("report_empty"), {}, {}, {}});
    CHECK(empty.exit_code == 0);
    CHECK_FALSE(empty.warnings.empty());

    const auto missing = tasks::parse_config(json{{"task", "report"}, {"params", {{"bounds", "nowhere.json"}}}},
                                             std::nullopt, scratch("report_missing"));
    try {
      tasks::run(missing, tasks::RunOptions{scratch("report_missing_out"), {}, {}, {}});
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
      CHECK(std::string(e.what()).find("bounds") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(scratch("report_missing_out")));

    // evolve produces decay.csv, which the report turns into a plot table
    json ev = {{"task", "evolve"},
               {"velocity", {{"kind", "cosine"}}},
               {"params",
                {{"grid_n", 32},
                 {"k_max", 4},
                 {"t_end", 1.0},
                 {"samples", 8},
                 {"omega2_grid", 64},
                 {"initial", {{"kind", "plane_wave"}, {"kx", 1}, {"ky", 1}}}}}};
    const auto evo_dir = scratch("evolve");
    tasks::run(tasks::parse_config(ev), tasks::RunOptions{evo_dir, {}, {}, {}});
    REQUIRE(fs::exists(evo_dir / "decay.csv"));
    const auto rep = tasks::parse_config(json{{"task", "report"}, {"params", {{"decay", "decay.csv"}}}},
                                         std::nullopt, evo_dir);
    const auto out = scratch("report_decay");
    tasks::run(rep, tasks::RunOptions{out, {}, {}, {}});
    CHECK(io::read_file(out / "report.txt").find("deviation <= envelope") != std::string::npos);
    CHECK(fs::exists(out / "decay_plot.csv"));
  }

  TEST_CASE("schema lists every task") {
    const auto s = tasks::schema();
    for (const char* t : {"bounds", "spectrum", "evolve", "simulate", "validate", "report"})
      CHECK(s["params"].contains(t));
  }
}
