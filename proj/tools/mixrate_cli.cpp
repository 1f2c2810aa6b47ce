// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "mixrate/mixrate.h"

namespace {

void print_line(int, int, const char* line, void*) {
  std::printf("%s\n", line);
  std::fflush(stdout);
}

void print_log(const char* message, void*) { std::fprintf(stderr, "%s\n", message); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixrate: mixing-rate bounds, spectra, relaxation and Monte Carlo for shear diffusions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mr_version()));

  std::string config, out;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool print_schema = false;

  const char* descriptions[][2] = {
      {"bounds", "compute the bounds report for a velocity field"},
      {"spectrum", "resolvent gap sweep and semigroup norms for one Fourier mode"},
      {"evolve", "evolve an initial field and check the relaxation envelope"},
      {"simulate", "Monte Carlo experiments (histogram, doeblin, tv, arcsine, kolmogorov)"},
      {"validate", "run the acceptance suite and print a pass/fail table"},
      {"report", "summarize earlier artifacts into a table and plot-data CSVs"},
      {"run", "run the task named in the config"}};
  std::vector<CLI::App*> subs;
  for (auto& d : descriptions) {
    auto* s = app.add_subcommand(d[0], d[1]);
    s->add_option("--config", config, "JSON config file (or a manifest.json to rerun)");
    s->add_option("--out", out, "output directory (overrides the config)");
    s->add_option("--seed", seed, "seed (overrides the config)");
    s->add_option("--workers", workers, "worker threads; results do not depend on it");
    subs.push_back(s);
  }
  app.add_subcommand("schema", "print the config schema")->callback([&] { print_schema = true; });

  CLI11_PARSE(app, argc, argv);

  if (print_schema) {
    char* s = nullptr;
    if (mr_schema_json(&s) != MR_OK) return 4;
    std::printf("%s\n", s);
    mr_string_free(s);
    return 0;
  }

  std::string task;
  CLI::App* chosen = nullptr;
  for (auto* s : subs)
    if (s->parsed()) chosen = s;
  if (!chosen) return 1;
  task = chosen->get_name();

  if (config.empty() && task != "validate" && task != "report") {
    std::fprintf(stderr, "error: %s needs --config\n", task.c_str());
    return 1;
  }

  mr_run_options opts{};
  opts.task = task == "run" ? nullptr : task.c_str();
  opts.output_dir = out.empty() ? nullptr : out.c_str();
  opts.has_seed = chosen->count("--seed") > 0;
  opts.seed = seed;
  opts.workers = workers;
  opts.on_criterion = print_line;
  opts.on_log = print_log;

  int code = 0;
  char* manifest = nullptr;
  const mr_status st = mr_run_task(config.empty() ? nullptr : config.c_str(), &opts, &code, &manifest);
  if (st != MR_OK) {
    std::fprintf(stderr, "error: %s\n", mr_last_error());
    return mr_exit_code(st);
  }
  mr_string_free(manifest);
  return code;
}
