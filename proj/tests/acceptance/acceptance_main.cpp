// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Optional arguments: criterion ids to run (default all), e.g. "1 2 7".

#include <cstdio>
#include <cstdlib>
#include <string>

#include "mixrate/validation.hpp"

int main(int argc, char** argv) {
  mixrate::validation::SuiteOptions opt;
  for (int i = 1; i < argc; ++i) opt.criteria.push_back(std::atoi(argv[i]));
  opt.on_result = [](const mixrate::validation::CriterionResult& r) {
    std::printf("%s\n", mixrate::validation::format_line(r).c_str());
    std::fflush(stdout);
  };
  const auto results = mixrate::validation::run_suite(opt);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
