// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace mixrate::parallel {

// Process-wide worker count. 0 means "one per hardware thread". Results of
// every parallel routine in the library are independent of this value.
void set_workers(unsigned n);
unsigned workers();

// Calls body(i) for every i in [0, count). Work is handed out dynamically;
// callers write results by index so the merge order never depends on
// scheduling. The first exception (lowest index) is rethrown.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mixrate::parallel
