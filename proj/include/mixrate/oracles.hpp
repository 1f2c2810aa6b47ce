// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "mixrate/functionals.hpp"
#include "mixrate/velocity.hpp"

// Independent reference computations used by the validation suite. None of
// them share code with the production solvers they check.
namespace mixrate::oracles {

// Exhaustive vertex enumeration of the omega2 polytope (box, Lipschitz
// steps, weighted mean zero) in phi coordinates. Returns max c.phi for each
// objective. Exponential cost; intended for n <= 10 nodes.
std::vector<double> omega2_vertex_enumeration(const Omega2Lp& data,
                                              const std::vector<std::vector<double>>& objectives);

// Affine least-squares residual of PV on J from a dense midpoint sum of V
// (cumulative primitive) and the 3x3 normal equations in raw moments.
double affine_residual_bruteforce(const VelocityField& v, Interval j, std::size_t cells = 200000);

}  // namespace mixrate::oracles
