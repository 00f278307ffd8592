#pragma once

#include <string>
#include <vector>

#include "core/numerics.hpp"

namespace sfuda {

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
  int trials = 0;
  bool passed = false;
};

/// Finite-difference verification of every analytic loss gradient, plus a
/// full backprop-through-model check. `corrupt` perturbs the analytic side
/// (test fixture for the failure path).
std::vector<GradCheckResult> run_gradient_checks(int trials, double tolerance = 1e-4,
                                                 bool corrupt = false);

}  // namespace sfuda
