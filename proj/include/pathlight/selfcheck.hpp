#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathlight/irl.hpp"

namespace pathlight {

using GradientFn = std::function<std::vector<double>(const RewardModel&, const Trajectory&, const Mdp&,
                                                     const StateFeatures&, int)>;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfcheckOptions {
  bool quick = false;
  std::uint64_t seed = 1;
  GradientFn gradient = irl_gradient;  // swapped out by the mutation fixture
};

// Enumeration equivalence, finite-difference gradient and structural
// property checks on built-in tiny maps.
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {});

// The selfcheck's gradient with its sign flipped.
std::vector<double> sign_flipped_gradient(const RewardModel& model, const Trajectory& demo, const Mdp& mdp,
                                          const StateFeatures& features, int horizon);

}  // namespace pathlight
