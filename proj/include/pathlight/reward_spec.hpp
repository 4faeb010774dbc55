#pragma once

#include <string_view>

#include "pathlight/gridmap.hpp"
#include "pathlight/reward.hpp"

namespace pathlight {

/// Builds a linear reward model from `feature=weight` terms, e.g.
///
///   free=1.2 door=0.8 dist_wall=-0.9 zone:kitchen=0.4
///
/// Terms are separated by whitespace, commas or newlines; `#` starts a
/// comment. Feature names are those reported by FeatureField::names().
/// Unlisted features get weight 0; a name listed twice is an error.
RewardModel parse_reward_spec(std::string_view text, const FeatureField& field);

}  // namespace pathlight
