#include "pathlight/reward_spec.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathlight {

RewardModel parse_reward_spec(std::string_view text, const FeatureField& field) {
  const std::vector<std::string>& names = field.names();
  std::vector<double> theta(names.size(), 0.0);
  std::vector<bool> seen(names.size(), false);

  std::string cleaned;
  bool comment = false;
  for (char ch : text) {
    if (ch == '\n') comment = false;
    if (ch == '#') comment = true;
    cleaned += comment ? ' ' : (ch == ',' || ch == '\t' || ch == '\r' || ch == '\n') ? ' ' : ch;
  }

  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    if (cleaned[pos] == ' ') {
      ++pos;
      continue;
    }
    const std::size_t end = std::min(cleaned.find(' ', pos), cleaned.size());
    const std::string term = cleaned.substr(pos, end - pos);
    pos = end;
    const std::size_t eq = term.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("reward term '" + term + "' is not feature=weight");
    const std::string name = term.substr(0, eq);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("unknown feature '" + name + "' in reward spec");
    const std::size_t slot = static_cast<std::size_t>(it - names.begin());
    if (seen[slot]) throw std::invalid_argument("feature '" + name + "' listed twice");
    seen[slot] = true;
    const std::string value = term.substr(eq + 1);
    std::size_t used = 0;
    try {
      theta[slot] = std::stod(value, &used);
    } catch (const std::logic_error&) {
      used = std::string::npos;
    }
    if (used != value.size()) throw std::invalid_argument("bad weight '" + value + "' for feature '" + name + "'");
  }
  return RewardModel::linear(field.dim(), std::move(theta));
}

}  // namespace pathlight
