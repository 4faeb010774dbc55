#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathlight/gridmap.hpp"
#include "pathlight/mdp.hpp"

namespace pathlight {

class IrlError : public std::runtime_error {
 public:
  enum class Kind {
    DimensionMismatch,
    NonpositiveRewardViolated,
    HorizonMismatch,
    InconsistentTrajectory,
    ZeroProbabilityStep,
    NonFiniteLoss,
    InstanceTooLarge,
    InvalidConfig,
    UnreachableStart,
    MalformedCheckpoint,
    MalformedTrajectoryFile,
  };

  IrlError(Kind kind, const std::string& what, int index = -1) : std::runtime_error(what), kind_(kind), index_(index) {}

  Kind kind() const { return kind_; }
  // Step or epoch index for ZeroProbabilityStep / NonFiniteLoss, else -1.
  int index() const { return index_; }

 private:
  Kind kind_;
  int index_;
};

/// Feature rows of the MDP's states, in StateId order.
struct StateFeatures {
  int dim = 0;
  std::vector<double> rows;

  std::span<const double> row(StateId s) const {
    return {rows.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  int state_count() const { return dim == 0 ? 0 : static_cast<int>(rows.size() / static_cast<std::size_t>(dim)); }
};

StateFeatures state_features(const FeatureField& field, const Mdp& mdp);

double softplus(double x);
double sigmoid(double x);

/// Nonpositive per-state reward r(s) = -softplus(g_theta(f(s))). g is either
/// linear in the features or a one-hidden-layer tanh network.
class RewardModel {
 public:
  enum class Kind { Linear, Mlp };

  static RewardModel linear(int feature_dim, std::vector<double> theta = {});
  static RewardModel mlp(int feature_dim, int hidden = 16, std::uint64_t seed = 0);
  static RewardModel mlp_with_params(int feature_dim, int hidden, std::vector<double> theta);

  Kind kind() const { return kind_; }
  int feature_dim() const { return feature_dim_; }
  int hidden() const { return hidden_; }
  std::size_t param_count() const { return theta_.size(); }
  const std::vector<double>& theta() const { return theta_; }
  std::vector<double>& theta() { return theta_; }

  double raw(std::span<const double> f) const;
  double reward(std::span<const double> f) const { return -softplus(raw(f)); }

  // grad += coeff * d r(f) / d theta
  void accumulate_gradient(std::span<const double> f, double coeff, std::span<double> grad) const;

 private:
  RewardModel(Kind kind, int feature_dim, int hidden, std::vector<double> theta);

  Kind kind_;
  int feature_dim_;
  int hidden_;
  std::vector<double> theta_;
};

std::vector<double> reward_field(const RewardModel& model, const StateFeatures& features);

// Sum over states of coeff(s) * d r(s) / d theta.
std::vector<double> chain_reward_gradient(const RewardModel& model, const StateFeatures& features,
                                          std::span<const double> coeff);

std::string format_checkpoint(const RewardModel& model);
RewardModel parse_checkpoint(std::string_view text);

}  // namespace pathlight
