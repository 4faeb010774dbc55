#include "pathlight/reward.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pathlight/random.hpp"

namespace pathlight {

StateFeatures state_features(const FeatureField& field, const Mdp& mdp) {
  StateFeatures out;
  out.dim = field.dim();
  out.rows.reserve(static_cast<std::size_t>(mdp.state_count()) * static_cast<std::size_t>(out.dim));
  for (StateId s = 0; s < mdp.state_count(); ++s) {
    const auto f = field.at(mdp.cell(s));
    out.rows.insert(out.rows.end(), f.begin(), f.end());
  }
  return out;
}

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RewardModel::RewardModel(Kind kind, int feature_dim, int hidden, std::vector<double> theta)
    : kind_(kind), feature_dim_(feature_dim), hidden_(hidden), theta_(std::move(theta)) {}

RewardModel RewardModel::linear(int feature_dim, std::vector<double> theta) {
  if (feature_dim <= 0) throw IrlError(IrlError::Kind::InvalidConfig, "feature dimension must be positive");
  if (theta.empty()) theta.assign(static_cast<std::size_t>(feature_dim), 0.0);
  if (theta.size() != static_cast<std::size_t>(feature_dim))
    throw IrlError(IrlError::Kind::DimensionMismatch, "linear model needs one weight per feature");
  return RewardModel(Kind::Linear, feature_dim, 0, std::move(theta));
}

RewardModel RewardModel::mlp_with_params(int feature_dim, int hidden, std::vector<double> theta) {
  if (feature_dim <= 0 || hidden <= 0)
    throw IrlError(IrlError::Kind::InvalidConfig, "mlp dimensions must be positive");
  const std::size_t expected = static_cast<std::size_t>(hidden) * (feature_dim + 2) + 1;
  if (theta.size() != expected)
    throw IrlError(IrlError::Kind::DimensionMismatch,
                   "mlp expects " + std::to_string(expected) + " parameters, got " + std::to_string(theta.size()));
  return RewardModel(Kind::Mlp, feature_dim, hidden, std::move(theta));
}

RewardModel RewardModel::mlp(int feature_dim, int hidden, std::uint64_t seed) {
  if (feature_dim <= 0 || hidden <= 0)
    throw IrlError(IrlError::Kind::InvalidConfig, "mlp dimensions must be positive");
  Rng rng(seed);
  std::vector<double> theta;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int i = 0; i < hidden * feature_dim; ++i) theta.push_back(s1 * rng.normal());
  for (int i = 0; i < hidden; ++i) theta.push_back(0.0);
  for (int i = 0; i < hidden; ++i) theta.push_back(s2 * rng.normal());
  theta.push_back(0.0);
  return mlp_with_params(feature_dim, hidden, std::move(theta));
}

// MLP parameter layout: W1 (hidden x F, row-major), b1 (hidden), w2 (hidden), b2.
double RewardModel::raw(std::span<const double> f) const {
  const std::size_t F = static_cast<std::size_t>(feature_dim_);
  if (kind_ == Kind::Linear) {
    double acc = 0.0;
    for (std::size_t j = 0; j < F; ++j) acc += theta_[j] * f[j];
    return acc;
  }
  const std::size_t H = static_cast<std::size_t>(hidden_);
  const double* w1 = theta_.data();
  const double* b1 = w1 + H * F;
  const double* w2 = b1 + H;
  double out = w2[H];
  for (std::size_t h = 0; h < H; ++h) {
    double z = b1[h];
    for (std::size_t j = 0; j < F; ++j) z += w1[h * F + j] * f[j];
    out += w2[h] * std::tanh(z);
  }
  return out;
}

void RewardModel::accumulate_gradient(std::span<const double> f, double coeff, std::span<double> grad) const {
  const std::size_t F = static_cast<std::size_t>(feature_dim_);
  // d(-softplus(g))/dg = -sigmoid(g)
  const double outer = -coeff * sigmoid(raw(f));
  if (kind_ == Kind::Linear) {
    for (std::size_t j = 0; j < F; ++j) grad[j] += outer * f[j];
    return;
  }
  const std::size_t H = static_cast<std::size_t>(hidden_);
  const double* w1 = theta_.data();
  const double* b1 = w1 + H * F;
  const double* w2 = b1 + H;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + H * F;
  double* g_w2 = g_b1 + H;
  for (std::size_t h = 0; h < H; ++h) {
    double z = b1[h];
    for (std::size_t j = 0; j < F; ++j) z += w1[h * F + j] * f[j];
    const double a = std::tanh(z);
    g_w2[h] += outer * a;
    const double back = outer * w2[h] * (1.0 - a * a);
    g_b1[h] += back;
    for (std::size_t j = 0; j < F; ++j) g_w1[h * F + j] += back * f[j];
  }
  g_w2[H] += outer;
}

std::vector<double> reward_field(const RewardModel& model, const StateFeatures& features) {
  if (features.dim != model.feature_dim())
    throw IrlError(IrlError::Kind::DimensionMismatch, "feature dimension " + std::to_string(features.dim) +
                                                          " does not match model dimension " +
                                                          std::to_string(model.feature_dim()));
  const int n = features.state_count();
  std::vector<double> r(static_cast<std::size_t>(n));
  for (StateId s = 0; s < n; ++s) {
    r[static_cast<std::size_t>(s)] = model.reward(features.row(s));
    if (!(r[static_cast<std::size_t>(s)] <= 0.0))
      throw IrlError(IrlError::Kind::NonpositiveRewardViolated, "reward is positive or NaN at state " +
                                                                    std::to_string(s));
  }
  return r;
}

std::vector<double> chain_reward_gradient(const RewardModel& model, const StateFeatures& features,
                                          std::span<const double> coeff) {
  std::vector<double> grad(model.param_count(), 0.0);
  for (StateId s = 0; s < features.state_count(); ++s) {
    const double c = coeff[static_cast<std::size_t>(s)];
    if (c != 0.0) model.accumulate_gradient(features.row(s), c, grad);
  }
  return grad;
}

std::string format_checkpoint(const RewardModel& model) {
  std::string out = model.kind() == RewardModel::Kind::Linear ? "linear\n" : "mlp\n";
  out += std::to_string(model.feature_dim());
  if (model.kind() == RewardModel::Kind::Mlp) out += ' ' + std::to_string(model.hidden());
  out += '\n';
  char buf[40];
  for (double v : model.theta()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out += buf;
  }
  return out;
}

RewardModel parse_checkpoint(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& why) { return IrlError(IrlError::Kind::MalformedCheckpoint, why); };
  std::string kind;
  if (!std::getline(in, kind)) throw fail("empty checkpoint");
  std::string dims;
  if (!std::getline(in, dims)) throw fail("missing dimensions line");
  std::istringstream dim_in(dims);
  int feature_dim = 0;
  int hidden = 0;
  if (!(dim_in >> feature_dim)) throw fail("bad feature dimension");
  if (kind == "mlp" && !(dim_in >> hidden)) throw fail("bad hidden dimension");
  std::vector<double> theta;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      theta.push_back(std::stod(line, &used));
      if (used != line.size()) throw fail("trailing characters in value '" + line + "'");
    } catch (const std::logic_error&) {
      throw fail("bad value '" + line + "'");
    }
  }
  if (theta.empty()) throw fail("checkpoint has no parameters");
  if (kind == "linear") return RewardModel::linear(feature_dim, std::move(theta));
  if (kind == "mlp") return RewardModel::mlp_with_params(feature_dim, hidden, std::move(theta));
  throw fail("unknown model kind '" + kind + "'");
}

}  // namespace pathlight
