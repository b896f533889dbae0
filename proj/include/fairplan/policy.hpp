#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairplan/allocation.hpp"

namespace fairplan {

/// Linear scores over per-action features read from the state table:
/// score(s, a) = theta . phi(s, a), turned into a softmax over legal actions.
/// With theta = 0 the policy is uniform over the legal set.
class LinearPolicy {
 public:
  static constexpr int kFeatures = 10;
  static const std::vector<std::string>& feature_names();

  LinearPolicy() : theta_(kFeatures, 0.0) {}
  explicit LinearPolicy(std::vector<double> theta);

  const std::vector<double>& parameters() const { return theta_; }

  static std::vector<double> features(const AllocationState& state, int action);
  double score(const AllocationState& state, int action) const;
  /// Softmax probabilities over `state.legal_actions()` (same order).
  std::vector<double> probabilities(const AllocationState& state) const;
  /// Masked argmax, ties to the lowest action index.
  int best_action(const AllocationState& state) const;

  std::string to_json() const;
  static LinearPolicy from_json(const std::string& text);

  friend bool operator==(const LinearPolicy&, const LinearPolicy&) = default;

 private:
  std::vector<double> theta_;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::int64_t step) : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

struct TrainOptions {
  std::int64_t total_steps = 20'000;  // environment decision steps
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  int log_every_episodes = 10;
};

struct CurvePoint {
  std::int64_t step = 0;
  double mean_return = 0.0;
};

struct TrainResult {
  LinearPolicy policy;
  std::vector<CurvePoint> curve;
  int episodes = 0;
};

/// Yields a fresh episode for a given index; must be deterministic in that index.
using EpisodeGenerator = std::function<AllocationState(std::uint64_t)>;

/// REINFORCE with undiscounted returns and a running-mean baseline.
TrainResult rl_train(const EpisodeGenerator& generator, const TrainOptions& options);

std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace fairplan
